#pragma once

#include <stdexcept>
#include <string>

namespace casimir {

// Error categories map onto the CLI exit codes (2, 3, 4).
enum class ErrorKind {
  config,       // bad input: parse errors, invalid meshes, overlapping bodies
  numerical,    // factorization failures, non-finite values
  convergence,  // quadrature or series did not reach the requested tolerance
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error(ErrorKind::convergence, what) {}
};

// Mesh validation failures carry a machine-checkable reason.
enum class MeshDefect {
  parse,
  index_out_of_range,
  degenerate_triangle,
  non_manifold_edge,
  inconsistent_orientation,
  inverted_orientation,
  unreferenced_vertex,
  not_connected,
};

const char* to_string(MeshDefect defect) noexcept;

class MeshError : public ConfigError {
 public:
  MeshError(MeshDefect defect, const std::string& what)
      : ConfigError(std::string(to_string(defect)) + ": " + what), defect_(defect) {}
  MeshDefect defect() const noexcept { return defect_; }

 private:
  MeshDefect defect_;
};

}  // namespace casimir
