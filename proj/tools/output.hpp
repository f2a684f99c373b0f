#pragma once

#include <chrono>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "casimir/assembly.hpp"

namespace casimir::cli {

// Named wall-clock stages, in the order they were recorded.
class Timings {
 public:
  void start(const std::string& stage);
  void stop();
  const std::vector<std::pair<std::string, double>>& stages() const noexcept { return stages_; }

 private:
  std::vector<std::pair<std::string, double>> stages_;
  std::string current_;
  std::chrono::steady_clock::time_point t0_;
};

/// Reproducibility header shared by every output.
struct Metadata {
  std::string command;
  nlohmann::json config;  // resolved scene plus command options
  std::vector<std::array<int, 3>> meshes;  // V, E, F per body
  std::optional<double> delta;             // absent for a single body
  Timings timings;

  void describe(const Assembly& assembly);
  nlohmann::json to_json() const;
};

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  void add_row(const std::vector<double>& values);
  // '#' metadata lines, header row, then rows with %.17g.
  void write(std::ostream& out, const Metadata& meta) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

std::string format_double(double v);

void write_json(std::ostream& out, const Metadata& meta, const nlohmann::json& result);

// Writes through `write` to `path`, or to stdout when `path` is empty.
void emit(const std::string& path, const std::function<void(std::ostream&)>& write);

}  // namespace casimir::cli
