#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "casimir/edge_basis.hpp"
#include "casimir/quadrature.hpp"

namespace casimir {

enum class OperatorKind { value, kappa_derivative };

/// Dense symmetric Galerkin matrix split into per-body blocks. Only the
/// diagonal blocks and the upper off-diagonal blocks (j < k) are stored;
/// block (k, j) is the transpose of block (j, k).
class BlockOperator {
 public:
  BlockOperator(double kappa, OperatorKind kind, std::vector<int> offsets);

  double kappa() const noexcept { return kappa_; }
  OperatorKind kind() const noexcept { return kind_; }
  int size() const noexcept { return offsets_.back(); }
  int num_blocks() const noexcept { return static_cast<int>(offsets_.size()) - 1; }
  int offset(int j) const { return offsets_.at(j); }
  int block_size(int j) const { return offsets_.at(j + 1) - offsets_.at(j); }
  const std::vector<int>& offsets() const noexcept { return offsets_; }

  // Stored block (j <= k).
  const Eigen::MatrixXd& block(int j, int k) const;
  Eigen::MatrixXd& block(int j, int k);
  // Any block, transposing on demand for j > k.
  Eigen::MatrixXd block_copy(int j, int k) const;

  Eigen::MatrixXd dense() const;
  // Block-diagonal part only (the per-body operator).
  Eigen::MatrixXd dense_diagonal() const;

 private:
  int index(int j, int k) const;

  double kappa_;
  OperatorKind kind_;
  std::vector<int> offsets_;
  std::vector<Eigen::MatrixXd> blocks_;  // upper triangle of blocks, row by row
};

struct AssemblyOptions {
  QuadratureConfig quadrature;
  int threads = 0;  // 0: parallel_for default
};

// Z(kappa), the imaginary-frequency single layer Galerkin matrix.
BlockOperator assemble(const EdgeBasis& basis, double kappa, const AssemblyOptions& options = {});
// dZ/dkappa from the differentiated kernel on the same quadrature nodes.
BlockOperator assemble_derivative(const EdgeBasis& basis, double kappa, const AssemblyOptions& options = {});
// Both at once; shares every kernel evaluation.
std::pair<BlockOperator, BlockOperator> assemble_with_derivative(const EdgeBasis& basis, double kappa,
                                                                 const AssemblyOptions& options = {});

/// Off-surface mixed potential, 3 x n: P(x) a = k^2 S a - grad S Div a at x,
/// the field of the surface current with coefficients a (same sign
/// convention as Z). Throws ConfigError when x is closer to the surface
/// than the largest edge length.
Eigen::Matrix<double, 3, Eigen::Dynamic> potential_row(const Vec3& x, const EdgeBasis& basis, double kappa,
                                                       const QuadratureConfig& quadrature = {});

// Distance from x to the nearest triangle of the basis geometry.
double surface_distance(const EdgeBasis& basis, const Vec3& x);

// JSON header line {"n", "kappa", "blocks"} followed by n*n little-endian
// float64 values in row-major order.
void write_matrix_dump(const std::string& path, const BlockOperator& op);
BlockOperator read_matrix_dump(const std::string& path);

}  // namespace casimir
