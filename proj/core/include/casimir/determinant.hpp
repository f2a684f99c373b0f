#pragma once

#include <vector>

#include <Eigen/Core>

#include "casimir/bem_operator.hpp"

namespace casimir {

/// Xi(i kappa) = log det(Z Z_D^{-1}) with diagnostics.
struct XiSample {
  double kappa = 0.0;
  double xi = 0.0;
  // Extreme pivots of the whitened matrix W (1 when there is no coupling).
  double min_pivot = 1.0;
  double max_pivot = 1.0;
  // Largest 2-norm condition estimate over the diagonal blocks, from the
  // Cholesky diagonal (ratio of extreme squared pivots).
  double cond_zd = 1.0;
  // Largest singular value of the whitened coupling C_12 (two bodies only).
  double schur_max_sv = 0.0;
  std::vector<double> singular_values;  // filled by two_body_schur_xi
};

// Block Cholesky whitening followed by an LDL-free Cholesky of W = I + C.
XiSample xi(const BlockOperator& z);
// Same result, factoring and whitening inside z's storage; z is left
// holding the factors. Halves peak memory for large meshes.
XiSample xi_in_place(BlockOperator& z);

// Two bodies: xi = sum log(1 - sigma_i^2) over singular values of C_12.
XiSample two_body_schur_xi(const BlockOperator& z);

// d/dkappa of xi from Z and dZ/dkappa at the same kappa.
double xi_derivative(const BlockOperator& z, const BlockOperator& dz);

/// Factorized data reused by the trace identity and kernel diagnostics.
class WhitenedSystem {
 public:
  explicit WhitenedSystem(const BlockOperator& z);

  int size() const noexcept { return n_; }
  double xi() const noexcept { return xi_; }
  const XiSample& sample() const noexcept { return sample_; }

  // L_D^{-1} X L_D^{-T} for a dense n x n matrix X.
  Eigen::MatrixXd whiten(const Eigen::MatrixXd& x) const;
  // X L_D^{-T} for a k x n matrix X.
  Eigen::MatrixXd whiten_columns(const Eigen::MatrixXd& x) const;
  // W^{-1} - I, the whitened form of Z^{-1} - Z_D^{-1}.
  const Eigen::MatrixXd& relative_inverse() const { return relative_inverse_; }

 private:
  int n_ = 0;
  double xi_ = 0.0;
  XiSample sample_;
  std::vector<int> offsets_;
  std::vector<Eigen::MatrixXd> chol_;  // lower factors of Z_jj
  Eigen::MatrixXd relative_inverse_;
};

}  // namespace casimir
