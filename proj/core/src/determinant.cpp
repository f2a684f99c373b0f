#include "casimir/determinant.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

namespace casimir {

namespace {

// In place Cholesky of I + A where A (lower triangle) holds W - I. The
// pivots are tracked through e = pivot^2 - 1 so that log det = sum
// log1p(e) keeps full relative precision when W is close to I. On return
// the lower triangle of `a` is the Cholesky factor of I + A.
double log_det_identity_plus(Eigen::Ref<Eigen::MatrixXd> a, double& min_pivot, double& max_pivot,
                             const char* what) {
  const Eigen::Index n = a.rows();
  constexpr Eigen::Index panel = 96;
  double logdet = 0.0;
  for (Eigen::Index p0 = 0; p0 < n; p0 += panel) {
    const Eigen::Index nb = std::min(panel, n - p0);
    for (Eigen::Index c = p0; c < p0 + nb; ++c) {
      double e = a(c, c);
      for (Eigen::Index k = p0; k < c; ++k) e -= a(c, k) * a(c, k);
      if (!(1.0 + e > 0.0)) {
        std::ostringstream msg;
        msg << what << ": pivot " << c << " is " << 1.0 + e << " (matrix not positive definite)";
        throw NumericalError(msg.str());
      }
      logdet += std::log1p(e);
      min_pivot = std::min(min_pivot, 1.0 + e);
      max_pivot = std::max(max_pivot, 1.0 + e);
      const double piv = std::sqrt(1.0 + e);
      a(c, c) = piv;
      for (Eigen::Index r = c + 1; r < p0 + nb; ++r) {
        double v = a(r, c);
        for (Eigen::Index k = p0; k < c; ++k) v -= a(r, k) * a(c, k);
        a(r, c) = v / piv;
      }
    }
    const Eigen::Index rest = n - p0 - nb;
    if (rest == 0) continue;
    auto l11 = a.block(p0, p0, nb, nb);
    auto l21 = a.block(p0 + nb, p0, rest, nb);
    l11.triangularView<Eigen::Lower>().transpose().solveInPlace<Eigen::OnTheRight>(l21);
    a.block(p0 + nb, p0 + nb, rest, rest).selfadjointView<Eigen::Lower>().rankUpdate(l21, -1.0);
  }
  return logdet;
}

struct DiagonalFactors {
  std::vector<Eigen::LLT<Eigen::MatrixXd>> llt;
  double cond = 1.0;
};

// Throws unless the factorization succeeded; returns the condition
// estimate from the ratio of extreme squared pivots.
template <class Llt>
double check_factor(const Llt& llt, int j, double kappa) {
  const Eigen::VectorXd d = llt.matrixLLT().diagonal();
  if (llt.info() != Eigen::Success || !(d.minCoeff() > 0.0) || !d.allFinite()) {
    std::ostringstream msg;
    msg << "Cholesky factorization of diagonal block " << j + 1 << " failed at kappa " << kappa;
    throw NumericalError(msg.str());
  }
  const double ratio = d.maxCoeff() / d.minCoeff();
  return ratio * ratio;
}

DiagonalFactors factor_diagonal(const BlockOperator& z) {
  DiagonalFactors f;
  for (int j = 0; j < z.num_blocks(); ++j) {
    f.llt.emplace_back(z.block(j, j));
    f.cond = std::max(f.cond, check_factor(f.llt.back(), j, z.kappa()));
  }
  return f;
}

// C_jk = L_j^{-1} Z_jk L_k^{-T}.
Eigen::MatrixXd whiten_block(const DiagonalFactors& f, const BlockOperator& z, int j, int k) {
  Eigen::MatrixXd c = z.block(j, k);
  f.llt[j].matrixL().solveInPlace(c);
  f.llt[k].matrixU().solveInPlace<Eigen::OnTheRight>(c);
  return c;
}

// Power iteration on C^T C; a diagnostic, so a loose stopping rule is fine.
double largest_singular_value(const Eigen::MatrixXd& c) {
  if (c.size() == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(c.cols()).normalized();
  double sigma = 0.0;
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd w = c.transpose() * (c * v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = std::sqrt(norm);
    v = w / norm;
    if (std::abs(next - sigma) <= 1e-10 * next) return next;
    sigma = next;
  }
  return sigma;
}

void require_value(const BlockOperator& z) {
  if (z.kind() != OperatorKind::value) throw ConfigError("xi needs a value-type operator, not a derivative");
}

}  // namespace

XiSample xi(const BlockOperator& z) {
  require_value(z);
  BlockOperator work = z;
  return xi_in_place(work);
}

XiSample xi_in_place(BlockOperator& z) {
  require_value(z);
  XiSample out;
  out.kappa = z.kappa();
  const int nb = z.num_blocks();
  std::deque<Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>>> llt;
  for (int j = 0; j < nb; ++j) {
    llt.emplace_back(z.block(j, j));
    out.cond_zd = std::max(out.cond_zd, check_factor(llt.back(), j, z.kappa()));
  }
  if (nb == 1) return out;

  // Block Cholesky W = U^T U of the whitened matrix, with the upper blocks
  // U_jk (j < k) overwriting Z_jk.
  for (int j = 0; j < nb; ++j) {
    for (int k = j + 1; k < nb; ++k) {
      Eigen::MatrixXd& c = z.block(j, k);
      llt[j].matrixL().solveInPlace(c);
      llt[k].matrixU().solveInPlace<Eigen::OnTheRight>(c);
      out.schur_max_sv = std::max(out.schur_max_sv, largest_singular_value(c));
    }
  }

  double logdet = 0.0;
  out.min_pivot = 1.0;
  out.max_pivot = 1.0;
  Eigen::MatrixXd a;
  for (int j = 0; j < nb; ++j) {
    a.setZero(z.block_size(j), z.block_size(j));
    for (int i = 0; i < j; ++i) a.selfadjointView<Eigen::Lower>().rankUpdate(z.block(i, j).transpose(), -1.0);
    std::ostringstream what;
    what << "whitened matrix at kappa " << z.kappa() << ", block " << j + 1;
    logdet += log_det_identity_plus(a, out.min_pivot, out.max_pivot, what.str().c_str());
    const auto ljj = a.triangularView<Eigen::Lower>();
    for (int k = j + 1; k < nb; ++k) {
      for (int i = 0; i < j; ++i) z.block(j, k).noalias() -= z.block(i, j).transpose() * z.block(i, k);
      ljj.solveInPlace(z.block(j, k));
    }
  }
  out.xi = logdet;
  return out;
}

XiSample two_body_schur_xi(const BlockOperator& z) {
  require_value(z);
  if (z.num_blocks() != 2) throw ConfigError("two_body_schur_xi needs exactly two bodies");
  XiSample out;
  out.kappa = z.kappa();
  const DiagonalFactors f = factor_diagonal(z);
  out.cond_zd = f.cond;
  const Eigen::MatrixXd c = whiten_block(f, z, 0, 1);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(c);
  const Eigen::VectorXd s = svd.singularValues();
  out.singular_values.assign(s.data(), s.data() + s.size());
  out.schur_max_sv = s.size() ? s.maxCoeff() : 0.0;
  if (!(out.schur_max_sv < 1.0)) {
    std::ostringstream msg;
    msg << "whitened coupling has singular value " << out.schur_max_sv << " >= 1 at kappa " << z.kappa();
    throw NumericalError(msg.str());
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) sum += std::log1p(-s(i) * s(i));
  out.xi = sum;
  // W = [[I, C], [C^T, I]] has eigenvalues 1 +- sigma and 1.
  out.min_pivot = 1.0 - out.schur_max_sv;
  out.max_pivot = 1.0 + out.schur_max_sv;
  return out;
}

WhitenedSystem::WhitenedSystem(const BlockOperator& z) : n_(z.size()), offsets_(z.offsets()) {
  require_value(z);
  DiagonalFactors f = factor_diagonal(z);
  sample_.kappa = z.kappa();
  sample_.cond_zd = f.cond;
  for (auto& llt : f.llt) chol_.emplace_back(llt.matrixL());

  const int nb = z.num_blocks();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);  // W - I
  for (int j = 0; j < nb; ++j) {
    for (int k = j + 1; k < nb; ++k) {
      const Eigen::MatrixXd c = whiten_block(f, z, j, k);
      a.block(z.offset(j), z.offset(k), c.rows(), c.cols()) = c;
      a.block(z.offset(k), z.offset(j), c.cols(), c.rows()) = c.transpose();
    }
  }
  if (nb == 1) {
    relative_inverse_ = Eigen::MatrixXd::Zero(n_, n_);
    return;
  }
  Eigen::MatrixXd l = a;
  std::ostringstream what;
  what << "whitened matrix at kappa " << z.kappa();
  xi_ = log_det_identity_plus(l, sample_.min_pivot, sample_.max_pivot, what.str().c_str());
  sample_.xi = xi_;
  // W^{-1} - I = -W^{-1} (W - I).
  l.triangularView<Eigen::Lower>().solveInPlace(a);
  l.triangularView<Eigen::Lower>().adjoint().solveInPlace(a);
  relative_inverse_ = -a;
  relative_inverse_ = 0.5 * (relative_inverse_ + relative_inverse_.transpose()).eval();
}

Eigen::MatrixXd WhitenedSystem::whiten(const Eigen::MatrixXd& x) const {
  return whiten_columns(whiten_columns(x).transpose()).transpose();
}

Eigen::MatrixXd WhitenedSystem::whiten_columns(const Eigen::MatrixXd& x) const {
  if (x.cols() != n_) throw ConfigError("whiten_columns: column count does not match the operator");
  Eigen::MatrixXd out = x;
  for (std::size_t j = 0; j < chol_.size(); ++j) {
    const int o = offsets_[j];
    const int m = offsets_[j + 1] - o;
    auto cols = out.middleCols(o, m);
    chol_[j].triangularView<Eigen::Lower>().transpose().solveInPlace<Eigen::OnTheRight>(cols);
  }
  return out;
}

double xi_derivative(const BlockOperator& z, const BlockOperator& dz) {
  if (dz.kind() != OperatorKind::kappa_derivative) throw ConfigError("xi_derivative needs a derivative operator");
  if (dz.offsets() != z.offsets() || dz.kappa() != z.kappa()) {
    throw ConfigError("xi_derivative: operator and derivative differ in layout or kappa");
  }
  if (z.num_blocks() == 1) return 0.0;
  const WhitenedSystem ws(z);
  return ws.relative_inverse().cwiseProduct(ws.whiten(dz.dense())).sum();
}

}  // namespace casimir
