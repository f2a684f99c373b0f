#include "casimir/spectral_oracle.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

#include "casimir/bessel.hpp"
#include "casimir/quadrature.hpp"

namespace casimir {

double legendre_normalized(int l, int m, double mu) {
  if (l < 0 || std::abs(m) > l) return 0.0;
  if (m < 0) return ((-m) % 2 ? -1.0 : 1.0) * legendre_normalized(l, -m, mu);
  // P_mm, then upward in l.
  double pmm = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  const double sin_theta = std::sqrt(std::max(0.0, (1.0 - mu) * (1.0 + mu)));
  for (int k = 1; k <= m; ++k) pmm *= -std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * sin_theta;
  if (l == m) return pmm;
  double prev = pmm;
  double cur = mu * std::sqrt(2.0 * m + 3.0) * pmm;
  for (int n = m + 2; n <= l; ++n) {
    const double a = std::sqrt((4.0 * n * n - 1.0) / (static_cast<double>(n) * n - static_cast<double>(m) * m));
    const double b = std::sqrt(((n - 1.0) * (n - 1.0) - static_cast<double>(m) * m) / (4.0 * (n - 1.0) * (n - 1.0) - 1.0));
    const double next = a * (mu * cur - b * prev);
    prev = cur;
    cur = next;
  }
  return cur;
}

double gaunt(int L, int m, int lambda, int l) {
  if (std::abs(m) > L || std::abs(m) > l || lambda < 0) return 0.0;
  const LineRule g = gauss_legendre((L + lambda + l) / 2 + 2);
  double sum = 0.0;
  for (std::size_t q = 0; q < g.nodes.size(); ++q) {
    const double mu = 2.0 * g.nodes[q] - 1.0;
    sum += 2.0 * g.weights[q] * legendre_normalized(L, m, mu) * legendre_normalized(lambda, 0, mu) *
           legendre_normalized(l, m, mu);
  }
  return 2.0 * std::numbers::pi * sum;
}

namespace {

// Legendre tables at fixed Gauss nodes so that every Gaunt coefficient with
// l, L <= lmax_source and lambda <= l + L is one dot product.
class GauntTable {
 public:
  explicit GauntTable(int lmax) : lmax_(lmax) {
    const int lam_max = 2 * lmax;
    const LineRule g = gauss_legendre(2 * lmax + 2);
    nq_ = static_cast<int>(g.nodes.size());
    w_.resize(nq_);
    p0_.assign((lam_max + 1) * nq_, 0.0);
    pm_.assign((lmax + 1) * (lmax + 1) * nq_, 0.0);
    for (int q = 0; q < nq_; ++q) {
      const double mu = 2.0 * g.nodes[q] - 1.0;
      w_[q] = 4.0 * std::numbers::pi * g.weights[q];
      for (int lam = 0; lam <= lam_max; ++lam) p0_[lam * nq_ + q] = legendre_normalized(lam, 0, mu);
      for (int m = 0; m <= lmax; ++m)
        for (int l = m; l <= lmax; ++l) pm_[(m * (lmax + 1) + l) * nq_ + q] = legendre_normalized(l, m, mu);
    }
  }

  double operator()(int L, int m, int lambda, int l) const {
    const double* a = &pm_[(m * (lmax_ + 1) + L) * nq_];
    const double* b = &p0_[lambda * nq_];
    const double* c = &pm_[(m * (lmax_ + 1) + l) * nq_];
    double sum = 0.0;
    for (int q = 0; q < nq_; ++q) sum += w_[q] * a[q] * b[q] * c[q];
    return sum;
  }

 private:
  int lmax_;
  int nq_ = 0;
  std::vector<double> w_, p0_, pm_;
};

const GauntTable& gaunt_table(int lmax) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GauntTable>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[lmax];
  if (!slot) slot = std::make_unique<GauntTable>(lmax);
  return *slot;
}

double coupling(int l, int m) {
  if (l <= std::abs(m)) return 0.0;
  return std::sqrt((static_cast<double>(l) * l - static_cast<double>(m) * m) / ((2.0 * l - 1.0) * (2.0 * l + 1.0)));
}

}  // namespace

SphereTMatrix pec_tmatrix(double radius, double kappa, int lmax) {
  const double x = kappa * radius;
  if (!(x >= 1e-4 && x <= 1e2)) {
    std::ostringstream msg;
    msg << "kappa * R = " << x << " is outside the supported range [1e-4, 1e2]";
    throw ConfigError(msg.str());
  }
  if (lmax < 1) throw ConfigError("T-matrix needs lmax >= 1");
  const auto b = bessel_ik_all(lmax, x);
  SphereTMatrix t;
  t.te.assign(lmax + 1, 0.0);
  t.tm.assign(lmax + 1, 0.0);
  for (int l = 1; l <= lmax; ++l) {
    const double scale = std::exp(b[l].log_scale_i - b[l].log_scale_k);
    t.tm[l] = -b[l].i / b[l].k * scale;
    t.te[l] = -(b[l].i + x * b[l].di) / (b[l].k + x * b[l].dk) * scale;
  }
  return t;
}

Eigen::MatrixXd scalar_translation(int m, double kappa, double d, int lmax, int lmax_source) {
  const double x = kappa * std::abs(d);
  const int am = std::abs(m);
  const int top = std::max(lmax, lmax_source);
  const GauntTable& table = gaunt_table(top);
  std::vector<double> log_i, log_k;
  log_bessel_ik(lmax + lmax_source, x, log_i, log_k);
  std::vector<double> kfac(lmax + lmax_source + 1);
  for (std::size_t lam = 0; lam < kfac.size(); ++lam) {
    const double sign = (d < 0.0 && lam % 2) ? -1.0 : 1.0;
    kfac[lam] = sign * std::exp(log_k[lam]) * std::sqrt((2.0 * lam + 1.0) / (4.0 * std::numbers::pi));
  }
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(lmax + 1, lmax_source + 1);
  for (int l = am; l <= lmax; ++l) {
    for (int L = am; L <= lmax_source; ++L) {
      double sum = 0.0;
      for (int lam = std::abs(L - l); lam <= L + l; lam += 2) sum += kfac[lam] * table(L, am, lam, l);
      alpha(l, L) = (L % 2 ? -1.0 : 1.0) * 4.0 * std::numbers::pi * sum;
    }
  }
  if (!alpha.allFinite()) {
    std::ostringstream msg;
    msg << "scalar translation overflow at kappa d = " << x;
    throw NumericalError(msg.str());
  }
  return alpha;
}

namespace {

// A and beta = Im(B) of the vector translation, rows l' and columns l over
// max(1, |m|)..lmax.
void translation_blocks(int m, double kappa, double d, int lmax, Eigen::MatrixXd& a, Eigen::MatrixXd& beta) {
  const int l0 = std::max(1, std::abs(m));
  const int n = std::max(0, lmax - l0 + 1);
  a.setZero(n, n);
  beta.setZero(n, n);
  if (n == 0) return;
  const Eigen::MatrixXd alpha = scalar_translation(m, kappa, d, lmax, lmax + 1);
  const double kd = kappa * d;
  for (int lp = l0; lp <= lmax; ++lp) {
    const double norm = lp * (lp + 1.0);
    for (int l = l0; l <= lmax; ++l) {
      const double below = l - 1 >= 0 ? alpha(lp, l - 1) : 0.0;
      a(lp - l0, l - l0) = (l * (l + 1.0) * alpha(lp, l) +
                            kd * (l * coupling(l + 1, m) * alpha(lp, l + 1) - (l + 1.0) * coupling(l, m) * below)) /
                           norm;
      beta(lp - l0, l - l0) = -m * kd * alpha(lp, l) / norm;
    }
  }
}

}  // namespace

Eigen::MatrixXcd translation_matrix(int m, double kappa, double d, int lmax) {
  Eigen::MatrixXd a, beta;
  translation_blocks(m, kappa, d, lmax, a, beta);
  const Eigen::Index n = a.rows();
  const std::complex<double> i(0.0, 1.0);
  Eigen::MatrixXcd u(2 * n, 2 * n);
  u << a.cast<std::complex<double>>(), -i * beta.cast<std::complex<double>>(), i * beta.cast<std::complex<double>>(),
      a.cast<std::complex<double>>();
  return u;
}

namespace {

double oracle_log_det(const Sphere& s1, const Sphere& s2, double kappa, int lmax) {
  const double d = (s2.center - s1.center).norm();
  const SphereTMatrix t1 = pec_tmatrix(s1.radius, kappa, lmax);
  const SphereTMatrix t2 = pec_tmatrix(s2.radius, kappa, lmax);
  double total = 0.0;
  for (int m = 0; m <= lmax; ++m) {
    const int l0 = std::max(1, m);
    const int n = lmax - l0 + 1;
    // Scaling the N coefficients by i makes U real, [[A, -beta], [-beta, A]].
    Eigen::MatrixXd a12, b12, a21, b21;
    translation_blocks(m, kappa, d, lmax, a12, b12);
    translation_blocks(m, kappa, -d, lmax, a21, b21);
    Eigen::MatrixXd u12(2 * n, 2 * n), u21(2 * n, 2 * n);
    u12 << a12, -b12, -b12, a12;
    u21 << a21, -b21, -b21, a21;
    // Similarity by |T1|^{-1/2} balances I - T1 U12 T2 U21: the plain
    // product has columns growing like k_{l+l'}(kappa d).
    Eigen::VectorXd r1(2 * n), r2(2 * n), s1v(2 * n), s2v(2 * n);
    for (int l = l0; l <= lmax; ++l) {
      const double v1[2] = {t1.tm[l], t1.te[l]};
      const double v2[2] = {t2.tm[l], t2.te[l]};
      for (int p = 0; p < 2; ++p) {
        const int i = p * n + l - l0;
        r1(i) = std::sqrt(std::abs(v1[p]));
        r2(i) = std::sqrt(std::abs(v2[p]));
        s1v(i) = v1[p] < 0.0 ? -1.0 : 1.0;
        s2v(i) = v2[p] < 0.0 ? -1.0 : 1.0;
      }
    }
    const Eigen::MatrixXd v12 = r1.asDiagonal() * u12 * r2.asDiagonal();
    const Eigen::MatrixXd v21 = r2.asDiagonal() * u21 * r1.asDiagonal();
    const Eigen::MatrixXd k = s1v.asDiagonal() * v12 * s2v.asDiagonal() * v21;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd::Identity(2 * n, 2 * n) - k);
    const Eigen::MatrixXd& f = lu.matrixLU();
    double logdet = 0.0, sign = lu.permutationP().determinant();
    for (int i = 0; i < 2 * n; ++i) {
      logdet += std::log(std::abs(f(i, i)));
      if (f(i, i) < 0.0) sign = -sign;
    }
    if (!(sign > 0.0) || !std::isfinite(logdet)) {
      std::ostringstream msg;
      msg << "multipole determinant is not positive for m = " << m << " at kappa " << kappa;
      throw NumericalError(msg.str());
    }
    total += (m == 0 ? 1.0 : 2.0) * logdet;
  }
  return total;
}

}  // namespace

OracleXi oracle_xi(const std::vector<Sphere>& spheres, double kappa, int lmax) {
  if (!(kappa > 0.0)) throw ConfigError("oracle needs kappa > 0");
  if (lmax < 4) throw ConfigError("oracle needs lmax >= 4");
  OracleXi out;
  out.sample.kappa = kappa;
  if (spheres.size() == 1) return out;
  if (spheres.size() != 2) throw ConfigError("the multipole oracle supports one or two spheres");
  const Sphere& a = spheres[0];
  const Sphere& b = spheres[1];
  if (!(a.radius > 0.0 && b.radius > 0.0)) throw ConfigError("sphere radii must be positive");
  if (!((b.center - a.center).norm() > a.radius + b.radius)) throw ConfigError("spheres overlap");
  out.sample.xi = oracle_log_det(a, b, kappa, lmax);
  out.truncation_estimate = std::abs(out.sample.xi - oracle_log_det(a, b, kappa, lmax - 1));
  out.truncation_warning = out.truncation_estimate > 1e-4 * std::abs(out.sample.xi);
  return out;
}

}  // namespace casimir
