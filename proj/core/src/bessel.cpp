#include "casimir/bessel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "casimir/error.hpp"

namespace casimir {

namespace {

void check_args(int lmax, double x, int limit = kMaxBesselOrder) {
  if (lmax < 0 || lmax > limit) {
    throw ConfigError("Bessel order must lie in [0, " + std::to_string(limit) + "]");
  }
  if (!(x >= 1e-6 && x <= 1e3)) throw ConfigError("Bessel argument must lie in [1e-6, 1e3]");
}

// Ratios r_l = i_l / i_{l-1} for l = 1..lmax+1 by backward recurrence of the
// minimal solution, and s_l = k_l / k_{l-1} by forward recurrence.
void ratios(int lmax, double x, std::vector<double>& r, std::vector<double>& s) {
  const int start = lmax + 40 + static_cast<int>(2.0 * x);
  r.assign(lmax + 2, 0.0);
  double next = 0.0;
  for (int l = start; l >= 1; --l) {
    next = 1.0 / ((2.0 * l + 1.0) / x + next);
    if (l <= lmax + 1) r[l] = next;
  }
  s.assign(lmax + 2, 0.0);
  s[1] = 1.0 + 1.0 / x;
  for (int l = 1; l <= lmax; ++l) s[l + 1] = 1.0 / s[l] + (2.0 * l + 1.0) / x;
}

double log_i0(double x) {
  if (x < 20.0) return std::log(std::sinh(x) / x);
  return x - std::log(2.0 * x) + std::log1p(-std::exp(-2.0 * x));
}

double log_k0(double x) { return std::log(0.5 * std::numbers::pi / x) - x; }

constexpr double kPlainLimit = 650.0;

}  // namespace

void log_bessel_ik(int lmax, double x, std::vector<double>& log_i, std::vector<double>& log_k) {
  check_args(lmax, x, kMaxLogBesselOrder);
  std::vector<double> r, s;
  ratios(lmax, x, r, s);
  log_i.assign(lmax + 1, log_i0(x));
  log_k.assign(lmax + 1, log_k0(x));
  for (int l = 1; l <= lmax; ++l) {
    log_i[l] = log_i[l - 1] + std::log(r[l]);
    log_k[l] = log_k[l - 1] + std::log(s[l]);
  }
}

std::vector<BesselIK> bessel_ik_all(int lmax, double x) {
  check_args(lmax, x);
  std::vector<double> r, s, li, lk;
  ratios(lmax, x, r, s);
  log_bessel_ik(lmax, x, li, lk);
  std::vector<BesselIK> out(lmax + 1);
  for (int l = 0; l <= lmax; ++l) {
    BesselIK& b = out[l];
    // i_l' = i_{l+1} + (l/x) i_l and k_l' = -k_{l+1} + (l/x) k_l.
    const double di_over_i = r[l + 1] + l / x;
    const double dk_over_k = -s[l + 1] + l / x;
    if (std::abs(li[l]) < kPlainLimit) {
      b.i = std::exp(li[l]);
    } else {
      b.i = 1.0;
      b.log_scale_i = li[l];
    }
    if (std::abs(lk[l]) < kPlainLimit) {
      b.k = std::exp(lk[l]);
    } else {
      b.k = 1.0;
      b.log_scale_k = lk[l];
    }
    b.di = b.i * di_over_i;
    b.dk = b.k * dk_over_k;
  }
  return out;
}

BesselIK bessel_ik(int l, double x) {
  check_args(l, x);
  return bessel_ik_all(l, x)[l];
}

}  // namespace casimir
