#pragma once

#include <vector>

namespace casimir {

/// Modified spherical Bessel functions
///   i_l(x) = sqrt(pi / 2x) I_{l+1/2}(x),  k_l(x) = sqrt(pi / 2x) K_{l+1/2}(x),
/// so i_0 = sinh(x) / x and k_0 = (pi / 2) exp(-x) / x. Values are stored as
/// mantissa * exp(log_scale); the scale is 0 unless the plain value would
/// leave the double range.
struct BesselIK {
  double i = 0.0, di = 0.0;
  double k = 0.0, dk = 0.0;
  double log_scale_i = 0.0;  // applies to i and di
  double log_scale_k = 0.0;  // applies to k and dk
  bool scaled() const noexcept { return log_scale_i != 0.0 || log_scale_k != 0.0; }
};

constexpr int kMaxBesselOrder = 60;

// Orders 0..lmax at one argument, 1e-6 <= x <= 1e3, lmax <= 60.
std::vector<BesselIK> bessel_ik_all(int lmax, double x);
BesselIK bessel_ik(int l, double x);

// log i_l(x) and log k_l(x) for l = 0..lmax (lmax <= 200); never overflow.
constexpr int kMaxLogBesselOrder = 200;
void log_bessel_ik(int lmax, double x, std::vector<double>& log_i, std::vector<double>& log_k);

}  // namespace casimir
