#pragma once

#include <vector>

#include <Eigen/Core>

#include "casimir/determinant.hpp"
#include "casimir/mesh.hpp"

namespace casimir {

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

/// PEC sphere response at imaginary wavenumber for orders 1..lmax:
/// tm[l] = -i_l / k_l and te[l] = -(x i_l)' / (x k_l)' at x = kappa R
/// (index 0 unused).
struct SphereTMatrix {
  std::vector<double> te;
  std::vector<double> tm;
};
SphereTMatrix pec_tmatrix(double radius, double kappa, int lmax);

/// Coefficients of the scalar addition theorem along z for azimuthal index m:
///   k_L(k|r - D|) Y_Lm(r - D) = sum_l alpha(l, L) i_l(k|r|) Y_lm(r),  |r| < |d|,
/// with D = d z (d signed). Rows l = 0..lmax, columns L = 0..lmax_source.
Eigen::MatrixXd scalar_translation(int m, double kappa, double d, int lmax, int lmax_source);

/// Vector translation along z for azimuthal index m, with waves
/// M = curl(r psi) and N = curl(M) / kappa. Outgoing waves about D = d z
/// expand into regular waves about the origin as
///   M_out,L = sum_l A(l, L) M_reg,l + B(l, L) N_reg,l,
///   N_out,L = sum_l -B(l, L) M_reg,l + A(l, L) N_reg,l,
/// (B purely imaginary). The returned matrix maps outgoing coefficients to
/// regular ones, [[A, -B], [B, A]], with rows and columns ordered
/// (M_l, N_l) for l = max(1, |m|)..lmax.
Eigen::MatrixXcd translation_matrix(int m, double kappa, double d, int lmax);

// Integral of Y_{L m} Y_{lambda 0} conj(Y_{l m}) over the unit sphere.
double gaunt(int L, int m, int lambda, int l);

// Orthonormal associated Legendre function (Condon-Shortley phase), so that
// Y_lm(theta, phi) = legendre_normalized(l, m, cos theta) exp(i m phi).
double legendre_normalized(int l, int m, double mu);

struct OracleXi {
  XiSample sample;
  double truncation_estimate = 0.0;  // |xi(lmax) - xi(lmax - 1)|
  bool truncation_warning = false;   // estimate above 1e-4 |xi|
};

constexpr int kDefaultOracleLmax = 20;

// xi = sum_m log det(I - T1 U12 T2 U21). One sphere gives 0; more than two
// spheres are not supported.
OracleXi oracle_xi(const std::vector<Sphere>& spheres, double kappa, int lmax = kDefaultOracleLmax);

}  // namespace casimir
