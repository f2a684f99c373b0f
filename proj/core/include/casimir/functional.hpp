#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "casimir/assembly.hpp"
#include "casimir/bem_operator.hpp"
#include "casimir/determinant.hpp"
#include "casimir/spectral_oracle.hpp"

namespace casimir {

struct SolverConfig {
  double kappa_min = 0.0;  // 0 selects 1e-2 / delta
  double rel_tol = 1e-6;
  SemiInfiniteOptions panels;
  AssemblyOptions assembly;
  int lmax_oracle = kDefaultOracleLmax;
  int threads = 0;                     // concurrent kappa samples; 0: default
  bool doubling_check = false;         // re-run with doubled panel order
  double doubling_tolerance = 1e-3;    // relative change allowed by the check
};

/// Xi(i kappa) on the nodes of a semi-infinite rule plus the head and tail
/// models used to close the integral.
struct XiCurve {
  SemiInfiniteRule rule;
  std::vector<XiSample> samples;
  // Xi ~ c0 + c1 k + c2 k^2 below kappa_min (three smallest nodes).
  std::array<double, 3> head{0.0, 0.0, 0.0};
  // |Xi| ~ C exp(-rate k) beyond kappa_max (last five nodes); sign of Xi.
  double tail_constant = 0.0;
  double tail_rate = 0.0;
  double tail_sign = 0.0;
  bool tail_fitted = false;
};

// Samples xi_of_kappa on the rule nodes (concurrently, results in node
// order) and fits the head and tail models.
XiCurve sample_curve(const std::function<XiSample(double)>& xi_of_kappa, const SemiInfiniteRule& rule,
                     int threads = 0);

struct EnergyResult {
  double energy = 0.0;
  double quadrature = 0.0;  // (1/2pi) * rule sum
  double head = 0.0;        // (1/2pi) * int_0^kappa_min of the head model
  double tail = 0.0;        // (1/2pi) * int_kappa_max^inf of the tail model
  double quad_error = 0.0;
  double head_error = 0.0;
  double tail_error = 0.0;
  int nodes = 0;
  XiCurve curve;
  double total_error() const { return quad_error + head_error + tail_error; }
};

// E = (1/2pi) int_0^inf Xi dk from a sampled curve.
EnergyResult energy_from_curve(const XiCurve& curve);
// zeta(s) = (2s/pi) sin(pi s) int_0^inf k^(-2s-1) Xi dk, for -3 < s < 0.
double zeta_from_curve(const XiCurve& curve, double s);

// The rule used for an assembly: delta from min_separation, kappa_min
// from the config (or 1e-2 / delta).
SemiInfiniteRule energy_rule(double delta, const SolverConfig& config);

XiSample bem_xi(const Assembly& assembly, double kappa, const AssemblyOptions& options = {});
XiCurve bem_xi_curve(const Assembly& assembly, const SolverConfig& config,
                     const std::optional<SemiInfiniteRule>& rule = std::nullopt);

EnergyResult casimir_energy(const Assembly& assembly, const SolverConfig& config = {},
                            const std::optional<SemiInfiniteRule>& rule = std::nullopt);
double relative_zeta(const Assembly& assembly, double s, const SolverConfig& config = {});

EnergyResult oracle_energy(const std::vector<Sphere>& spheres, const SolverConfig& config = {},
                           const std::optional<SemiInfiniteRule>& rule = std::nullopt);

struct ForceResult {
  double force = 0.0;        // -(E(+h) - E(-h)) / 2h
  double force_half = 0.0;   // same with h / 2
  double richardson = 0.0;   // (4 F(h/2) - F(h)) / 3
  double error = 0.0;        // |F(h/2) - F(h)| / 3 plus energy error share
  double h = 0.0;
};

// Central difference of energy(displacement) along a rigid motion.
ForceResult central_difference_force(const std::function<EnergyResult(double)>& energy, double h);

// Force on body `body` (0-based) along `axis`, moving it rigidly by +-h.
// The kappa rule is fixed from the undisplaced assembly.
ForceResult casimir_force(const Assembly& assembly, int body, const Vec3& axis, double h,
                          const SolverConfig& config = {});

/// -P(x) (Z^{-1} - Z_D^{-1}) P(x)^T at one kappa.
Eigen::Matrix3d relative_kernel_diag(const Vec3& x, const Assembly& assembly, double kappa,
                                     const AssemblyOptions& options = {});
// Same for many points sharing one factorization.
std::vector<Eigen::Matrix3d> relative_kernel_diag(const std::vector<Vec3>& points, const EdgeBasis& basis,
                                                  double kappa, const AssemblyOptions& options = {});

struct DensityResult {
  Vec3 point = Vec3::Zero();
  double density = 0.0;  // (1/2pi) int tr K(x, x; k) dk
  double quadrature = 0.0, head = 0.0, tail = 0.0;
  double error = 0.0;
};

std::vector<DensityResult> casimir_density(const std::vector<Vec3>& points, const Assembly& assembly,
                                           const SolverConfig& config = {});
DensityResult casimir_density(const Vec3& point, const Assembly& assembly, const SolverConfig& config = {});

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
// Least-squares line through (x, y).
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
// Exponent q of |y| ~ C x^(-q), from a log-log fit (returned slope is -q).
LineFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace casimir
