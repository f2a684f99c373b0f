#include "casimir/functional.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>
#include <Eigen/Dense>

#include "casimir/parallel.hpp"

namespace casimir {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void fit_models(XiCurve& curve) {
  const auto& s = curve.samples;
  const std::size_t n = s.size();
  curve.head = {0.0, 0.0, 0.0};
  if (n >= 3) {
    Eigen::Matrix3d v;
    Eigen::Vector3d y;
    for (int i = 0; i < 3; ++i) {
      v(i, 0) = 1.0;
      v(i, 1) = s[i].kappa;
      v(i, 2) = s[i].kappa * s[i].kappa;
      y(i) = s[i].xi;
    }
    const Eigen::Vector3d c = v.fullPivLu().solve(y);
    curve.head = {c(0), c(1), c(2)};
  }

  curve.tail_fitted = false;
  curve.tail_constant = curve.tail_rate = curve.tail_sign = 0.0;
  if (n < 5) return;
  const double sign = s[n - 1].xi > 0.0 ? 1.0 : -1.0;
  std::vector<double> x, ly;
  for (std::size_t i = n - 5; i < n; ++i) {
    if (!(s[i].xi * sign > 0.0) || !std::isfinite(s[i].xi)) return;
    x.push_back(s[i].kappa);
    ly.push_back(std::log(std::abs(s[i].xi)));
  }
  const LineFit f = fit_line(x, ly);
  if (!(f.slope < 0.0)) return;
  curve.tail_rate = -f.slope;
  curve.tail_constant = std::exp(f.intercept);
  curve.tail_sign = sign;
  curve.tail_fitted = true;
}

double legendre_p(int n, double t) {
  double p0 = 1.0, p1 = t;
  if (n == 0) return 1.0;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

// Size of the highest Legendre mode of each panel's interpolant, times the
// panel width; a proxy for the unresolved part of the integrand.
double quadrature_error(const XiCurve& curve) {
  const SemiInfiniteRule& r = curve.rule;
  const int p = r.panel_order;
  if (p < 2) return 0.0;
  const LineRule g = gauss_legendre(p);
  double err = 0.0;
  for (std::size_t k = 0; k + 1 < r.panel_start.size(); ++k) {
    const int b = r.panel_start[k];
    double coeff = 0.0;
    double width = 0.0;
    for (int q = 0; q < p; ++q) {
      coeff += 2.0 * g.weights[q] * curve.samples[b + q].xi * legendre_p(p - 1, 2.0 * g.nodes[q] - 1.0);
      width += r.weights[b + q];
    }
    err += width * std::abs(0.5 * (2.0 * p - 1.0) * coeff);
  }
  return err;
}

void check_separated(double delta) {
  if (!(delta > 0.0)) throw ConfigError("bodies overlap or touch (minimum separation is 0)");
}

int inner_threads(const SolverConfig& config, int samples) {
  const int outer = std::min(samples, config.threads > 0 ? config.threads : default_threads());
  return outer > 1 ? 1 : config.assembly.threads;
}

void check_exterior(const std::vector<Vec3>& points, const Assembly& assembly) {
  for (const auto& x : points) {
    for (int j = 0; j < assembly.size(); ++j) {
      if (std::abs(winding_number(assembly.body(j), x)) > 0.5) {
        std::ostringstream msg;
        msg << "point (" << x.transpose() << ") lies inside body " << j + 1;
        throw ConfigError(msg.str());
      }
    }
  }
}

}  // namespace

XiCurve sample_curve(const std::function<XiSample(double)>& xi_of_kappa, const SemiInfiniteRule& rule, int threads) {
  XiCurve curve;
  curve.rule = rule;
  curve.samples.resize(rule.nodes.size());
  parallel_for(
      static_cast<int>(rule.nodes.size()), [&](int i) { curve.samples[i] = xi_of_kappa(rule.nodes[i]); }, threads);
  fit_models(curve);
  return curve;
}

EnergyResult energy_from_curve(const XiCurve& curve) {
  EnergyResult e;
  const SemiInfiniteRule& r = curve.rule;
  e.nodes = static_cast<int>(r.nodes.size());
  double quad = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) quad += r.weights[i] * curve.samples[i].xi;
  const double km = r.kappa_min;
  const auto& c = curve.head;
  const double head = c[0] * km + c[1] * km * km / 2.0 + c[2] * km * km * km / 3.0;
  double head_linear = head;
  if (curve.samples.size() >= 2) {
    const auto& s0 = curve.samples[0];
    const auto& s1 = curve.samples[1];
    const double slope = (s1.xi - s0.xi) / (s1.kappa - s0.kappa);
    const double at0 = s0.xi - slope * s0.kappa;
    head_linear = at0 * km + slope * km * km / 2.0;
  }
  const double tail =
      curve.tail_fitted ? curve.tail_sign * curve.tail_constant / curve.tail_rate * std::exp(-curve.tail_rate * r.kappa_max)
                        : 0.0;
  e.quadrature = quad / kTwoPi;
  e.head = head / kTwoPi;
  e.tail = tail / kTwoPi;
  e.energy = (quad + head + tail) / kTwoPi;
  e.quad_error = quadrature_error(curve) / kTwoPi;
  e.head_error = std::abs(head - head_linear) / kTwoPi;
  e.tail_error = std::abs(tail) / kTwoPi;
  e.curve = curve;
  return e;
}

double zeta_from_curve(const XiCurve& curve, double s) {
  if (!(s > -3.0 && s < 0.0)) {
    std::ostringstream msg;
    msg << "relative zeta is only available for -3 < s < 0, got s = " << s;
    throw ConfigError(msg.str());
  }
  const SemiInfiniteRule& r = curve.rule;
  double quad = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
    quad += r.weights[i] * std::pow(r.nodes[i], -2.0 * s - 1.0) * curve.samples[i].xi;
  double head = 0.0;
  for (int j = 0; j < 3; ++j) head += curve.head[j] * std::pow(r.kappa_min, j - 2.0 * s) / (j - 2.0 * s);
  double tail = 0.0;
  if (curve.tail_fitted) {
    const double b = curve.tail_rate;
    tail = curve.tail_sign * curve.tail_constant * std::pow(b, 2.0 * s) *
           boost::math::tgamma(-2.0 * s, b * r.kappa_max);
  }
  const double total = quad + head + tail;
  if (!std::isfinite(total)) throw NumericalError("relative zeta integral is not finite");
  return 2.0 * s / std::numbers::pi * std::sin(std::numbers::pi * s) * total;
}

SemiInfiniteRule energy_rule(double delta, const SolverConfig& config) {
  check_separated(delta);
  const double kappa_min = config.kappa_min > 0.0 ? config.kappa_min : 1e-2 / delta;
  return semi_infinite_rule(delta, config.rel_tol, kappa_min, config.panels);
}

XiSample bem_xi(const Assembly& assembly, double kappa, const AssemblyOptions& options) {
  const EdgeBasis basis(assembly);
  return xi(assemble(basis, kappa, options));
}

XiCurve bem_xi_curve(const Assembly& assembly, const SolverConfig& config,
                     const std::optional<SemiInfiniteRule>& rule) {
  if (assembly.size() < 2) throw ConfigError("a kappa curve needs at least two bodies");
  const SemiInfiniteRule r = rule ? *rule : energy_rule(min_separation(assembly), config);
  const EdgeBasis basis(assembly);
  AssemblyOptions options = config.assembly;
  options.threads = inner_threads(config, static_cast<int>(r.nodes.size()));
  return sample_curve([&](double kappa) { return xi(assemble(basis, kappa, options)); }, r, config.threads);
}

namespace {

void doubling_check(const EnergyResult& coarse, const std::function<EnergyResult(const SemiInfiniteRule&)>& run,
                    const SemiInfiniteRule& rule, const SolverConfig& config) {
  if (!config.doubling_check) return;
  SemiInfiniteOptions fine = config.panels;
  fine.panel_order *= 2;
  const SemiInfiniteRule r2 = semi_infinite_rule(rule.delta, config.rel_tol, rule.kappa_min, fine);
  const EnergyResult e2 = run(r2);
  const double change = std::abs(e2.energy - coarse.energy);
  if (change > config.doubling_tolerance * std::abs(e2.energy)) {
    std::ostringstream msg;
    msg << "energy changed by " << change << " (relative " << change / std::abs(e2.energy)
        << ") when the kappa rule was doubled";
    throw ConvergenceError(msg.str());
  }
}

}  // namespace

EnergyResult casimir_energy(const Assembly& assembly, const SolverConfig& config,
                            const std::optional<SemiInfiniteRule>& rule) {
  if (assembly.size() == 1) return EnergyResult{};
  const SemiInfiniteRule r = rule ? *rule : energy_rule(min_separation(assembly), config);
  auto run = [&](const SemiInfiniteRule& rr) { return energy_from_curve(bem_xi_curve(assembly, config, rr)); };
  EnergyResult e = run(r);
  doubling_check(e, run, r, config);
  return e;
}

double relative_zeta(const Assembly& assembly, double s, const SolverConfig& config) {
  if (!(s > -3.0 && s < 0.0)) {
    std::ostringstream msg;
    msg << "relative zeta is only available for -3 < s < 0, got s = " << s;
    throw ConfigError(msg.str());
  }
  if (assembly.size() == 1) return 0.0;
  return zeta_from_curve(bem_xi_curve(assembly, config), s);
}

EnergyResult oracle_energy(const std::vector<Sphere>& spheres, const SolverConfig& config,
                           const std::optional<SemiInfiniteRule>& rule) {
  if (spheres.size() == 1) return EnergyResult{};
  if (spheres.size() != 2) throw ConfigError("the multipole oracle supports one or two spheres");
  const double delta = (spheres[1].center - spheres[0].center).norm() - spheres[0].radius - spheres[1].radius;
  check_separated(delta);
  const SemiInfiniteRule r = rule ? *rule : energy_rule(delta, config);
  auto run = [&](const SemiInfiniteRule& rr) {
    return energy_from_curve(sample_curve(
        [&](double kappa) { return oracle_xi(spheres, kappa, config.lmax_oracle).sample; }, rr, config.threads));
  };
  EnergyResult e = run(r);
  doubling_check(e, run, r, config);
  return e;
}

ForceResult central_difference_force(const std::function<EnergyResult(double)>& energy, double h) {
  if (!(h > 0.0)) throw ConfigError("force step h must be positive");
  ForceResult f;
  f.h = h;
  f.force = -(energy(h).energy - energy(-h).energy) / (2.0 * h);
  f.force_half = -(energy(0.5 * h).energy - energy(-0.5 * h).energy) / h;
  f.richardson = (4.0 * f.force_half - f.force) / 3.0;
  f.error = std::abs(f.force_half - f.force) / 3.0;
  return f;
}

ForceResult casimir_force(const Assembly& assembly, int body, const Vec3& axis, double h, const SolverConfig& config) {
  if (assembly.size() < 2) throw ConfigError("force needs at least two bodies");
  if (body < 0 || body >= assembly.size()) throw ConfigError("force body index out of range");
  if (!(axis.norm() > 0.0)) throw ConfigError("force axis must be nonzero");
  const Vec3 dir = axis.normalized();
  const SemiInfiniteRule rule = energy_rule(min_separation(assembly), config);
  return central_difference_force(
      [&](double t) {
        RigidTransform xf;
        xf.translation = t * dir;
        const Assembly moved = assembly.with_body_transformed(body, xf);
        if (!(min_separation(moved) > 0.0)) {
          std::ostringstream msg;
          msg << "displacing body " << body + 1 << " by " << t << " makes the bodies overlap";
          throw ConfigError(msg.str());
        }
        return casimir_energy(moved, config, rule);
      },
      h);
}

std::vector<Eigen::Matrix3d> relative_kernel_diag(const std::vector<Vec3>& points, const EdgeBasis& basis,
                                                  double kappa, const AssemblyOptions& options) {
  std::vector<Eigen::Matrix3d> out(points.size(), Eigen::Matrix3d::Zero());
  const BlockOperator z = assemble(basis, kappa, options);
  if (basis.num_bodies() == 1) {
    for (const auto& x : points) (void)potential_row(x, basis, kappa, options.quadrature);
    return out;
  }
  const WhitenedSystem ws(z);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::MatrixXd p = ws.whiten_columns(potential_row(points[i], basis, kappa, options.quadrature));
    Eigen::Matrix3d k = -(p * ws.relative_inverse() * p.transpose());
    out[i] = 0.5 * (k + k.transpose());
  }
  return out;
}

Eigen::Matrix3d relative_kernel_diag(const Vec3& x, const Assembly& assembly, double kappa,
                                     const AssemblyOptions& options) {
  check_exterior({x}, assembly);
  return relative_kernel_diag(std::vector<Vec3>{x}, EdgeBasis(assembly), kappa, options).front();
}

std::vector<DensityResult> casimir_density(const std::vector<Vec3>& points, const Assembly& assembly,
                                           const SolverConfig& config) {
  check_exterior(points, assembly);
  std::vector<DensityResult> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i].point = points[i];
  const EdgeBasis basis(assembly);
  if (assembly.size() == 1) {
    double h = 0.0;
    for (const auto& f : basis.functions()) h = std::max(h, f.length);
    for (const auto& x : points) {
      if (!(surface_distance(basis, x) >= h)) throw ConfigError("density point lies within the mesh-size band");
    }
    return out;
  }
  const SemiInfiniteRule rule = energy_rule(min_separation(assembly), config);
  const int nk = static_cast<int>(rule.nodes.size());
  AssemblyOptions options = config.assembly;
  options.threads = inner_threads(config, nk);
  std::vector<std::vector<double>> traces(nk);
  parallel_for(
      nk,
      [&](int k) {
        const auto kernels = relative_kernel_diag(points, basis, rule.nodes[k], options);
        for (const auto& m : kernels) traces[k].push_back(m.trace());
      },
      config.threads);
  for (std::size_t i = 0; i < points.size(); ++i) {
    XiCurve curve;
    curve.rule = rule;
    curve.samples.resize(nk);
    for (int k = 0; k < nk; ++k) {
      curve.samples[k].kappa = rule.nodes[k];
      curve.samples[k].xi = traces[k][i];
    }
    fit_models(curve);
    const EnergyResult e = energy_from_curve(curve);
    out[i].density = e.energy;
    out[i].quadrature = e.quadrature;
    out[i].head = e.head;
    out[i].tail = e.tail;
    out[i].error = e.total_error();
  }
  return out;
}

DensityResult casimir_density(const Vec3& point, const Assembly& assembly, const SolverConfig& config) {
  return casimir_density(std::vector<Vec3>{point}, assembly, config).front();
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("line fit needs at least two matching points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

LineFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(std::abs(y[i])));
  }
  return fit_line(lx, ly);
}

}  // namespace casimir
