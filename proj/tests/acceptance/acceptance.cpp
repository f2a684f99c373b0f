// Acceptance run: one PASS/FAIL line per criterion, indented detail lines
// underneath. Arguments select criteria by number (default: all).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "casimir/bessel.hpp"
#include "casimir/functional.hpp"
#include "casimir/pair_integration.hpp"
#include "oracles.hpp"

using namespace casimir;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> lines;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    lines.push_back(std::string(ok ? "ok   " : "MISS ") + what);
  }
  void note(const std::string& what) { lines.push_back("     " + what); }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Assembly two_spheres(int subdiv, double distance = 4.0) {
  const SurfaceMesh s = make_icosphere(1.0, subdiv);
  RigidTransform shift;
  shift.translation = Vec3(distance, 0, 0);
  return Assembly({s, transform(s, shift)});
}

const std::vector<Sphere> kUnitPair = {{Vec3::Zero(), 1.0}, {Vec3(4, 0, 0), 1.0}};

// 1. Single body: xi and E vanish exactly.
void single_body(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::pair<std::string, SurfaceMesh>> bodies;
  for (int sd = 0; sd <= 3; ++sd) bodies.emplace_back("sphere subdiv " + std::to_string(sd), make_icosphere(1.0, sd));
  bodies.emplace_back("torus genus 1", make_torus(2.0, 0.5, 24, 12));
  for (const auto& [name, mesh] : bodies) {
    const Assembly a({mesh});
    double worst = 0.0;
    for (double kappa : {0.1, 1.0, 10.0}) worst = std::max(worst, std::abs(bem_xi(a, kappa).xi));
    const double e = casimir_energy(a).energy;
    o.require(worst == 0.0 && e == 0.0, fmt("%s (genus %d): max |xi| = %g, E = %g", name.c_str(), mesh.genus(), worst, e));
  }
  const double t = seconds_since(t0);
  o.require(t < 60.0, fmt("runtime %.1f s < 60 s", t));
}

// 2. BEM against the multipole oracle, plus one refinement step.
void bem_vs_oracle(Outcome& o) {
  const Assembly a3 = two_spheres(3);
  const EdgeBasis b3(a3);
  const double r_eq = std::cbrt(0.75 * a3.body(0).signed_volume() / std::numbers::pi);
  double gap3_half = 0.0;
  for (double kappa : {0.1, 0.5, 1.0, 2.0}) {
    const double x = xi(assemble(b3, kappa)).xi;
    const double ref = oracle_xi(kUnitPair, kappa, 20).sample.xi;
    const double eq = oracle_xi({{Vec3::Zero(), r_eq}, {Vec3(4, 0, 0), r_eq}}, kappa, 20).sample.xi;
    const double gap = rel(x, ref);
    if (kappa == 0.5) gap3_half = gap;
    o.require(gap <= 0.02, fmt("kappa %.1f: xi_bem %.10e  xi_oracle %.10e  gap %.3f%% (<= 2%%)", kappa, x, ref,
                               100 * gap));
    o.note(fmt("  diagnostic: gap to equal-volume sphere (R = %.6f) oracle %.3f%%", r_eq, 100 * rel(x, eq)));
  }
  double x4 = 0.0;
  {
    const EdgeBasis b4(two_spheres(4));
    BlockOperator z = assemble(b4, 0.5);
    x4 = xi_in_place(z).xi;
    o.note(fmt("subdiv 4: %d unknowns", b4.size()));
  }
  const double gap4 = rel(x4, oracle_xi(kUnitPair, 0.5, 20).sample.xi);
  o.require(gap4 < gap3_half, fmt("kappa 0.5: subdiv 4 gap %.3f%% < subdiv 3 gap %.3f%%", 100 * gap4, 100 * gap3_half));
}

// 3. Exponential decay of xi at the rate set by the separation.
void decay_bound(Outcome& o) {
  const Assembly a = two_spheres(3);
  const EdgeBasis basis(a);
  const double delta = min_separation(a);
  std::vector<double> k, y;
  for (double kappa = 2.0; kappa <= 6.0 + 1e-12; kappa += 0.5) {
    const double x = xi(assemble(basis, kappa)).xi;
    k.push_back(kappa);
    y.push_back(std::log(std::abs(x)));
    o.note(fmt("kappa %.1f: xi %.6e", kappa, x));
  }
  const LineFit fit = fit_line(k, y);
  o.require(fit.slope <= -0.9 * delta, fmt("slope %.4f <= -0.9 delta = %.4f (delta %.6f)", fit.slope, -0.9 * delta, delta));
  o.require(fit.r2 >= 0.99, fmt("R^2 %.6f >= 0.99", fit.r2));
}

// 4. Trace identity against the library derivative, and dZ against
// central differences.
void trace_identity(Outcome& o) {
  using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const EdgeBasis basis(two_spheres(2));
  for (double kappa : {0.5, 1.0, 2.0}) {
    const auto [z, dz] = assemble_with_derivative(basis, kappa);
    const MatL zl = z.dense().cast<long double>();
    const MatL dzl = dz.dense().cast<long double>();
    MatL zd_inv = MatL::Zero(zl.rows(), zl.cols());
    for (int j = 0; j < z.num_blocks(); ++j) {
      const int off = z.offset(j), m = z.block_size(j);
      zd_inv.block(off, off, m, m) = zl.block(off, off, m, m).partialPivLu().inverse();
    }
    const MatL diff = zl.partialPivLu().inverse() - zd_inv;
    const long double half = static_cast<long double>(kappa) / 2;
    const long double lhs = ((zl + half * dzl) * diff).trace();
    const double rhs = kappa / 2 * xi_derivative(z, dz);
    o.require(rel(static_cast<double>(lhs), rhs) <= 1e-8,
              fmt("kappa %.1f: trace %.12e  (kappa/2) dxi %.12e  rel %.2e", kappa, static_cast<double>(lhs), rhs,
                  rel(static_cast<double>(lhs), rhs)));

    const double h = 1e-4 * kappa;
    const Eigen::MatrixXd fd = (assemble(basis, kappa + h).dense() - assemble(basis, kappa - h).dense()) / (2 * h);
    const Eigen::MatrixXd dzd = dz.dense();
    const double err = (fd - dzd).cwiseAbs().maxCoeff() / dzd.cwiseAbs().maxCoeff();
    o.require(err <= 1e-6, fmt("kappa %.1f: max |dZ - FD| / max |dZ| = %.2e", kappa, err));
  }
}

// 5. Scaling covariance of xi and E.
void scaling(Outcome& o, EnergyResult& e_out) {
  {
    const Assembly a = two_spheres(3);
    const EdgeBasis b1(a), b2(a.scaled(2.0));
    for (double kappa : {0.5, 1.0}) {
      const double x2 = xi(assemble(b2, kappa)).xi;
      const double x1 = xi(assemble(b1, 2 * kappa)).xi;
      o.require(rel(x2, x1) <= 1e-6, fmt("subdiv 3, kappa %.1f: xi(2A, k) %.12e  xi(A, 2k) %.12e  rel %.2e", kappa, x2,
                                         x1, rel(x2, x1)));
    }
  }
  const Assembly a = two_spheres(2);
  const EnergyResult e1 = casimir_energy(a);
  const EnergyResult e2 = casimir_energy(a.scaled(2.0));
  const double diff = std::abs(e2.energy - 0.5 * e1.energy);
  const double tol = e1.total_error() + e2.total_error();
  o.require(diff <= tol, fmt("subdiv 2: E(2A) %.12e  E(A)/2 %.12e  |diff| %.2e <= errors %.2e", e2.energy,
                             0.5 * e1.energy, diff, tol));
  e_out = e1;
}

// 6. zeta(-1/2) through the zeta weights against 2E through the energy
// weights.
void zeta_energy(Outcome& o, const EnergyResult& bem) {
  const double z = zeta_from_curve(bem.curve, -0.5);
  o.require(rel(z, 2 * bem.energy) <= 1e-8,
            fmt("BEM subdiv 2: zeta %.15e  2E %.15e  rel %.2e", z, 2 * bem.energy, rel(z, 2 * bem.energy)));
  const EnergyResult orc = oracle_energy(kUnitPair);
  const double zo = zeta_from_curve(orc.curve, -0.5);
  o.require(rel(zo, 2 * orc.energy) <= 1e-8,
            fmt("oracle: zeta %.15e  2E %.15e  rel %.2e", zo, 2 * orc.energy, rel(zo, 2 * orc.energy)));
}

// 7. d^-7 law of the oracle energy.
void power_law(Outcome& o) {
  std::vector<double> d, e;
  for (double dist : {8.0, 10.0, 12.0, 14.0, 16.0}) {
    d.push_back(dist);
    e.push_back(oracle_energy({{Vec3::Zero(), 1.0}, {Vec3(0, 0, dist), 1.0}}).energy);
    o.note(fmt("d %4.1f: E %.10e  E d^7 %.6f", dist, e.back(), e.back() * std::pow(dist, 7)));
  }
  const LineFit fit = fit_power_law(d, e);
  o.require(std::abs(fit.slope + 7.0) <= 0.5, fmt("log-log slope %.4f in [-7.5, -6.5]", fit.slope));
}

// 8. Decay of the kernel diagonal along the axis and of the density.
void kernel_decay(Outcome& o) {
  const Assembly a = two_spheres(2);
  const EdgeBasis basis(a);
  const double kappa = 1.0;
  std::vector<double> dist, norm;
  std::vector<Vec3> points;
  for (double t = 2.0; t <= 8.0 + 1e-12; t += 1.0) {
    dist.push_back(t);
    points.push_back(Vec3(5.0 + t, 0, 0));  // beyond the second sphere
  }
  const auto k = relative_kernel_diag(points, basis, kappa);
  for (std::size_t i = 0; i < k.size(); ++i) {
    norm.push_back(k[i].norm());
    o.note(fmt("dist %.0f: |K| %.6e", dist[i], norm.back()));
  }
  // The three-parameter fit trades c against p; pin each at its bound and
  // require the other to clear its own.
  const oracle::DecayFit pinned_rate = oracle::fit_decay_pinned_rate(dist, norm, 0.9 * kappa);
  const oracle::DecayFit pinned_power = oracle::fit_decay_pinned_power(dist, norm, 3.5);
  o.require(pinned_rate.power >= 3.5, fmt("c pinned at 0.9 kappa: p = %.3f >= 3.5 (R^2 %.5f)", pinned_rate.power,
                                          pinned_rate.r2));
  o.require(pinned_power.rate >= 0.9 * kappa, fmt("p pinned at 3.5: c = %.3f >= %.2f (R^2 %.5f)", pinned_power.rate,
                                                   0.9 * kappa, pinned_power.r2));

  std::vector<double> r, rho;
  std::vector<Vec3> far;
  const Vec3 mid(2, 0, 0);
  for (double t = 8.0; t <= 20.0 + 1e-12; t += 2.0) {
    r.push_back(t);
    far.push_back(mid + Vec3(t, 0, 0));
  }
  const auto dens = casimir_density(far, a);
  for (std::size_t i = 0; i < dens.size(); ++i) {
    rho.push_back(dens[i].density);
    o.note(fmt("|x| %.0f: density %.6e (error %.1e)", r[i], dens[i].density, dens[i].error));
  }
  const LineFit fit = fit_power_law(r, rho);
  o.require(-fit.slope >= 4.5, fmt("density exponent q = %.3f >= 4.5 (R^2 %.5f)", -fit.slope, fit.r2));
}

// 9. Quadrature and linear algebra checks.
void unit_suite(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int degree = 1; degree <= kMaxTriangleDegree; ++degree) {
    const TriangleRule& rule = triangle_rule(degree);
    for (int a = 0; a <= degree; ++a) {
      for (int b = 0; a + b <= degree; ++b) {
        double sum = 0.0;
        for (std::size_t i = 0; i < rule.points.size(); ++i) {
          sum += rule.weights[i] * std::pow(rule.points[i][1], a) * std::pow(rule.points[i][2], b);
        }
        worst = std::max(worst, rel(0.5 * sum, oracle::triangle_monomial(a, b)));
      }
    }
  }
  o.require(worst <= 1e-13, fmt("triangle monomials, degrees 1..%d: worst rel %.2e", kMaxTriangleDegree, worst));

  const Vec3 p0(0, 0, 0), e1(1, 0, 0), e2(0, 1, 0), d(1, 1, 0), w(-0.6, -0.3, 0.5), v(-0.2, -0.9, -0.1);
  struct Pair {
    Triangle sid, tid;
    std::array<Vec3, 3> s, t;
    PairClass cls;
  };
  const std::vector<Pair> pairs = {{{0, 1, 2}, {0, 1, 2}, {p0, e1, e2}, {p0, e1, e2}, PairClass::coincident},
                                   {{0, 1, 2}, {1, 3, 2}, {p0, e1, e2}, {e1, d, e2}, PairClass::edge},
                                   {{0, 1, 2}, {0, 4, 5}, {p0, e1, e2}, {p0, w, v}, PairClass::vertex}};
  auto laplace = [](const Vec3& x, const Vec3& y) { return 1.0 / (4.0 * std::numbers::pi * (x - y).norm()); };
  for (const auto& p : pairs) {
    const double ref = oracle::laplace_pair_integral(p.s, p.t, 1);
    const double val = integrate_pair(p.sid, p.s, p.tid, p.t, laplace, p.cls);
    o.require(rel(val, ref) <= 1e-5, fmt("%s pair vs subdivision oracle: rel %.2e", to_string(p.cls), rel(val, ref)));
  }

  const Assembly a = two_spheres(1, 3.0);
  const EdgeBasis basis(a);
  double asym = 0.0;
  bool chol_ok = true;
  for (double kappa : {1e-2, 1e-1, 1.0, 1e1, 1e2}) {
    const BlockOperator z = assemble(basis, kappa);
    const Eigen::MatrixXd m = z.dense();
    for (int j = 0; j < z.num_blocks(); ++j) {
      const Eigen::MatrixXd& blk = z.block(j, j);
      asym = std::max(asym, (blk - blk.transpose()).cwiseAbs().maxCoeff() / blk.cwiseAbs().maxCoeff());
      chol_ok = chol_ok && Eigen::LLT<Eigen::MatrixXd>(blk).info() == Eigen::Success;
    }
    asym = std::max(asym, (m - m.transpose()).cwiseAbs().maxCoeff() / m.cwiseAbs().maxCoeff());
  }
  o.require(asym <= 1e-10, fmt("Z symmetry over kappa 1e-2..1e2: max rel %.2e", asym));
  o.require(chol_ok, "diagonal-block Cholesky succeeds for kappa in {1e-2, 1e-1, 1, 10, 100}");

  double wworst = 0.0;
  for (double x : {1e-3, 0.1, 1.0, 5.0, 20.0, 100.0}) {
    const auto all = bessel_ik_all(30, x);
    for (const auto& b : all) {
      const double wr = (b.i * b.dk - b.di * b.k) * std::exp(b.log_scale_i + b.log_scale_k);
      wworst = std::max(wworst, rel(wr, -0.5 * std::numbers::pi / (x * x)));
    }
  }
  o.require(wworst <= 1e-12, fmt("Bessel Wronskian, l <= 30, x in [1e-3, 100]: worst rel %.2e", wworst));

  double sworst = 0.0;
  for (double kappa : {0.1, 0.5, 2.0}) {
    const BlockOperator z = assemble(basis, kappa);
    sworst = std::max(sworst, rel(two_body_schur_xi(z).xi, xi(z).xi));
  }
  o.require(sworst <= 1e-10, fmt("Schur vs full xi: worst rel %.2e", sworst));
  const double t = seconds_since(t0);
  o.require(t < 300.0, fmt("runtime %.1f s < 300 s", t));
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  EnergyResult shared;
  bool have_shared = false;
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"single-body nullity", single_body},
      {"BEM vs multipole equivalence", bem_vs_oracle},
      {"decay bound", decay_bound},
      {"discrete trace identity", trace_identity},
      {"scaling covariance",
       [&](Outcome& o) {
         scaling(o, shared);
         have_shared = true;
       }},
      {"zeta/energy consistency",
       [&](Outcome& o) {
         if (!have_shared) shared = casimir_energy(two_spheres(2));
         zeta_energy(o, shared);
       }},
      {"large-separation power law", power_law},
      {"kernel-diagonal decay", kernel_decay},
      {"quadrature/linear-algebra unit suite", unit_suite},
  };
  int failed = 0, run = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    ++run;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.lines.push_back(std::string("exception: ") + e.what());
    }
    std::printf("criterion %d %s  %s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                seconds_since(t0));
    for (const auto& line : o.lines) std::printf("    %s\n", line.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%d criteria passed\n", run - failed, run);
  return failed == 0 ? 0 : 1;
}
