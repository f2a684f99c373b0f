#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <unistd.h>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "doctest.h"

#include "casimir/assembly.hpp"
#include "casimir/bem_operator.hpp"
#include "casimir/determinant.hpp"
#include "oracles.hpp"

using namespace casimir;

namespace {

Assembly two_spheres(int subdiv, double distance) {
  const SurfaceMesh s = make_icosphere(1.0, subdiv);
  RigidTransform shift;
  shift.translation = Vec3(distance, 0, 0);
  return Assembly({s, transform(s, shift)});
}

double asymmetry(const Eigen::MatrixXd& z) { return (z - z.transpose()).norm() / z.norm(); }

}  // namespace

TEST_CASE("single icosahedron matrix is symmetric positive definite") {
  const EdgeBasis basis(Assembly({make_icosphere(1.0, 0)}));
  const BlockOperator z = assemble(basis, 1.0);
  REQUIRE(z.size() == 30);
  CHECK(asymmetry(z.dense()) < 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(z.block(0, 0));
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
  CHECK_THROWS_AS(assemble(basis, 0.0), ConfigError);
  CHECK_THROWS_AS(assemble(basis, -1.0), ConfigError);
}

TEST_CASE("diagonal blocks factor across the kappa range") {
  const SurfaceMesh torus = make_torus(1.0, 0.4, 12, 8);
  RigidTransform shift;
  shift.translation = Vec3(0, 0, 3);
  const EdgeBasis basis(Assembly({make_icosphere(1.0, 1), transform(torus, shift)}));
  for (double kappa : {1e-2, 3e-2, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0}) {
    const BlockOperator z = assemble(basis, kappa);
    for (int j = 0; j < 2; ++j) {
      Eigen::LLT<Eigen::MatrixXd> llt(z.block(j, j));
      INFO("kappa " << kappa << " block " << j);
      CHECK(llt.info() == Eigen::Success);
    }
  }
}

TEST_CASE("global matrix is positive definite for two spheres") {
  const EdgeBasis basis(two_spheres(1, 3.0));
  for (double kappa : {0.1, 1.0, 10.0}) {
    const BlockOperator z = assemble(basis, kappa);
    CHECK(asymmetry(z.dense()) < 1e-10);
    Eigen::LLT<Eigen::MatrixXd> llt(z.dense());
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("coupling block decays with kappa") {
  const EdgeBasis basis(two_spheres(1, 4.0));
  const double n2 = assemble(basis, 2.0).block(0, 1).norm();
  const double n4 = assemble(basis, 4.0).block(0, 1).norm();
  // The kappa^2 weight of the f.f term grows by (4/2)^2 on top of the
  // exponential factor of the kernel.
  CHECK(n4 / n2 <= 4.0 * std::exp(-2.0 * 1.9));
  // Slope of log(|Z_12| / kappa^2) at large kappa is at most -1.9.
  const double n8 = assemble(basis, 8.0).block(0, 1).norm();
  CHECK(std::log((n8 / 64.0) / (n4 / 16.0)) / 4.0 <= -1.9);
}

TEST_CASE("kappa derivative matches central differences") {
  const EdgeBasis basis(two_spheres(1, 3.0));
  const double kappa = 1.0, h = 1e-4;
  const auto [z, dz] = assemble_with_derivative(basis, kappa);
  const BlockOperator dz_only = assemble_derivative(basis, kappa);
  CHECK((dz.dense() - dz_only.dense()).norm() == 0.0);
  CHECK((z.dense() - assemble(basis, kappa).dense()).norm() == 0.0);
  const Eigen::MatrixXd fd = (assemble(basis, kappa + h).dense() - assemble(basis, kappa - h).dense()) / (2 * h);
  CHECK((fd - dz.dense()).norm() / dz.dense().norm() < 1e-6);
  CHECK(asymmetry(dz.dense()) < 1e-10);
  CHECK(dz.kind() == OperatorKind::kappa_derivative);
}

TEST_CASE("far coupling entries match direct quadrature") {
  // Centres 20 apart: every triangle pair is far, so entries are plain
  // product-rule sums of the kernel against the basis functions.
  const EdgeBasis basis(two_spheres(0, 20.0));
  const double kappa = 0.3;
  const auto [z, dz] = assemble_with_derivative(basis, kappa);
  const TriangleRule& rule = triangle_rule(QuadratureConfig{}.far_degree);
  const double inv4pi = 0.25 / std::numbers::pi;
  double worst_value = 0.0, worst_div = 0.0, scale_value = 0.0, scale_div = 0.0;
  for (int m = 0; m < 30; m += 7) {
    for (int n = 30; n < 60; n += 5) {
      double value = 0.0, deriv = 0.0, divdiv_deriv = 0.0;
      for (int s : basis.function(m).triangle) {
        const auto cs = basis.corners(s);
        for (int t : basis.function(n).triangle) {
          const auto ct = basis.corners(t);
          const double dd = basis.divergence(m, s) * basis.divergence(n, t);
          for (std::size_t i = 0; i < rule.points.size(); ++i) {
            const auto& a = rule.points[i];
            const Vec3 x = a[0] * cs[0] + a[1] * cs[1] + a[2] * cs[2];
            for (std::size_t j = 0; j < rule.points.size(); ++j) {
              const auto& b = rule.points[j];
              const Vec3 y = b[0] * ct[0] + b[1] * ct[1] + b[2] * ct[2];
              const double w = rule.weights[i] * rule.weights[j] * basis.area(s) * basis.area(t);
              const double r = (x - y).norm();
              const double e = inv4pi * std::exp(-kappa * r);
              const double ff = basis.evaluate(m, s, x).dot(basis.evaluate(n, t, y));
              value += w * (kappa * kappa * ff + dd) * e / r;
              deriv += w * ((2 * kappa / r - kappa * kappa) * e * ff - e * dd);
              divdiv_deriv += w * (-e * dd);
            }
          }
        }
      }
      const double zmn = z.block(0, 1)(m, n - 30);
      const double dmn = dz.block(0, 1)(m, n - 30);
      worst_value = std::max(worst_value, std::abs(zmn - value));
      worst_div = std::max(worst_div, std::abs(dmn - deriv));
      scale_value = std::max(scale_value, std::abs(value));
      scale_div = std::max(scale_div, std::abs(divdiv_deriv));
    }
  }
  CHECK(worst_value < 1e-10 * scale_value);
  CHECK(worst_div < 1e-10 * scale_div);
}

TEST_CASE("assembly is deterministic across thread counts") {
  const EdgeBasis basis(two_spheres(1, 3.0));
  AssemblyOptions one, four;
  one.threads = 1;
  four.threads = 4;
  const Eigen::MatrixXd a = assemble(basis, 0.7, one).dense();
  const Eigen::MatrixXd b = assemble(basis, 0.7, four).dense();
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("determinant ratio is invariant under basis rescaling") {
  const EdgeBasis basis(two_spheres(1, 3.0));
  const BlockOperator z = assemble(basis, 0.8);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(0.2, 5.0);
  Eigen::VectorXd c(z.size());
  for (int i = 0; i < c.size(); ++i) c(i) = dist(rng);
  BlockOperator scaled(z.kappa(), z.kind(), z.offsets());
  for (int j = 0; j < 2; ++j) {
    for (int k = j; k < 2; ++k) {
      scaled.block(j, k) = c.segment(z.offset(j), z.block_size(j)).asDiagonal() * z.block(j, k) *
                           c.segment(z.offset(k), z.block_size(k)).asDiagonal();
    }
  }
  const double a = xi(z).xi, b = xi(scaled).xi;
  CHECK(std::abs(a - b) <= 1e-10 * std::abs(a));
}

TEST_CASE("off-surface potential") {
  const EdgeBasis basis(Assembly({make_icosphere(1.0, 2)}));
  const double kappa = 1.0;
  const Vec3 dir = Vec3(0.3, -0.2, 1.0).normalized();

  // Bounded ratio to exp(-kappa d) / d over d in [2, 6].
  double lo = 1e300, hi = 0.0, prev = 1e300;
  for (double d = 2.0; d <= 6.0; d += 0.5) {
    const double norm = potential_row((1.0 + d) * dir, basis, kappa).norm();
    CHECK(norm < prev);
    prev = norm;
    const double q = norm * d * std::exp(kappa * d);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  CHECK(hi / lo < 4.0);

  const Vec3 x = 2.5 * dir;
  const auto p = potential_row(x, basis, kappa);
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  Eigen::VectorXd a(basis.size()), b(basis.size());
  for (int i = 0; i < basis.size(); ++i) {
    a(i) = g(rng);
    b(i) = g(rng);
  }
  const Eigen::Vector3d lhs = p * (a + b), rhs = p * a + p * b;
  CHECK((lhs - rhs).norm() <= 1e-14 * (p * a).norm() * 10);

  // The divergence term survives as kappa -> 0.
  const Eigen::Vector3d v3 = potential_row(x, basis, 1e-3) * a;
  const Eigen::Vector3d v4 = potential_row(x, basis, 1e-4) * a;
  CHECK((v3 - v4).norm() <= 0.01 * v4.norm());

  CHECK_THROWS_AS(potential_row(Vec3(1.01, 0, 0), basis, kappa), ConfigError);
  CHECK(surface_distance(basis, 3.0 * dir) == doctest::Approx(2.0).epsilon(1e-2));
}

TEST_CASE("matrix dump round trip") {
  const EdgeBasis basis(two_spheres(0, 3.0));
  const BlockOperator z = assemble(basis, 0.5);
  char name[] = "/tmp/casimir_dump_XXXXXX";
  const int fd = mkstemp(name);
  REQUIRE(fd >= 0);
  close(fd);
  write_matrix_dump(name, z);
  const BlockOperator back = read_matrix_dump(name);
  std::remove(name);
  CHECK(back.kappa() == z.kappa());
  CHECK(back.offsets() == z.offsets());
  CHECK((back.dense() - z.dense()).norm() == 0.0);
}
