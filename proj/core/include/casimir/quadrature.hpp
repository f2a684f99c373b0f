#pragma once

#include <array>
#include <functional>
#include <vector>

#include "casimir/mesh.hpp"

namespace casimir {

// Gauss-Legendre nodes and weights on [0, 1].
struct LineRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
LineRule gauss_legendre(int n);

/// Symmetric rule on a triangle in barycentric coordinates. Weights are
/// positive and sum to 1, so a physical integral is area * sum(w f).
struct TriangleRule {
  int degree = 0;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
};

constexpr int kMaxTriangleDegree = 20;
// Exact for polynomials up to `degree` (1..20). Degrees 1, 2, 4, 5, 6 and 8
// use compact tabulated rules; the rest use a symmetrized collapsed product.
const TriangleRule& triangle_rule(int degree);

enum class PairClass { coincident, edge, vertex, near, far };
const char* to_string(PairClass c) noexcept;

struct QuadratureConfig {
  int singular_order = 8;   // Gauss points per Duffy direction
  int far_degree = 4;
  int near_degree = 8;
  double near_ratio = 2.0;  // near if centroid distance < ratio * max diameter
};

// Vertex ids decide the singular classes; geometry decides near/far.
PairClass classify_pair(const Triangle& src_ids, const std::array<Vec3, 3>& src, const Triangle& trg_ids,
                        const std::array<Vec3, 3>& trg, double near_ratio = 2.0);

// Two-triangle rule on reference coordinates. Point k on the source is
// a0 V0 + a1 V1 + a2 V2 with a = src[k] in the *permuted* vertex order, so
// callers use the permutations to map back to the triangle's own vertices.
struct PairRule {
  std::vector<std::array<double, 3>> src;
  std::vector<std::array<double, 3>> trg;
  std::vector<double> weights;  // sum to 1/4 (product of reference areas)
};

// Sauter-Schwab rules for triangles sharing 3, 2 or 1 vertices (common
// vertices first), symmetrized over the exchange of source and target.
const PairRule& singular_pair_rule(PairClass c, int order);

// Calls visit(x, y, w) for every quadrature node of the pair; sum(w) is
// area(src) * area(trg) up to rule precision.
template <class Visitor>
void for_each_pair_node(const Triangle& src_ids, const std::array<Vec3, 3>& src, const Triangle& trg_ids,
                        const std::array<Vec3, 3>& trg, PairClass cls, const QuadratureConfig& config,
                        Visitor&& visit);

// Double integral of kernel(x, y) over src x trg. Throws NumericalError with
// the node location when the kernel is not finite.
double integrate_pair(const Triangle& src_ids, const std::array<Vec3, 3>& src, const Triangle& trg_ids,
                      const std::array<Vec3, 3>& trg, const std::function<double(const Vec3&, const Vec3&)>& kernel,
                      PairClass cls, const QuadratureConfig& config = {});

/// Positive-weight rule on [kappa_min, kappa_max] for the kappa axis, built
/// from kappa = kappa_min + u / delta with Gauss-Legendre panels in u that
/// are graded geometrically toward u = 0.
struct SemiInfiniteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double kappa_min = 0.0;
  double kappa_max = 0.0;
  double delta = 0.0;
  int panel_order = 0;
  // Node index ranges of the panels, [panel_start[i], panel_start[i+1]).
  std::vector<int> panel_start;
};

struct SemiInfiniteOptions {
  int panel_order = 6;
  double first_panel = 0.0625;  // width in u of the panel touching 0
  double max_panel = 2.0;       // widest panel in u
};
SemiInfiniteRule semi_infinite_rule(double delta, double rel_tol, double kappa_min,
                                    const SemiInfiniteOptions& options = {});

// Implementation details shared with the template below.
namespace detail {
struct PairPermutation {
  std::array<int, 3> src;
  std::array<int, 3> trg;
};
PairPermutation common_vertex_permutation(const Triangle& src_ids, const Triangle& trg_ids);
}  // namespace detail

template <class Visitor>
void for_each_pair_node(const Triangle& src_ids, const std::array<Vec3, 3>& src, const Triangle& trg_ids,
                        const std::array<Vec3, 3>& trg, PairClass cls, const QuadratureConfig& config,
                        Visitor&& visit) {
  const double as = 0.5 * (src[1] - src[0]).cross(src[2] - src[0]).norm();
  const double at = 0.5 * (trg[1] - trg[0]).cross(trg[2] - trg[0]).norm();
  if (cls == PairClass::near || cls == PairClass::far) {
    const TriangleRule& rule = triangle_rule(cls == PairClass::near ? config.near_degree : config.far_degree);
    const std::size_t n = rule.points.size();
    Vec3 ys[64];
    std::vector<Vec3> heap;
    Vec3* y = ys;
    if (n > 64) {
      heap.resize(n);
      y = heap.data();
    }
    for (std::size_t j = 0; j < n; ++j) {
      const auto& b = rule.points[j];
      y[j] = b[0] * trg[0] + b[1] * trg[1] + b[2] * trg[2];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = rule.points[i];
      const Vec3 x = a[0] * src[0] + a[1] * src[1] + a[2] * src[2];
      const double wi = rule.weights[i] * as * at;
      for (std::size_t j = 0; j < n; ++j) visit(x, y[j], wi * rule.weights[j]);
    }
    return;
  }
  const auto perm = detail::common_vertex_permutation(src_ids, trg_ids);
  const Vec3 s0 = src[perm.src[0]], s1 = src[perm.src[1]], s2 = src[perm.src[2]];
  const Vec3 t0 = trg[perm.trg[0]], t1 = trg[perm.trg[1]], t2 = trg[perm.trg[2]];
  const PairRule& rule = singular_pair_rule(cls, config.singular_order);
  const double scale = 4.0 * as * at;
  for (std::size_t q = 0; q < rule.weights.size(); ++q) {
    const auto& a = rule.src[q];
    const auto& b = rule.trg[q];
    visit(Vec3(a[0] * s0 + a[1] * s1 + a[2] * s2), Vec3(b[0] * t0 + b[1] * t1 + b[2] * t2), rule.weights[q] * scale);
  }
}

}  // namespace casimir
