#include "casimir/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

namespace casimir {

LineRule gauss_legendre(int n) {
  if (n < 1) throw ConfigError("Gauss-Legendre rule needs at least one point");
  // P_n(x) and P_n'(x) by the three-term recurrence.
  auto legendre = [n](double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return std::make_pair(p1, n * (x * p1 - p0) / (x * x - 1.0));
  };
  LineRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

namespace {

// Symmetry orbits of a triangle rule: centroid, (a, a, 1-2a) and (a, b, 1-a-b).
struct Orbit {
  int kind;
  double a, b, w;
};

void expand(const Orbit& o, TriangleRule& rule) {
  auto add = [&](double l0, double l1, double l2) {
    rule.points.push_back({l0, l1, l2});
    rule.weights.push_back(o.w);
  };
  if (o.kind == 0) {
    add(1.0 / 3, 1.0 / 3, 1.0 / 3);
  } else if (o.kind == 1) {
    const double c = 1.0 - 2.0 * o.a;
    add(o.a, o.a, c);
    add(o.a, c, o.a);
    add(c, o.a, o.a);
  } else {
    const double c = 1.0 - o.a - o.b;
    add(o.a, o.b, c);
    add(o.b, o.a, c);
    add(o.a, c, o.b);
    add(o.b, c, o.a);
    add(c, o.a, o.b);
    add(c, o.b, o.a);
  }
}

TriangleRule expand_all(int degree, const std::vector<Orbit>& orbits) {
  TriangleRule rule;
  rule.degree = degree;
  for (const auto& o : orbits) expand(o, rule);
  return rule;
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Normalized moment of l1^i l2^j over the reference triangle.
double exact_moment(int i, int j) { return 2.0 * factorial(i) * factorial(j) / factorial(i + j + 2); }

Eigen::VectorXd moment_residual(int degree, const std::vector<Orbit>& orbits) {
  const TriangleRule rule = expand_all(degree, orbits);
  Eigen::VectorXd r((degree + 1) * (degree + 2) / 2);
  int row = 0;
  for (int i = 0; i <= degree; ++i) {
    for (int j = 0; i + j <= degree; ++j) {
      double s = 0.0;
      for (std::size_t q = 0; q < rule.points.size(); ++q)
        s += rule.weights[q] * std::pow(rule.points[q][1], i) * std::pow(rule.points[q][2], j);
      r(row++) = s - exact_moment(i, j);
    }
  }
  return r;
}

// Gauss-Newton polish of tabulated orbit parameters against the moment
// equations, recovering full double precision from printed digits.
TriangleRule polished(int degree, std::vector<Orbit> orbits) {
  std::vector<double*> params;
  for (auto& o : orbits) {
    if (o.kind >= 1) params.push_back(&o.a);
    if (o.kind == 2) params.push_back(&o.b);
    params.push_back(&o.w);
  }
  for (int it = 0; it < 4; ++it) {
    const Eigen::VectorXd r0 = moment_residual(degree, orbits);
    if (r0.lpNorm<Eigen::Infinity>() < 1e-16) break;
    Eigen::MatrixXd jac(r0.size(), params.size());
    for (std::size_t p = 0; p < params.size(); ++p) {
      const double keep = *params[p];
      const double h = 1e-6;
      *params[p] = keep + h;
      const Eigen::VectorXd rp = moment_residual(degree, orbits);
      *params[p] = keep - h;
      const Eigen::VectorXd rm = moment_residual(degree, orbits);
      *params[p] = keep;
      jac.col(p) = (rp - rm) / (2.0 * h);
    }
    const Eigen::VectorXd step = jac.colPivHouseholderQr().solve(r0);
    for (std::size_t p = 0; p < params.size(); ++p) *params[p] -= step(p);
  }
  return expand_all(degree, orbits);
}

TriangleRule tabulated(int degree) {
  switch (degree) {
    case 1:
      return expand_all(1, {{0, 0, 0, 1.0}});
    case 2:
      return polished(2, {{1, 1.0 / 6.0, 0, 1.0 / 3.0}});
    case 4:
      return polished(4, {{1, 0.445948490915965, 0, 0.223381589678011}, {1, 0.091576213509771, 0, 0.109951743655322}});
    case 5:
      return polished(5, {{0, 0, 0, 0.225},
                          {1, 0.470142064105115, 0, 0.132394152788506},
                          {1, 0.101286507323456, 0, 0.125939180544827}});
    case 6:
      return polished(6, {{1, 0.063089014491502, 0, 0.050844906370207},
                          {1, 0.249286745170910, 0, 0.116786275726379},
                          {2, 0.053145049844817, 0.310352451033784, 0.082851075618374}});
    case 8:
      return polished(8, {{0, 0, 0, 0.144315607677787},
                          {1, 0.459292588292723, 0, 0.095091634267285},
                          {1, 0.170569307751760, 0, 0.103217370534718},
                          {1, 0.050547228317031, 0, 0.032458497623198},
                          {2, 0.008394777409958, 0.263112829634638, 0.027230314174435}});
    default:
      return {};
  }
}

// Collapsed Gauss product rule, averaged over the six vertex permutations.
TriangleRule symmetric_product(int degree) {
  const LineRule gu = gauss_legendre((degree + 3) / 2);
  const LineRule gv = gauss_legendre((degree + 2) / 2);
  TriangleRule rule;
  rule.degree = degree;
  static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (std::size_t i = 0; i < gu.nodes.size(); ++i) {
    for (std::size_t j = 0; j < gv.nodes.size(); ++j) {
      const double u = gu.nodes[i];
      const double l[3] = {1.0 - u - (1.0 - u) * gv.nodes[j], u, (1.0 - u) * gv.nodes[j]};
      const double w = 2.0 * gu.weights[i] * gv.weights[j] * (1.0 - u) / 6.0;
      for (const auto& p : perms) {
        rule.points.push_back({l[p[0]], l[p[1]], l[p[2]]});
        rule.weights.push_back(w);
      }
    }
  }
  return rule;
}

}  // namespace

const TriangleRule& triangle_rule(int degree) {
  if (degree < 1 || degree > kMaxTriangleDegree) {
    throw ConfigError("triangle rule degree must lie in [1, " + std::to_string(kMaxTriangleDegree) + "]");
  }
  static std::mutex mutex;
  static std::map<int, TriangleRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(degree);
  if (it != cache.end()) return it->second;
  int table = 0;
  if (degree <= 2) table = degree;
  else if (degree <= 6) table = degree == 3 ? 4 : degree;
  else if (degree <= 8) table = 8;
  TriangleRule rule = table ? tabulated(table) : symmetric_product(degree);
  return cache.emplace(degree, std::move(rule)).first->second;
}

const char* to_string(PairClass c) noexcept {
  switch (c) {
    case PairClass::coincident: return "coincident";
    case PairClass::edge: return "edge";
    case PairClass::vertex: return "vertex";
    case PairClass::near: return "near";
    case PairClass::far: return "far";
  }
  return "unknown";
}

PairClass classify_pair(const Triangle& src_ids, const std::array<Vec3, 3>& src, const Triangle& trg_ids,
                        const std::array<Vec3, 3>& trg, double near_ratio) {
  int common = 0;
  for (int a : src_ids)
    for (int b : trg_ids) common += a == b;
  if (common >= 3) return PairClass::coincident;
  if (common == 2) return PairClass::edge;
  if (common == 1) return PairClass::vertex;
  auto diameter = [](const std::array<Vec3, 3>& t) {
    return std::max({(t[1] - t[0]).norm(), (t[2] - t[1]).norm(), (t[0] - t[2]).norm()});
  };
  const double dist = ((src[0] + src[1] + src[2]) - (trg[0] + trg[1] + trg[2])).norm() / 3.0;
  return dist < near_ratio * std::max(diameter(src), diameter(trg)) ? PairClass::near : PairClass::far;
}

namespace detail {

PairPermutation common_vertex_permutation(const Triangle& src_ids, const Triangle& trg_ids) {
  PairPermutation p{{0, 0, 0}, {0, 0, 0}};
  int common = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (src_ids[i] == trg_ids[j]) {
        p.src[common] = i;
        p.trg[common] = j;
        ++common;
        break;
      }
    }
  }
  auto fill = [common](std::array<int, 3>& perm) {
    int next = common;
    for (int i = 0; i < 3 && next < 3; ++i) {
      if (std::find(perm.begin(), perm.begin() + next, i) == perm.begin() + next) perm[next++] = i;
    }
  };
  fill(p.src);
  fill(p.trg);
  return p;
}

}  // namespace detail

namespace {

// Reference point on {0 <= y <= x <= 1} to barycentric (a0, a1, a2).
std::array<double, 3> bary(double x, double y) { return {1.0 - x, x - y, y}; }

// After the Duffy maps the radial variable xi carries a low degree
// polynomial times exp(-kappa r), so it needs fewer nodes than the angles.
int radial_order(int order) { return std::max(3, order / 2 + 2); }

PairRule build_singular(PairClass c, int order) {
  const LineRule g = gauss_legendre(order);
  const LineRule gr = gauss_legendre(radial_order(order));
  PairRule rule;
  auto push = [&](double x1, double y1, double x2, double y2, double w) {
    rule.src.push_back(bary(x1, y1));
    rule.trg.push_back(bary(x2, y2));
    rule.weights.push_back(w);
  };
  for (std::size_t a = 0; a < gr.nodes.size(); ++a) {
    const double xi = gr.nodes[a];
    for (int b = 0; b < order; ++b) {
      const double e3 = g.nodes[b];
      for (int d = 0; d < order; ++d) {
        const double e2 = g.nodes[d];
        for (int e = 0; e < order; ++e) {
          const double e1 = g.nodes[e];
          const double wp = gr.weights[a] * g.weights[b] * g.weights[d] * g.weights[e];
          if (c == PairClass::coincident) {
            const double w = wp * xi * xi * xi * e1 * e1 * e2;
            push(xi, xi * (1 - e1 + e1 * e2), xi * (1 - e1 * e2 * e3), xi * (1 - e1), w);
            push(xi * (1 - e1 * e2 * e3), xi * (1 - e1), xi, xi * (1 - e1 + e1 * e2), w);
            push(xi, xi * e1 * (1 - e2 + e2 * e3), xi * (1 - e1 * e2), xi * e1 * (1 - e2), w);
            push(xi * (1 - e1 * e2), xi * e1 * (1 - e2), xi, xi * e1 * (1 - e2 + e2 * e3), w);
            push(xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3), xi, xi * e1 * (1 - e2), w);
            push(xi, xi * e1 * (1 - e2), xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3), w);
          } else if (c == PairClass::edge) {
            const double w = wp * xi * xi * xi * e1 * e1 * e2;
            push(xi, xi * e1 * e3, xi * (1 - e1 * e2), xi * e1 * (1 - e2), wp * xi * xi * xi * e1 * e1);
            push(xi, xi * e1, xi * (1 - e1 * e2 * e3), xi * e1 * e2 * (1 - e3), w);
            push(xi * (1 - e1 * e2), xi * e1 * (1 - e2), xi, xi * e1 * e2 * e3, w);
            push(xi * (1 - e1 * e2 * e3), xi * e1 * e2 * (1 - e3), xi, xi * e1, w);
            push(xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3), xi, xi * e1 * e2, w);
          } else {
            const double w = wp * xi * xi * xi * e2;
            push(xi, xi * e1, xi * e2, xi * e2 * e3, w);
            push(xi * e2, xi * e2 * e3, xi, xi * e1, w);
          }
        }
      }
    }
  }
  // Symmetrize: every node also appears with source and target exchanged.
  const std::size_t n = rule.weights.size();
  for (std::size_t q = 0; q < n; ++q) {
    rule.src.push_back(rule.trg[q]);
    rule.trg.push_back(rule.src[q]);
    rule.weights[q] *= 0.5;
    rule.weights.push_back(rule.weights[q]);
  }
  return rule;
}

}  // namespace

const PairRule& singular_pair_rule(PairClass c, int order) {
  if (c != PairClass::coincident && c != PairClass::edge && c != PairClass::vertex) {
    throw ConfigError("singular pair rule requested for a regular pair class");
  }
  if (order < 1 || order > 20) throw ConfigError("singular quadrature order must lie in [1, 20]");
  static std::mutex mutex;
  static std::map<std::pair<int, int>, PairRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_pair(static_cast<int>(c), order);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  return cache.emplace(key, build_singular(c, order)).first->second;
}

double integrate_pair(const Triangle& src_ids, const std::array<Vec3, 3>& src, const Triangle& trg_ids,
                      const std::array<Vec3, 3>& trg, const std::function<double(const Vec3&, const Vec3&)>& kernel,
                      PairClass cls, const QuadratureConfig& config) {
  double sum = 0.0;
  for_each_pair_node(src_ids, src, trg_ids, trg, cls, config, [&](const Vec3& x, const Vec3& y, double w) {
    const double k = kernel(x, y);
    if (!std::isfinite(k)) {
      std::ostringstream msg;
      msg << "non-finite kernel value at x = (" << x.transpose() << "), y = (" << y.transpose() << ") in "
          << to_string(cls) << " pair";
      throw NumericalError(msg.str());
    }
    sum += w * k;
  });
  return sum;
}

SemiInfiniteRule semi_infinite_rule(double delta, double rel_tol, double kappa_min, const SemiInfiniteOptions& options) {
  if (!(delta > 0.0)) throw ConfigError("semi-infinite rule needs delta > 0");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ConfigError("rel_tol must lie in (0, 1)");
  if (!(kappa_min > 0.0)) throw ConfigError("kappa_min must be positive");
  if (options.panel_order < 1 || !(options.first_panel > 0.0) || !(options.max_panel >= options.first_panel)) {
    throw ConfigError("invalid semi-infinite panel options");
  }
  const double u_max = std::log(1.0 / rel_tol);
  std::vector<double> breaks{0.0};
  double width = options.first_panel;
  while (breaks.back() < u_max) {
    breaks.push_back(std::min(u_max, breaks.back() + width));
    width = std::min(2.0 * width, options.max_panel);
  }
  // Fold a sliver of a final panel into its predecessor.
  if (breaks.size() > 2 && breaks.back() - breaks[breaks.size() - 2] < 0.25 * options.first_panel) {
    breaks.erase(breaks.end() - 2);
  }

  SemiInfiniteRule rule;
  rule.kappa_min = kappa_min;
  rule.kappa_max = kappa_min + u_max / delta;
  rule.delta = delta;
  rule.panel_order = options.panel_order;
  const LineRule g = gauss_legendre(options.panel_order);
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    rule.panel_start.push_back(static_cast<int>(rule.nodes.size()));
    const double a = breaks[p], h = breaks[p + 1] - breaks[p];
    for (int q = 0; q < options.panel_order; ++q) {
      rule.nodes.push_back(kappa_min + (a + h * g.nodes[q]) / delta);
      rule.weights.push_back(h * g.weights[q] / delta);
    }
  }
  rule.panel_start.push_back(static_cast<int>(rule.nodes.size()));
  return rule;
}

}  // namespace casimir
