#include "casimir/pair_integration.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace casimir {

namespace {

// Kernel moments about the two centroids: S0 = int G, Sx = int x' G,
// Sy = int y' G, Sxy = int x'.y' G.
struct Moments {
  double s0 = 0.0;
  Vec3 sx = Vec3::Zero();
  Vec3 sy = Vec3::Zero();
  double sxy = 0.0;

  void add(const Vec3& x, const Vec3& y, double g) {
    s0 += g;
    sx += g * x;
    sy += g * y;
    sxy += g * x.dot(y);
  }
  // int (x' - p) . (y' - q) G
  double ff(const Vec3& p, const Vec3& q) const { return sxy - q.dot(sx) - p.dot(sy) + p.dot(q) * s0; }
};

}  // namespace

PairBlock galerkin_pair(const EdgeBasis& basis, int s, int t, double kappa, const QuadratureConfig& config,
                        bool with_derivative) {
  const auto src = basis.corners(s);
  const auto trg = basis.corners(t);
  const Triangle& sid = basis.triangles()[s];
  const Triangle& tid = basis.triangles()[t];
  const Vec3 cs = (src[0] + src[1] + src[2]) / 3.0;
  const Vec3 ct = (trg[0] + trg[1] + trg[2]) / 3.0;

  PairBlock out;
  out.cls = classify_pair(sid, src, tid, trg, config.near_ratio);

  constexpr double inv4pi = 0.25 / std::numbers::pi;
  Moments g, e;
  bool finite = true;
  for_each_pair_node(sid, src, tid, trg, out.cls, config, [&](const Vec3& x, const Vec3& y, double w) {
    const Vec3 xr = x - cs;
    const Vec3 yr = y - ct;
    const double r = (x - y).norm();
    const double ew = w * inv4pi * std::exp(-kappa * r);
    const double gw = ew / r;
    finite = finite && std::isfinite(gw);
    g.add(xr, yr, gw);
    if (with_derivative) e.add(xr, yr, ew);
  });
  if (!finite) {
    std::ostringstream msg;
    msg << "non-finite kernel in " << to_string(out.cls) << " pair (" << s << ", " << t << ") at kappa " << kappa;
    throw NumericalError(msg.str());
  }

  const double k2 = kappa * kappa;
  const TriangleSupport& ss = basis.support(s);
  const TriangleSupport& ts = basis.support(t);
  const double as = basis.area(s), at = basis.area(t);
  for (int a = 0; a < 3; ++a) {
    const EdgeFunction& fa = basis.function(ss.function[a]);
    const double ca = ss.sign[a] * fa.length / (2.0 * as);
    const double da = ss.sign[a] * fa.length / as;
    const Vec3 pa = src[a] - cs;
    for (int b = 0; b < 3; ++b) {
      const EdgeFunction& fb = basis.function(ts.function[b]);
      const double cb = ts.sign[b] * fb.length / (2.0 * at);
      const double db = ts.sign[b] * fb.length / at;
      const Vec3 pb = trg[b] - ct;
      const double gff = g.ff(pa, pb);
      out.value(a, b) = k2 * ca * cb * gff + da * db * g.s0;
      if (with_derivative) {
        // d/dk [k^2 G] = 2k G - k^2 r G and d/dk G = -r G, with r G = E.
        out.derivative(a, b) = ca * cb * (2.0 * kappa * gff - k2 * e.ff(pa, pb)) - da * db * e.s0;
      }
    }
  }
  return out;
}

}  // namespace casimir
