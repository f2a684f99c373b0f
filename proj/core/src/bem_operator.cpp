#include "casimir/bem_operator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "casimir/pair_integration.hpp"
#include "casimir/parallel.hpp"
#include "json.hpp"

namespace casimir {

BlockOperator::BlockOperator(double kappa, OperatorKind kind, std::vector<int> offsets)
    : kappa_(kappa), kind_(kind), offsets_(std::move(offsets)) {
  if (offsets_.size() < 2 || offsets_.front() != 0) throw ConfigError("block offsets must start at 0");
  const int nb = num_blocks();
  for (int j = 0; j < nb; ++j) {
    for (int k = j; k < nb; ++k) blocks_.emplace_back(Eigen::MatrixXd::Zero(block_size(j), block_size(k)));
  }
}

int BlockOperator::index(int j, int k) const {
  const int nb = num_blocks();
  if (j < 0 || k < j || k >= nb) throw ConfigError("stored blocks require 0 <= j <= k < N");
  return j * nb - j * (j - 1) / 2 + (k - j);
}

const Eigen::MatrixXd& BlockOperator::block(int j, int k) const { return blocks_[index(j, k)]; }
Eigen::MatrixXd& BlockOperator::block(int j, int k) { return blocks_[index(j, k)]; }

Eigen::MatrixXd BlockOperator::block_copy(int j, int k) const {
  return j <= k ? block(j, k) : Eigen::MatrixXd(block(k, j).transpose());
}

Eigen::MatrixXd BlockOperator::dense() const {
  Eigen::MatrixXd z(size(), size());
  for (int j = 0; j < num_blocks(); ++j) {
    for (int k = j; k < num_blocks(); ++k) {
      z.block(offset(j), offset(k), block_size(j), block_size(k)) = block(j, k);
      if (k != j) z.block(offset(k), offset(j), block_size(k), block_size(j)) = block(j, k).transpose();
    }
  }
  return z;
}

Eigen::MatrixXd BlockOperator::dense_diagonal() const {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(size(), size());
  for (int j = 0; j < num_blocks(); ++j) z.block(offset(j), offset(j), block_size(j), block_size(j)) = block(j, j);
  return z;
}

namespace {

// Greedy coloring of the triangles of one body so that triangles sharing an
// edge get different colors. Returns triangle lists per color.
std::vector<std::vector<int>> color_triangles(const EdgeBasis& basis, int body) {
  const int t0 = basis.triangle_offset(body);
  const int t1 = basis.triangle_offset(body + 1);
  std::vector<int> color(t1 - t0, -1);
  std::vector<std::vector<int>> groups;
  for (int t = t0; t < t1; ++t) {
    unsigned used = 0;
    for (int m : basis.support(t).function) {
      for (int u : basis.function(m).triangle) {
        if (u != t && color[u - t0] >= 0) used |= 1u << color[u - t0];
      }
    }
    const int c = std::countr_one(used);
    color[t - t0] = c;
    if (c >= static_cast<int>(groups.size())) groups.resize(c + 1);
    groups[c].push_back(t);
  }
  return groups;
}

void check_kappa(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    std::ostringstream msg;
    msg << "wavenumber kappa must be positive and finite, got " << kappa;
    throw ConfigError(msg.str());
  }
}

// Fills block (j, k) of z (and dz). Each task owns one source triangle s of
// body j and writes only the rows of the functions on s; tasks of one color
// never share such a row, and the colors run in a fixed order, so the sum
// into every entry has a fixed order regardless of thread count.
void assemble_block(const EdgeBasis& basis, int j, int k, double kappa, const AssemblyOptions& options,
                    const std::vector<std::vector<int>>& colors, Eigen::MatrixXd& z, Eigen::MatrixXd* dz) {
  const int oj = basis.offset(j), ok = basis.offset(k);
  const int u0 = basis.triangle_offset(k), u1 = basis.triangle_offset(k + 1);
  for (const auto& group : colors) {
    parallel_for(
        static_cast<int>(group.size()),
        [&](int i) {
          const int s = group[i];
          const TriangleSupport& ss = basis.support(s);
          for (int t = (j == k ? s : u0); t < u1; ++t) {
            PairBlock pb = galerkin_pair(basis, s, t, kappa, options.quadrature, dz != nullptr);
            if (t == s) {
              pb.value *= 0.5;
              pb.derivative *= 0.5;
            }
            const TriangleSupport& ts = basis.support(t);
            for (int a = 0; a < 3; ++a) {
              const int m = ss.function[a] - oj;
              for (int b = 0; b < 3; ++b) {
                const int n = ts.function[b] - ok;
                z(m, n) += pb.value(a, b);
                if (dz) (*dz)(m, n) += pb.derivative(a, b);
              }
            }
          }
        },
        options.threads);
  }
}

// Diagonal blocks hold the pairs s <= t only; symmetrize as Z = Zp + Zp^T.
void symmetrize(Eigen::MatrixXd& z) {
  const Eigen::Index n = z.rows();
  for (Eigen::Index c = 0; c < n; ++c) {
    z(c, c) *= 2.0;
    for (Eigen::Index r = c + 1; r < n; ++r) {
      const double v = z(r, c) + z(c, r);
      z(r, c) = v;
      z(c, r) = v;
    }
  }
}

void check_finite(const Eigen::MatrixXd& z, int j, int k, double kappa) {
  if (!z.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite entry in block (" << j + 1 << ", " << k + 1 << ") at kappa " << kappa;
    throw NumericalError(msg.str());
  }
}

std::pair<BlockOperator, BlockOperator> assemble_impl(const EdgeBasis& basis, double kappa,
                                                      const AssemblyOptions& options, bool value_only) {
  check_kappa(kappa);
  BlockOperator z(kappa, OperatorKind::value, basis.offsets());
  BlockOperator dz(kappa, OperatorKind::kappa_derivative, value_only ? std::vector<int>{0, 0} : basis.offsets());
  const int nb = basis.num_bodies();
  for (int j = 0; j < nb; ++j) {
    const auto colors = color_triangles(basis, j);
    for (int k = j; k < nb; ++k) {
      assemble_block(basis, j, k, kappa, options, colors, z.block(j, k), value_only ? nullptr : &dz.block(j, k));
      if (j == k) {
        symmetrize(z.block(j, j));
        if (!value_only) symmetrize(dz.block(j, j));
      }
      check_finite(z.block(j, k), j, k, kappa);
      if (!value_only) check_finite(dz.block(j, k), j, k, kappa);
    }
  }
  return {std::move(z), std::move(dz)};
}

}  // namespace

BlockOperator assemble(const EdgeBasis& basis, double kappa, const AssemblyOptions& options) {
  return std::move(assemble_impl(basis, kappa, options, true).first);
}

BlockOperator assemble_derivative(const EdgeBasis& basis, double kappa, const AssemblyOptions& options) {
  return std::move(assemble_impl(basis, kappa, options, false).second);
}

std::pair<BlockOperator, BlockOperator> assemble_with_derivative(const EdgeBasis& basis, double kappa,
                                                                 const AssemblyOptions& options) {
  return assemble_impl(basis, kappa, options, false);
}

double surface_distance(const EdgeBasis& basis, const Vec3& x) {
  double d = std::numeric_limits<double>::infinity();
  for (int t = 0; t < basis.num_triangles(); ++t) {
    const auto c = basis.corners(t);
    d = std::min(d, point_triangle_distance(x, c[0], c[1], c[2]));
  }
  return d;
}

Eigen::Matrix<double, 3, Eigen::Dynamic> potential_row(const Vec3& x, const EdgeBasis& basis, double kappa,
                                                       const QuadratureConfig& quadrature) {
  check_kappa(kappa);
  double h = 0.0;
  for (const auto& f : basis.functions()) h = std::max(h, f.length);
  const double dist = surface_distance(basis, x);
  if (!(dist >= h)) {
    std::ostringstream msg;
    msg << "evaluation point (" << x.transpose() << ") is " << dist << " from the surface, inside the mesh-size band "
        << h;
    throw ConfigError(msg.str());
  }

  constexpr double inv4pi = 0.25 / std::numbers::pi;
  const double k2 = kappa * kappa;
  Eigen::Matrix<double, 3, Eigen::Dynamic> p = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, basis.size());
  for (int t = 0; t < basis.num_triangles(); ++t) {
    const auto c = basis.corners(t);
    const Vec3 ct = (c[0] + c[1] + c[2]) / 3.0;
    const double diam = std::max({(c[1] - c[0]).norm(), (c[2] - c[1]).norm(), (c[0] - c[2]).norm()});
    const double ratio = (x - ct).norm() / diam;
    const int degree = ratio < quadrature.near_ratio ? 14 : (ratio < 4.0 * quadrature.near_ratio ? quadrature.near_degree
                                                                                              : quadrature.far_degree);
    const TriangleRule& rule = triangle_rule(degree);
    const double area = basis.area(t);
    // int G (y - ct) and int G, int grad_x G over the triangle.
    Vec3 s1 = Vec3::Zero(), grad = Vec3::Zero();
    double s0 = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& b = rule.points[q];
      const Vec3 y = b[0] * c[0] + b[1] * c[1] + b[2] * c[2];
      const Vec3 d = x - y;
      const double r = d.norm();
      const double w = rule.weights[q] * area;
      const double e = inv4pi * std::exp(-kappa * r);
      const double g = e / r;
      s0 += w * g;
      s1 += w * g * (y - ct);
      grad -= w * (1.0 + kappa * r) * g / (r * r) * d;
    }
    const TriangleSupport& sup = basis.support(t);
    for (int a = 0; a < 3; ++a) {
      const int m = sup.function[a];
      const EdgeFunction& f = basis.function(m);
      const double cf = sup.sign[a] * f.length / (2.0 * area);
      const double df = sup.sign[a] * f.length / area;
      p.col(m) += k2 * cf * (s1 - (c[a] - ct) * s0) - df * grad;
    }
  }
  return p;
}

void write_matrix_dump(const std::string& path, const BlockOperator& op) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  nlohmann::json header = {{"n", op.size()},
                           {"kappa", op.kappa()},
                           {"blocks", op.offsets()},
                           {"kind", op.kind() == OperatorKind::value ? "value" : "kappa_derivative"}};
  out << header.dump() << '\n';
  const Eigen::MatrixXd z = op.dense();
  std::vector<unsigned char> bytes(sizeof(double));
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
      std::uint64_t bits = std::bit_cast<std::uint64_t>(z(r, c));
      for (int b = 0; b < 8; ++b) out.put(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
  }
  if (!out) throw ConfigError("failed writing matrix dump '" + path + "'");
}

BlockOperator read_matrix_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad matrix dump header: ") + e.what());
  }
  const int n = header.at("n").get<int>();
  const auto kind = header.value("kind", std::string("value")) == "value" ? OperatorKind::value
                                                                          : OperatorKind::kappa_derivative;
  BlockOperator op(header.at("kappa").get<double>(), kind, header.at("blocks").get<std::vector<int>>());
  if (op.size() != n) throw ConfigError("matrix dump block offsets disagree with n");
  Eigen::MatrixXd z(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in.get())) << (8 * b);
      z(r, c) = std::bit_cast<double>(bits);
    }
  }
  if (!in) throw ConfigError("truncated matrix dump '" + path + "'");
  for (int j = 0; j < op.num_blocks(); ++j)
    for (int k = j; k < op.num_blocks(); ++k)
      op.block(j, k) = z.block(op.offset(j), op.offset(k), op.block_size(j), op.block_size(k));
  return op;
}

}  // namespace casimir
