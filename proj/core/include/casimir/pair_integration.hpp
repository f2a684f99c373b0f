#pragma once

#include <Eigen/Core>

#include "casimir/edge_basis.hpp"
#include "casimir/quadrature.hpp"

namespace casimir {

/// Interaction of the three edge functions on triangle s with the three on
/// triangle t, indexed by local corner:
///   value(a, b) = int int [k^2 f_a . f_b + Div f_a Div f_b] G
/// with G = exp(-k r) / (4 pi r), and the exact kappa-derivative of the
/// same quadrature sum.
struct PairBlock {
  Eigen::Matrix3d value = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d derivative = Eigen::Matrix3d::Zero();
  PairClass cls = PairClass::far;
};

PairBlock galerkin_pair(const EdgeBasis& basis, int s, int t, double kappa, const QuadratureConfig& config,
                        bool with_derivative);

}  // namespace casimir
