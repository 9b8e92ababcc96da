#pragma once

#include <Eigen/Core>

namespace sqg {

/// Gauss-Legendre nodes and weights on [a, b].
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

GaussRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// n-point midpoint rule on [a, b]. Exact for cos(kx) on [0, pi] when |k| < 2n.
GaussRule midpoint_rule(int n, double a, double b);

}  // namespace sqg
