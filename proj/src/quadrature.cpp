#include "sqg/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "sqg/error.hpp"

namespace sqg {

GaussRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw Error(ErrorKind::config, "gauss_legendre: need at least one node");
  // P_n(x) and P_n'(x) by the three-term recurrence.
  auto legendre = [n](double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };
  GaussRule rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  const double half = 0.5 * (b - a), mid = 0.5 * (b + a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes(i) = mid - half * x;
    rule.nodes(n - 1 - i) = mid + half * x;
    rule.weights(i) = rule.weights(n - 1 - i) = half * w;
  }
  return rule;
}

GaussRule midpoint_rule(int n, double a, double b) {
  if (n < 1) throw Error(ErrorKind::config, "midpoint_rule: need at least one node");
  GaussRule rule{Eigen::VectorXd(n), Eigen::VectorXd::Constant(n, (b - a) / n)};
  for (int i = 0; i < n; ++i) rule.nodes(i) = a + (i + 0.5) * (b - a) / n;
  return rule;
}

}  // namespace sqg
