#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sqg/basis.hpp"
#include "sqg/limits.hpp"
#include "sqg/parallel.hpp"

namespace sqg {

/// Smooth multiplier chi with analytic derivatives.
///   constant:     chi = c
///   sine_product: chi = c sin(a x) sin(b y)           (square)
///   radial:       chi = sum_i coeffs[i] r^{2i}         (disk)
class Multiplier {
 public:
  enum class Kind { constant, sine_product, radial };

  static Multiplier constant(double c);
  static Multiplier sine_product(int a = 1, int b = 1, double amplitude = 1.0);
  static Multiplier radial(std::vector<double> coeffs);

  Kind kind() const { return kind_; }
  std::string name() const;

  Eigen::VectorXd value(const Points& x) const;
  Gradients gradient(const Points& x) const;
  Hessians hessian(const Points& x) const;

  /// (int |chi|^p + |grad chi|^p + |D^2 chi|^p)^{1/p} by grid quadrature,
  /// |D^2 chi| the Frobenius norm.
  double w2p_norm(const EigenBasis& basis, double p) const;

 private:
  Kind kind_ = Kind::constant;
  double amplitude_ = 0.0;
  int a_ = 0, b_ = 0;
  std::vector<double> coeffs_;
};

/// psi_j = z_j / lambda_j with z_j i.i.d. standard normal drawn in order from
/// mt19937_64(seed) (so the first M coefficients agree across M); sample k
/// uses seed + k.
Eigen::VectorXd random_field(const EigenBasis& basis, Index M, std::uint64_t seed);

struct CommutatorReport {
  Index M = 0;
  std::size_t samples = 0;
  std::vector<double> ratios;
  double sup = 0.0;
  double mean = 0.0;
  std::size_t worst_sample = 0;
};

/// [Lambda, chi] psi := P_M(Lambda P_M(chi psi)) - P_M(chi Lambda psi), products
/// formed on the grid. Reports ||[Lambda, chi] psi||_{D(Lambda^{1/2})} /
/// ||psi||_{D(Lambda^{1/2})} over random psi.
CommutatorReport commutator_multiplier_ratio(const EigenBasis& basis, const Multiplier& chi, Index M,
                                             std::size_t samples, std::uint64_t seed = 1,
                                             const ParallelContext& ctx = {});

/// [Lambda, chi] psi coefficients for a given psi (length M).
Eigen::VectorXd multiplier_commutator(const EigenBasis& basis, const Multiplier& chi,
                                      const Eigen::VectorXd& psi);

struct SaturationReport {
  std::vector<CommutatorReport> reports;
  /// sup(M_{i+1}) / sup(M_i) - 1 between consecutive entries of the M list.
  std::vector<double> growth;
  /// Any growth above 25%.
  bool flagged = false;
};

SaturationReport commutator_saturation(const EigenBasis& basis, const Multiplier& chi,
                                       const std::vector<Index>& M_list, std::size_t samples,
                                       std::uint64_t seed = 1, const ParallelContext& ctx = {});

struct GradientWeight {
  enum class Kind { zero, constant, bump };
  Kind kind = Kind::bump;
  double constant = 1.0;
  SpaceBump bump;

  Eigen::VectorXd value(const Points& x) const;
};

struct WeightedCommutatorResult {
  double ratio = 0.0;
  double numerator = 0.0;    // ||phi [Lambda^s, grad] psi||_{L^q}
  double weight_norm = 0.0;  // ||phi d^{-s-1-2/p}||_{L^q}
  double psi_norm = 0.0;     // ||psi||_{L^p}
  bool zero_weight = false;  // 0/0 guarded, ratio reported as 0
};

/// [Lambda^s, grad] psi := Lambda^s P_M(grad psi) - grad(Lambda^s psi) on the
/// grid, M = psi.size(). The ratio is
///   ||phi [Lambda^s, grad] psi||_{L^q} / (||phi d^{-s-1-2/p}||_{L^q} ||psi||_{L^p}).
/// Throws Error(config) if the weight is not compactly supported and
/// d^{-(s+1+2/p) q} is not integrable up to the boundary.
WeightedCommutatorResult weighted_gradient_commutator(const EigenBasis& basis, const Eigen::VectorXd& psi,
                                                      double s, const GradientWeight& weight, double p,
                                                      double q);

/// |LHS - RHS| / sum_j lambda_j psi_j^2 with
///   LHS = int Lambda psi grad^perp psi . grad phi  (grid)
///   RHS = 1/2 <P_M grad^perp psi, P_M(grad phi Lambda psi)>
///         - 1/2 <P_M grad^perp Lambda psi, P_M(grad phi psi)>
/// which is the projected form of
///   1/2 int [Lambda, grad^perp] psi . grad phi psi - 1/2 int grad^perp psi . [Lambda, grad phi] psi
/// with P_M on every operator application. M = psi.size(). Gradient
/// projections are exact on the square and quadrature on the disk.
double nonlinearity_identity_residual(const EigenBasis& basis, const Eigen::VectorXd& psi,
                                      const SpaceBump& phi);

}  // namespace sqg
