#include "sqg/commutators.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sqg/error.hpp"

namespace sqg {

namespace {

double lp_norm(const Eigen::VectorXd& weights, const Eigen::VectorXd& f, double p) {
  return std::pow(weights.dot(f.cwiseAbs().array().pow(p).matrix()), 1.0 / p);
}

void check_psi(const EigenBasis& basis, const Eigen::VectorXd& psi) {
  if (psi.size() < 1 || psi.size() > basis.size())
    throw Error(ErrorKind::config, "psi must have between 1 and " + std::to_string(basis.size()) +
                                       " coefficients");
}

}  // namespace

Multiplier Multiplier::constant(double c) {
  Multiplier m;
  m.kind_ = Kind::constant;
  m.amplitude_ = c;
  return m;
}

Multiplier Multiplier::sine_product(int a, int b, double amplitude) {
  Multiplier m;
  m.kind_ = Kind::sine_product;
  m.a_ = a;
  m.b_ = b;
  m.amplitude_ = amplitude;
  return m;
}

Multiplier Multiplier::radial(std::vector<double> coeffs) {
  Multiplier m;
  m.kind_ = Kind::radial;
  m.coeffs_ = std::move(coeffs);
  return m;
}

std::string Multiplier::name() const {
  switch (kind_) {
    case Kind::constant: return "constant";
    case Kind::sine_product: return "sine_product";
    case Kind::radial: return "radial";
  }
  return "unknown";
}

Eigen::VectorXd Multiplier::value(const Points& x) const {
  switch (kind_) {
    case Kind::constant: return Eigen::VectorXd::Constant(x.rows(), amplitude_);
    case Kind::sine_product:
      return amplitude_ * ((a_ * x.col(0).array()).sin() * (b_ * x.col(1).array()).sin()).matrix();
    case Kind::radial: {
      const Eigen::ArrayXd rho = x.rowwise().squaredNorm().array();
      Eigen::ArrayXd f = Eigen::ArrayXd::Zero(x.rows());
      for (auto c = coeffs_.rbegin(); c != coeffs_.rend(); ++c) f = f * rho + *c;
      return f.matrix();
    }
  }
  return {};
}

Gradients Multiplier::gradient(const Points& x) const {
  Gradients g = Gradients::Zero(x.rows(), 2);
  switch (kind_) {
    case Kind::constant: break;
    case Kind::sine_product: {
      const Eigen::ArrayXd sx = (a_ * x.col(0).array()).sin(), cx = (a_ * x.col(0).array()).cos();
      const Eigen::ArrayXd sy = (b_ * x.col(1).array()).sin(), cy = (b_ * x.col(1).array()).cos();
      g.col(0) = (amplitude_ * a_ * cx * sy).matrix();
      g.col(1) = (amplitude_ * b_ * sx * cy).matrix();
      break;
    }
    case Kind::radial: {
      // chi = f(r^2): grad chi = 2 f'(r^2) x
      const Eigen::ArrayXd rho = x.rowwise().squaredNorm().array();
      Eigen::ArrayXd df = Eigen::ArrayXd::Zero(x.rows());
      for (std::size_t i = coeffs_.size(); i-- > 1;) df = df * rho + static_cast<double>(i) * coeffs_[i];
      g.col(0) = (2.0 * df * x.col(0).array()).matrix();
      g.col(1) = (2.0 * df * x.col(1).array()).matrix();
      break;
    }
  }
  return g;
}

Hessians Multiplier::hessian(const Points& x) const {
  Hessians h = Hessians::Zero(x.rows(), 3);
  switch (kind_) {
    case Kind::constant: break;
    case Kind::sine_product: {
      const Eigen::ArrayXd sx = (a_ * x.col(0).array()).sin(), cx = (a_ * x.col(0).array()).cos();
      const Eigen::ArrayXd sy = (b_ * x.col(1).array()).sin(), cy = (b_ * x.col(1).array()).cos();
      h.col(0) = (-amplitude_ * a_ * a_ * sx * sy).matrix();
      h.col(1) = (amplitude_ * a_ * b_ * cx * cy).matrix();
      h.col(2) = (-amplitude_ * b_ * b_ * sx * sy).matrix();
      break;
    }
    case Kind::radial: {
      // D^2 chi = 2 f' I + 4 f'' x x^T
      const Eigen::ArrayXd rho = x.rowwise().squaredNorm().array();
      Eigen::ArrayXd df = Eigen::ArrayXd::Zero(x.rows()), d2f = Eigen::ArrayXd::Zero(x.rows());
      for (std::size_t i = coeffs_.size(); i-- > 1;) df = df * rho + static_cast<double>(i) * coeffs_[i];
      for (std::size_t i = coeffs_.size(); i-- > 2;)
        d2f = d2f * rho + static_cast<double>(i * (i - 1)) * coeffs_[i];
      const Eigen::ArrayXd px = x.col(0).array(), py = x.col(1).array();
      h.col(0) = (2.0 * df + 4.0 * d2f * px * px).matrix();
      h.col(1) = (4.0 * d2f * px * py).matrix();
      h.col(2) = (2.0 * df + 4.0 * d2f * py * py).matrix();
      break;
    }
  }
  return h;
}

double Multiplier::w2p_norm(const EigenBasis& basis, double p) const {
  if (!(p >= 1.0)) throw Error(ErrorKind::config, "W^{2,p} norm needs p >= 1");
  const auto& grid = basis.grid();
  const Eigen::VectorXd v = value(grid.points);
  const Eigen::VectorXd g = gradient(grid.points).rowwise().norm();
  const Hessians h = hessian(grid.points);
  const Eigen::VectorXd hf =
      (h.col(0).array().square() + 2.0 * h.col(1).array().square() + h.col(2).array().square()).sqrt().matrix();
  const auto integral = [&](const Eigen::VectorXd& f) {
    return grid.weights.dot(f.cwiseAbs().array().pow(p).matrix());
  };
  return std::pow(integral(v) + integral(g) + integral(hf), 1.0 / p);
}

Eigen::VectorXd random_field(const EigenBasis& basis, Index M, std::uint64_t seed) {
  if (M < 1 || M > basis.size()) throw Error(ErrorKind::config, "random field size outside the basis");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd psi(M);
  for (Index j = 0; j < M; ++j) psi(j) = normal(rng) / basis.eigenvalues()(j);
  return psi;
}

Eigen::VectorXd multiplier_commutator(const EigenBasis& basis, const Multiplier& chi,
                                      const Eigen::VectorXd& psi) {
  check_psi(basis, psi);
  const Index M = psi.size();
  const Eigen::VectorXd chi_grid = chi.value(basis.grid().points);
  const Eigen::VectorXd root = basis.eigenvalue_power(0.5).head(M);
  const Eigen::VectorXd a = basis.analyze(chi_grid.cwiseProduct(basis.synthesize(psi)), M);
  const Eigen::VectorXd b =
      basis.analyze(chi_grid.cwiseProduct(basis.synthesize(root.cwiseProduct(psi))), M);
  return root.cwiseProduct(a) - b;
}

CommutatorReport commutator_multiplier_ratio(const EigenBasis& basis, const Multiplier& chi, Index M,
                                             std::size_t samples, std::uint64_t seed,
                                             const ParallelContext& ctx) {
  if (M < 1 || M > basis.size())
    throw Error(ErrorKind::config, "commutator truncation M = " + std::to_string(M) +
                                       " outside the basis of " + std::to_string(basis.size()));
  if (samples < 1) throw Error(ErrorKind::config, "need at least one sample");
  CommutatorReport rep;
  rep.M = M;
  rep.samples = samples;
  rep.ratios.assign(samples, 0.0);
  const Eigen::VectorXd half = basis.eigenvalue_power(0.5).head(M);
  parallel_for(ctx, samples, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t k = begin; k < end; ++k) {
      const Eigen::VectorXd psi = random_field(basis, M, seed + k);
      const Eigen::VectorXd c = multiplier_commutator(basis, chi, psi);
      rep.ratios[k] = std::sqrt(half.dot(c.cwiseAbs2()) / half.dot(psi.cwiseAbs2()));
    }
  });
  for (std::size_t k = 0; k < samples; ++k) {
    rep.mean += rep.ratios[k] / static_cast<double>(samples);
    if (rep.ratios[k] > rep.sup) {
      rep.sup = rep.ratios[k];
      rep.worst_sample = k;
    }
  }
  return rep;
}

SaturationReport commutator_saturation(const EigenBasis& basis, const Multiplier& chi,
                                       const std::vector<Index>& M_list, std::size_t samples,
                                       std::uint64_t seed, const ParallelContext& ctx) {
  SaturationReport rep;
  for (Index M : M_list) rep.reports.push_back(commutator_multiplier_ratio(basis, chi, M, samples, seed, ctx));
  for (std::size_t i = 1; i < rep.reports.size(); ++i) {
    const double prev = rep.reports[i - 1].sup;
    const double g = prev > 0.0 ? rep.reports[i].sup / prev - 1.0 : 0.0;
    rep.growth.push_back(g);
    rep.flagged = rep.flagged || g > 0.25;
  }
  return rep;
}

Eigen::VectorXd GradientWeight::value(const Points& x) const {
  switch (kind) {
    case Kind::zero: return Eigen::VectorXd::Zero(x.rows());
    case Kind::constant: return Eigen::VectorXd::Constant(x.rows(), constant);
    case Kind::bump: return bump.value(x);
  }
  return {};
}

WeightedCommutatorResult weighted_gradient_commutator(const EigenBasis& basis, const Eigen::VectorXd& psi,
                                                      double s, const GradientWeight& weight, double p,
                                                      double q) {
  check_psi(basis, psi);
  if (!(s > 0.0) || !(p >= 1.0) || !(q >= 1.0))
    throw Error(ErrorKind::config, "weighted commutator needs s > 0 and p, q >= 1");
  const double exponent = s + 1.0 + 2.0 / p;
  if (weight.kind == GradientWeight::Kind::constant && weight.constant != 0.0 && exponent * q >= 1.0)
    throw Error(ErrorKind::config, "weight d^{-" + std::to_string(exponent) +
                                       "} is not L^" + std::to_string(q) +
                                       "-integrable up to the boundary");
  if (weight.kind == GradientWeight::Kind::bump &&
      basis.domain().boundary_distance(weight.bump.center) <= weight.bump.radius)
    throw Error(ErrorKind::config, "bump weight must be compactly supported inside the domain");

  const auto& grid = basis.grid();
  const Index M = psi.size();
  WeightedCommutatorResult out;
  const Eigen::VectorXd phi = weight.value(grid.points);
  if ((phi.array() == 0.0).all()) {
    out.zero_weight = true;
    return out;
  }

  const Eigen::VectorXd ls = basis.eigenvalue_power(0.5 * s).head(M);
  const auto pg = basis.project_gradient(psi, M);
  const Gradients direct = basis.synthesize_gradient(ls.cwiseProduct(psi));
  Gradients comm(grid.size(), 2);
  comm.col(0) = basis.synthesize(ls.cwiseProduct(pg[0])) - direct.col(0);
  comm.col(1) = basis.synthesize(ls.cwiseProduct(pg[1])) - direct.col(1);

  Eigen::VectorXd weighted_d(grid.size());
  for (Index i = 0; i < grid.size(); ++i)
    weighted_d(i) = phi(i) == 0.0 ? 0.0 : phi(i) * std::pow(grid.boundary_distance(i), -exponent);
  out.numerator = lp_norm(grid.weights, phi.cwiseProduct(comm.rowwise().norm()), q);
  out.weight_norm = lp_norm(grid.weights, weighted_d, q);
  out.psi_norm = lp_norm(grid.weights, basis.synthesize(psi), p);
  const double denom = out.weight_norm * out.psi_norm;
  out.ratio = denom > 0.0 ? out.numerator / denom : 0.0;
  return out;
}

double nonlinearity_identity_residual(const EigenBasis& basis, const Eigen::VectorXd& psi,
                                      const SpaceBump& phi) {
  check_psi(basis, psi);
  const Index M = psi.size();
  const double h1 = basis.eigenvalues().head(M).dot(psi.cwiseAbs2());
  if (h1 == 0.0) return 0.0;
  const auto& grid = basis.grid();
  const Eigen::VectorXd root = basis.eigenvalue_power(0.5).head(M);
  const Eigen::VectorXd lpsi = root.cwiseProduct(psi);

  const Gradients grad_phi = phi.gradient(grid.points);
  const Gradients grad_psi = basis.synthesize_gradient(psi);
  const Eigen::VectorXd psi_grid = basis.synthesize(psi);
  const Eigen::VectorXd lpsi_grid = basis.synthesize(lpsi);

  // grad^perp psi . grad phi = -psi_y phi_x + psi_x phi_y
  const Eigen::VectorXd perp_dot =
      grad_psi.col(0).cwiseProduct(grad_phi.col(1)) - grad_psi.col(1).cwiseProduct(grad_phi.col(0));
  const double lhs = grid.weights.dot(lpsi_grid.cwiseProduct(perp_dot));

  const auto pg = basis.project_gradient(psi, M);     // P_M grad psi
  const auto pgl = basis.project_gradient(lpsi, M);   // P_M grad Lambda psi
  // P_M grad^perp f = (-P_M f_y, P_M f_x)
  const Eigen::VectorXd Gx = -pg[1], Gy = pg[0];
  const Eigen::VectorXd Lx = -pgl[1], Ly = pgl[0];
  const Eigen::VectorXd Hx = basis.analyze(grad_phi.col(0).cwiseProduct(psi_grid), M);
  const Eigen::VectorXd Hy = basis.analyze(grad_phi.col(1).cwiseProduct(psi_grid), M);
  const Eigen::VectorXd Kx = basis.analyze(grad_phi.col(0).cwiseProduct(lpsi_grid), M);
  const Eigen::VectorXd Ky = basis.analyze(grad_phi.col(1).cwiseProduct(lpsi_grid), M);
  const double rhs = 0.5 * (Gx.dot(Kx) + Gy.dot(Ky)) - 0.5 * (Lx.dot(Hx) + Ly.dot(Hy));
  return std::abs(lhs - rhs) / h1;
}

}  // namespace sqg
