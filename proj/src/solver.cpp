#include "sqg/solver.hpp"

#include <algorithm>
#include <cmath>

namespace sqg {

namespace {

void check_tensor_binding(const SpectralField& theta, const InteractionTensor& t) {
  if (theta.basis_id != t.basis_id())
    throw Error(ErrorKind::binding,
                "field bound to basis " + theta.basis_id + ", tensor to " + t.basis_id());
  if (theta.size() != t.m())
    throw Error(ErrorKind::binding, "field has " + std::to_string(theta.size()) +
                                        " coefficients, tensor expects " + std::to_string(t.m()));
}

// lambda_l^{p} from the tensor's eigenvalues.
Eigen::VectorXd lambda_power(const InteractionTensor& t, double p) {
  return (p * t.eigenvalues().array().log()).exp().matrix();
}

struct Stepper {
  const InteractionTensor& tensor;
  Integrator integrator;
  Eigen::VectorXd rate;  // nu lambda^{s/2}

  Eigen::VectorXd nonlinear(const Eigen::VectorXd& x) const { return -tensor.contract(x); }

  Eigen::VectorXd advance(const Eigen::VectorXd& x, double h) const {
    if (h == 0.0) return x;
    if (integrator == Integrator::rk4) {
      auto f = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
        return nonlinear(y) - rate.cwiseProduct(y);
      };
      const Eigen::VectorXd k1 = f(x);
      const Eigen::VectorXd k2 = f(x + 0.5 * h * k1);
      const Eigen::VectorXd k3 = f(x + 0.5 * h * k2);
      const Eigen::VectorXd k4 = f(x + h * k3);
      return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    // Lawson: classical RK4 on eta = e^{rate t} theta.
    const Eigen::ArrayXd e = (-0.5 * h * rate.array()).exp();
    const Eigen::ArrayXd e2 = e * e;
    const Eigen::ArrayXd xa = x.array();
    const Eigen::ArrayXd k1 = nonlinear(x).array();
    const Eigen::ArrayXd k2 = nonlinear((e * (xa + 0.5 * h * k1)).matrix()).array();
    const Eigen::ArrayXd k3 = nonlinear((e * xa + 0.5 * h * k2).matrix()).array();
    const Eigen::ArrayXd k4 = nonlinear((e2 * xa + h * e * k3).matrix()).array();
    return (e2 * xa + h / 6.0 * (e2 * k1 + 2.0 * e * (k2 + k3) + k4)).matrix();
  }
};

Stepper make_stepper(const SolverConfig& cfg, const InteractionTensor& t) {
  return {t, cfg.integrator, cfg.nu * lambda_power(t, 0.5 * cfg.s)};
}

double relative_or_absolute(double defect, double scale) {
  return scale > 0.0 ? defect / scale : defect;
}

}  // namespace

std::string to_string(Integrator i) { return i == Integrator::rk4 ? "rk4" : "if_rk4"; }

Integrator integrator_from_string(const std::string& s) {
  if (s == "if_rk4") return Integrator::if_rk4;
  if (s == "rk4") return Integrator::rk4;
  throw Error(ErrorKind::config, "unknown integrator '" + s + "' (expected if_rk4 or rk4)");
}

void SolverConfig::validate() const {
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw Error(ErrorKind::config, "nu must be finite and >= 0");
  if (!(s > 0.0 && s <= 2.0)) throw Error(ErrorKind::config, "s must lie in (0, 2]");
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorKind::config, "T must be positive");
  if (!(dt >= 0.0) || dt > T) throw Error(ErrorKind::config, "dt must lie in [0, T] (0 = automatic)");
  if (snapshot_stride < 1) throw Error(ErrorKind::config, "snapshot_stride must be at least 1");
  if (!(energy_growth_tol > 0.0)) throw Error(ErrorKind::config, "energy_growth_tol must be positive");
}

SpectralField rhs(const SpectralField& theta, double nu, double s, const InteractionTensor& t) {
  check_tensor_binding(theta, t);
  Eigen::VectorXd out = -t.contract(theta.coefficients);
  if (nu != 0.0) out -= nu * lambda_power(t, 0.5 * s).cwiseProduct(theta.coefficients);
  return {std::move(out), theta.basis_id};
}

TrajectoryState step(const TrajectoryState& state, double dt, const SolverConfig& cfg,
                     const InteractionTensor& t) {
  check_tensor_binding(state.theta, t);
  if (!state.theta.coefficients.allFinite())
    throw Error(ErrorKind::numeric, "step called on a non-finite state");
  const Stepper stepper = make_stepper(cfg, t);
  TrajectoryState next{state.t + dt, {stepper.advance(state.theta.coefficients, dt), state.theta.basis_id}};
  if (!next.theta.coefficients.allFinite())
    throw BlowUpError("non-finite coefficients at t = " + std::to_string(next.t), state);
  return next;
}

double auto_time_step(const InteractionTensor& t, const Eigen::VectorXd& theta0, double T) {
  const double scale = static_cast<double>(t.m()) * t.max_abs() * theta0.norm();
  double dt = 1e-3;
  if (scale > 0.0) dt = std::min(dt, 0.5 / scale);
  const double steps = std::ceil(T / dt - 1e-9);
  return T / std::max(1.0, steps);
}

Trajectory integrate(const SpectralField& theta0, const SolverConfig& cfg, const InteractionTensor& t) {
  cfg.validate();
  if (theta0.basis_id != t.basis_id())
    throw Error(ErrorKind::binding,
                "initial field bound to basis " + theta0.basis_id + ", tensor to " + t.basis_id());
  const Index m = t.m();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  const Index n0 = std::min(m, theta0.size());
  x.head(n0) = theta0.coefficients.head(n0);
  if (!x.allFinite()) throw Error(ErrorKind::config, "initial data is not finite");

  Trajectory traj;
  traj.config = cfg;
  traj.config.dt = cfg.dt > 0.0 ? cfg.dt : auto_time_step(t, x, cfg.T);
  const double dt = traj.config.dt;
  const double steps_real = cfg.T / dt;
  const auto steps = static_cast<long long>(std::llround(steps_real));
  if (steps < 1 || std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * steps_real)
    throw Error(ErrorKind::config, "T = " + std::to_string(cfg.T) +
                                       " is not a whole number of steps of dt = " +
                                       std::to_string(dt));
  traj.tensor_meta = t.meta();
  traj.tensor_checksum = t.checksum();

  const Stepper stepper = make_stepper(cfg, t);
  const Eigen::VectorXd w_s = lambda_power(t, 0.5 * cfg.s);
  const Eigen::VectorXd w_sm1 = lambda_power(t, 0.5 * (cfg.s - 1.0));
  const Eigen::VectorXd w_h = lambda_power(t, -0.5);
  auto& L = traj.ledger;
  double ds = cfg.nu * w_s.dot(x.cwiseAbs2());
  double dsm1 = cfg.nu * w_sm1.dot(x.cwiseAbs2());
  auto sample = [&](double time, const Eigen::VectorXd& y, double acc_s, double acc_sm1) {
    L.t.push_back(time);
    L.E.push_back(0.5 * y.squaredNorm());
    L.H.push_back(0.5 * w_h.dot(y.cwiseAbs2()));
    L.diss_s.push_back(acc_s);
    L.diss_sm1.push_back(acc_sm1);
  };
  sample(0.0, x, 0.0, 0.0);
  traj.snapshots.push_back({0.0, {x, t.basis_id()}});
  traj.snapshot_rows.push_back(0);

  const double norm0 = x.norm();
  const double E0 = L.E.front();
  double acc_s = 0.0, acc_sm1 = 0.0;
  for (long long n = 1; n <= steps; ++n) {
    const double time = n == steps ? cfg.T : static_cast<double>(n) * dt;
    Eigen::VectorXd y = stepper.advance(x, dt);
    const double norm = y.norm();
    if (!y.allFinite() || norm > 1e6 * std::max(norm0, 1e-300))
      throw BlowUpError("blow-up at t = " + std::to_string(time) + " (||theta|| = " +
                            std::to_string(norm) + ", ||theta0|| = " + std::to_string(norm0) +
                            "); reduce dt",
                        {time - dt, {x, t.basis_id()}});
    const double ds_next = cfg.nu * w_s.dot(y.cwiseAbs2());
    const double dsm1_next = cfg.nu * w_sm1.dot(y.cwiseAbs2());
    acc_s += 0.5 * dt * (ds + ds_next);
    acc_sm1 += 0.5 * dt * (dsm1 + dsm1_next);
    ds = ds_next;
    dsm1 = dsm1_next;
    x = std::move(y);
    sample(time, x, acc_s, acc_sm1);
    if (L.E.back() > (1.0 + cfg.energy_growth_tol) * E0 && E0 > 0.0)
      throw Error(ErrorKind::numeric, "energy grew by a relative " +
                                          std::to_string(L.E.back() / E0 - 1.0) + " at t = " +
                                          std::to_string(time) + "; dt = " + std::to_string(dt) +
                                          " is unstable");
    if (n % cfg.snapshot_stride == 0 || n == steps) {
      traj.snapshots.push_back({time, {x, t.basis_id()}});
      traj.snapshot_rows.push_back(L.t.size() - 1);
    }
  }
  return traj;
}

double energy_balance_residual(const Trajectory& traj) {
  const auto& L = traj.ledger;
  double worst = 0.0;
  for (std::size_t i = 0; i < L.t.size(); ++i)
    worst = std::max(worst, std::abs(L.E[i] + L.diss_s[i] - L.E.front()));
  return relative_or_absolute(worst, L.E.empty() ? 0.0 : L.E.front());
}

double hamiltonian_balance_residual(const Trajectory& traj) {
  const auto& L = traj.ledger;
  double worst = 0.0;
  for (std::size_t i = 0; i < L.t.size(); ++i)
    worst = std::max(worst, std::abs(L.H[i] + L.diss_sm1[i] - L.H.front()));
  return relative_or_absolute(worst, L.H.empty() ? 0.0 : L.H.front());
}

}  // namespace sqg
