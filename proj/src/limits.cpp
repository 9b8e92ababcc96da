#include "sqg/limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sqg {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::vector<double> trapezoid_weights(const std::vector<TrajectoryState>& snaps) {
  std::vector<double> w(snaps.size(), 0.0);
  for (std::size_t i = 1; i < snaps.size(); ++i) {
    const double h = snaps[i].t - snaps[i - 1].t;
    w[i - 1] += 0.5 * h;
    w[i] += 0.5 * h;
  }
  return w;
}

Eigen::VectorXd lambda_power(const Eigen::VectorXd& lambda, double p) {
  return (p * lambda.array().log()).exp().matrix();
}

void check_trajectory_basis(const EigenBasis& basis, const Trajectory& traj) {
  for (const auto& s : traj.snapshots) check_binding(basis, s.theta);
}

}  // namespace

Eigen::VectorXd SpaceBump::value(const Points& x) const {
  const double r2 = radius * radius;
  Eigen::VectorXd out(x.rows());
  for (Index p = 0; p < x.rows(); ++p) {
    const double rho2 = (x.row(p).transpose() - center).squaredNorm();
    out(p) = rho2 < r2 ? amplitude * std::exp(-r2 / (r2 - rho2)) : 0.0;
  }
  return out;
}

Gradients SpaceBump::gradient(const Points& x) const {
  const double r2 = radius * radius;
  Gradients out = Gradients::Zero(x.rows(), 2);
  for (Index p = 0; p < x.rows(); ++p) {
    const Eigen::Vector2d d = x.row(p).transpose() - center;
    const double rho2 = d.squaredNorm();
    if (rho2 >= r2) continue;
    const double gap = r2 - rho2;
    const double f = amplitude * std::exp(-r2 / gap);
    out.row(p) = (-2.0 * r2 * f / (gap * gap)) * d.transpose();
  }
  return out;
}

double TimeBump::value(double t) const {
  const double r2 = radius * radius, tau = t - center;
  return tau * tau < r2 ? std::exp(-r2 / (r2 - tau * tau)) : 0.0;
}

double TimeBump::derivative(double t) const {
  const double r2 = radius * radius, tau = t - center;
  if (tau * tau >= r2) return 0.0;
  const double gap = r2 - tau * tau;
  return -2.0 * r2 * tau / (gap * gap) * std::exp(-r2 / gap);
}

TestFunctionPair default_test_functions(const DomainSpec& domain, double T) {
  TestFunctionPair tf;
  tf.space.center = domain.center();
  tf.space.radius = 0.3 * domain.inradius();
  tf.space.amplitude = 1.0;
  tf.time.center = 0.5 * T;
  tf.time.radius = 0.4 * T;
  return tf;
}

void validate_test_functions(const DomainSpec& domain, const TestFunctionPair& tf, double T) {
  if (!(tf.space.radius > 0.0) || !(tf.time.radius > 0.0))
    throw Error(ErrorKind::config, "test-function radii must be positive");
  if (domain.boundary_distance(tf.space.center) <= tf.space.radius || !domain.contains(tf.space.center))
    throw Error(ErrorKind::config, "space bump must lie strictly inside the domain");
  if (tf.time.center - tf.time.radius <= 0.0 || tf.time.center + tf.time.radius >= T)
    throw Error(ErrorKind::config, "time bump must be supported strictly inside (0, T)");
}

double l2_time_distance(const Trajectory& a, const Trajectory& b) {
  if (a.snapshots.size() != b.snapshots.size())
    throw Error(ErrorKind::alignment, "trajectories have " + std::to_string(a.snapshots.size()) +
                                          " and " + std::to_string(b.snapshots.size()) + " snapshots");
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
    const auto& sa = a.snapshots[i];
    const auto& sb = b.snapshots[i];
    if (std::abs(sa.t - sb.t) > 1e-12 * std::max(1.0, std::abs(sa.t)))
      throw Error(ErrorKind::alignment, "snapshot " + std::to_string(i) + " times differ");
    if (sa.theta.size() != sb.theta.size())
      throw Error(ErrorKind::alignment, "trajectories have different truncations");
  }
  const auto w = trapezoid_weights(a.snapshots);
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    acc += w[i] * (a.snapshots[i].theta.coefficients - b.snapshots[i].theta.coefficients).squaredNorm();
  return std::sqrt(acc);
}

double weak_form_residual(const EigenBasis& basis, const Trajectory& traj, const TestFunctionPair& tf,
                          TestProjection projection) {
  if (traj.snapshots.empty()) return 0.0;
  check_trajectory_basis(basis, traj);
  const Index m = traj.snapshots.front().theta.size();
  const auto& grid = basis.grid();
  const Eigen::VectorXd phi_coeffs = basis.analyze(tf.space.value(grid.points), m);
  const Gradients grad_phi = projection == TestProjection::projected
                                 ? basis.synthesize_gradient(phi_coeffs)
                                 : tf.space.gradient(grid.points);
  const Eigen::VectorXd w_half = basis.eigenvalue_power(-0.5).head(m);
  const Eigen::VectorXd w_visc =
      traj.config.nu * basis.eigenvalue_power(0.5 * traj.config.s).head(m);

  const auto w = trapezoid_weights(traj.snapshots);
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto& snap = traj.snapshots[i];
    const double pt = tf.time.value(snap.t), dpt = tf.time.derivative(snap.t);
    if (pt == 0.0 && dpt == 0.0) continue;
    const Eigen::VectorXd& c = snap.theta.coefficients;
    double integrand = c.dot(phi_coeffs) * dpt;
    if (pt != 0.0) {
      const Gradients grad_psi = basis.synthesize_gradient(w_half.cwiseProduct(c));
      const Eigen::VectorXd theta = basis.synthesize(c);
      // u . grad phi with u = (-psi_y, psi_x)
      const Eigen::VectorXd u_dot = grad_psi.col(0).cwiseProduct(grad_phi.col(1)) -
                                    grad_psi.col(1).cwiseProduct(grad_phi.col(0));
      const double transport = grid.weights.dot(theta.cwiseProduct(u_dot));
      integrand += (transport - w_visc.dot(c.cwiseProduct(phi_coeffs))) * pt;
    }
    acc += w[i] * integrand;
  }
  return std::abs(acc);
}

double hamiltonian_drift(const Trajectory& traj) {
  const auto& H = traj.ledger.H;
  if (H.empty()) return 0.0;
  double worst = 0.0;
  for (double h : H) worst = std::max(worst, std::abs(h - H.front()));
  return H.front() > 0.0 ? worst / H.front() : worst;
}

double time_derivative_negative_norm(const Trajectory& traj, const InteractionTensor& t) {
  const Eigen::VectorXd w = lambda_power(t.eigenvalues(), -6.0);
  double sup = 0.0;
  for (const auto& s : traj.snapshots) {
    const Eigen::VectorXd r = rhs(s.theta, traj.config.nu, traj.config.s, t).coefficients;
    sup = std::max(sup, std::sqrt(w.dot(r.cwiseAbs2())));
  }
  return sup;
}

std::vector<double> initial_data_distance(const Trajectory& traj, const InteractionTensor& t) {
  const Eigen::VectorXd w = lambda_power(t.eigenvalues(), -0.25);
  std::vector<double> out;
  if (traj.snapshots.empty()) return out;
  const Eigen::VectorXd& c0 = traj.snapshots.front().theta.coefficients;
  for (const auto& s : traj.snapshots)
    out.push_back(std::sqrt(w.dot((s.theta.coefficients - c0).cwiseAbs2())));
  return out;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i)
    if (x[i] > 0.0 && y[i] > 0.0) pts.emplace_back(std::log(x[i]), std::log(y[i]));
  if (pts.size() < 2) return nan;
  double mx = 0.0, my = 0.0;
  for (const auto& [a, b] : pts) {
    mx += a;
    my += b;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [a, b] : pts) {
    sxy += (a - mx) * (b - my);
    sxx += (a - mx) * (a - mx);
  }
  return sxx > 0.0 ? sxy / sxx : nan;
}

// ---------------------------------------------------------------------------

void SweepConfig::validate() const {
  std::size_t positive = 0;
  for (std::size_t i = 0; i < nu_list.size(); ++i) {
    const double nu = nu_list[i];
    if (!std::isfinite(nu) || nu < 0.0) throw Error(ErrorKind::config, "viscosities must be finite and >= 0");
    if (nu == 0.0) {
      if (i + 1 != nu_list.size()) throw Error(ErrorKind::config, "nu = 0 may only appear last in nu_list");
      continue;
    }
    if (i > 0 && nu > nu_list[i - 1])
      throw Error(ErrorKind::config, "nu_list must be non-increasing");
    ++positive;
  }
  if (positive < 2)
    throw Error(ErrorKind::config,
                "a sweep needs at least 2 positive viscosities plus the inviscid row");
  if (m < 1) throw Error(ErrorKind::config, "sweep truncation m must be at least 1");
  if (theta0.size() < 1 || !theta0.allFinite())
    throw Error(ErrorKind::config, "sweep initial data must be finite and non-empty");
  SolverConfig probe = solver;
  probe.nu = 0.0;
  probe.validate();
}

SweepReport run_sweep(const EigenBasis& basis, const SweepConfig& cfg, const InteractionTensor& t,
                      const ParallelContext& ctx) {
  cfg.validate();
  if (t.m() != cfg.m) throw Error(ErrorKind::binding, "tensor size does not match the sweep truncation");
  if (t.basis_id() != basis.id()) throw Error(ErrorKind::binding, "tensor was built on another basis");
  const TestFunctionPair tf = cfg.test_functions.value_or(default_test_functions(basis.domain(), cfg.solver.T));
  validate_test_functions(basis.domain(), tf, cfg.solver.T);

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(cfg.m);
  const Index n0 = std::min(cfg.m, cfg.theta0.size());
  x0.head(n0) = cfg.theta0.head(n0);
  const SpectralField theta0 = make_field(basis, x0);

  SweepReport rep;
  rep.config = cfg;
  rep.dt = cfg.solver.dt > 0.0 ? cfg.solver.dt : auto_time_step(t, x0, cfg.solver.T);

  std::vector<double> nus;
  for (double nu : cfg.nu_list)
    if (nu > 0.0) nus.push_back(nu);
  nus.push_back(0.0);
  const std::size_t n = nus.size();
  rep.rows.resize(n);
  std::vector<std::optional<Trajectory>> trajs(n);
  std::vector<std::string> errors(n);
  std::vector<ErrorKind> kinds(n, ErrorKind::numeric);

  parallel_for(ctx, n, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) {
      SolverConfig sc = cfg.solver;
      sc.nu = nus[i];
      sc.dt = rep.dt;
      try {
        trajs[i] = integrate(theta0, sc, t);
        auto& row = rep.rows[i];
        const auto& tr = *trajs[i];
        row.weak_residual = weak_form_residual(basis, tr, tf, TestProjection::unprojected);
        row.ham_drift = hamiltonian_drift(tr);
        row.energy_residual = energy_balance_residual(tr);
        row.neg_norm_sup = time_derivative_negative_norm(tr, t);
        row.diss_vanish = tr.ledger.diss_sm1.back();
        const auto init = initial_data_distance(tr, t);
        row.initial_distance = init.size() > 1 ? init[1] : 0.0;
        row.completed = true;
      } catch (const Error& e) {
        errors[i] = "nu = " + std::to_string(nus[i]) + ": " + e.what();
        kinds[i] = e.kind();
      }
    }
  });

  for (std::size_t i = 0; i < n; ++i) rep.rows[i].nu = nus[i];
  rep.complete = true;
  for (std::size_t i = 0; i < n; ++i)
    if (!rep.rows[i].completed) {
      rep.complete = false;
      if (rep.error.empty()) {
        rep.error = errors[i];
        rep.error_kind = kinds[i];
      }
    }

  const auto& inviscid = trajs.back();
  std::vector<double> nu_v, dist_v, drift_v, diss_v;
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = rep.rows[i];
    row.dist_to_inviscid = trajs[i] && inviscid ? l2_time_distance(*trajs[i], *inviscid) : nan;
    if (i + 1 < n && row.completed) {
      nu_v.push_back(row.nu);
      dist_v.push_back(row.dist_to_inviscid);
      drift_v.push_back(row.ham_drift);
      diss_v.push_back(row.diss_vanish);
      if (inviscid && row.dist_to_inviscid > 0.0)
        rep.weak_residual_constant =
            std::max(rep.weak_residual_constant,
                     std::abs(row.weak_residual - rep.rows.back().weak_residual) / row.dist_to_inviscid);
    }
  }
  rep.distance_slope = log_log_slope(nu_v, dist_v);
  rep.drift_slope = log_log_slope(nu_v, drift_v);
  rep.diss_vanish_slope = log_log_slope(nu_v, diss_v);
  return rep;
}

std::vector<TruncationRow> truncation_sweep(const EigenBasis& basis, const std::vector<Index>& m_list,
                                            const Eigen::VectorXd& theta0, const SolverConfig& cfg,
                                            const ParallelContext& ctx) {
  std::vector<TruncationRow> rows(m_list.size());
  parallel_for(ctx, m_list.size(), [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) {
      const Index m = m_list[i];
      const auto t = build_tensor(basis, m);
      Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
      const Index n0 = std::min(m, theta0.size());
      x.head(n0) = theta0.head(n0);
      const auto tr = integrate(make_field(basis, x), cfg, t);
      rows[i] = {m, tr.ledger.E.back(), hamiltonian_drift(tr), time_derivative_negative_norm(tr, t)};
    }
  });
  return rows;
}

}  // namespace sqg
