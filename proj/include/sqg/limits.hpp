#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sqg/basis.hpp"
#include "sqg/parallel.hpp"
#include "sqg/solver.hpp"
#include "sqg/spectral.hpp"
#include "sqg/tensor.hpp"

namespace sqg {

/// amplitude * exp(-R^2 / (R^2 - |x - center|^2)) inside the ball, 0 outside.
struct SpaceBump {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 1.0;
  double amplitude = 1.0;

  Eigen::VectorXd value(const Points& x) const;
  Gradients gradient(const Points& x) const;
};

/// exp(-r^2 / (r^2 - (t - center)^2)) on (center - r, center + r).
struct TimeBump {
  double center = 0.5;
  double radius = 0.4;

  double value(double t) const;
  double derivative(double t) const;
};

struct TestFunctionPair {
  SpaceBump space;
  TimeBump time;
};

/// Space bump at the domain centre with radius 0.3 x inradius; time bump
/// centred at T/2 with radius 0.4 T.
TestFunctionPair default_test_functions(const DomainSpec& domain, double T);

/// Throws Error(config) unless the ball lies strictly inside the domain and
/// the time support strictly inside (0, T).
void validate_test_functions(const DomainSpec& domain, const TestFunctionPair& tf, double T);

/// (sum_t w_t ||theta_a(t) - theta_b(t)||^2)^{1/2}, trapezoid weights over the
/// snapshot times. Throws Error(alignment) unless times and m agree.
double l2_time_distance(const Trajectory& a, const Trajectory& b);

enum class TestProjection { projected, unprojected };

/// |int_0^T [ (theta, phi) phi_t' + (u theta, grad phi) phi_t
///            - nu (Lambda^{s/2} theta, Lambda^{s/2} phi) phi_t ] dt|
/// with trapezoid weights over the snapshots. The transport term is a
/// pointwise grid quadrature; projected uses grad(P_m phi) in place of
/// grad phi. nu and s are taken from the trajectory.
double weak_form_residual(const EigenBasis& basis, const Trajectory& traj, const TestFunctionPair& tf,
                          TestProjection projection = TestProjection::projected);

/// max_t |H(t) - H(0)| / H(0); absolute when H(0) = 0.
double hamiltonian_drift(const Trajectory& traj);

/// sup over snapshots of ||rhs(theta(t))||_{D(Lambda^{-6})}.
double time_derivative_negative_norm(const Trajectory& traj, const InteractionTensor& t);

/// ||theta(t) - theta(0)||_{D(Lambda^{-1/4})} at every snapshot.
std::vector<double> initial_data_distance(const Trajectory& traj, const InteractionTensor& t);

/// Least-squares slope of log y against log x over pairs with x, y > 0.
/// NaN with fewer than two usable pairs.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

struct SweepConfig {
  /// Positive viscosities, non-increasing; a trailing 0 is optional and
  /// the inviscid row is always added.
  std::vector<double> nu_list;
  Eigen::VectorXd theta0;
  Index m = 0;
  /// nu is overridden per row; dt = 0 picks one step for all rows from the
  /// inviscid heuristic.
  SolverConfig solver;
  std::optional<TestFunctionPair> test_functions;

  void validate() const;
};

struct SweepRow {
  double nu = 0.0;
  double dist_to_inviscid = 0.0;
  double weak_residual = 0.0;
  double ham_drift = 0.0;
  double energy_residual = 0.0;
  double neg_norm_sup = 0.0;
  /// diss_sm1(T); the ledger already carries the factor nu.
  double diss_vanish = 0.0;
  /// ||theta(t_1) - theta(0)||_{D(Lambda^{-1/4})} at the first snapshot after 0.
  double initial_distance = 0.0;
  bool completed = false;
};

struct SweepReport {
  SweepConfig config;
  double dt = 0.0;
  std::vector<SweepRow> rows;  // input order, inviscid row last
  bool complete = false;
  std::string error;           // set when a trajectory failed
  ErrorKind error_kind = ErrorKind::numeric;
  double distance_slope = 0.0;  // log-log over the viscous rows
  double drift_slope = 0.0;
  double diss_vanish_slope = 0.0;
  /// max_n |weak_residual(nu_n) - weak_residual(0)| / dist_to_inviscid(nu_n)
  double weak_residual_constant = 0.0;
};

/// Integrates every nu (and nu = 0) from the same P_m theta0 with one shared
/// dt, in parallel over rows. A failing trajectory leaves its row incomplete
/// and the report marked incomplete rather than throwing.
SweepReport run_sweep(const EigenBasis& basis, const SweepConfig& cfg, const InteractionTensor& t,
                      const ParallelContext& ctx = {});

struct TruncationRow {
  Index m = 0;
  double energy_final = 0.0;
  double ham_drift = 0.0;
  double neg_norm_sup = 0.0;
};

/// Same theta0 and solver settings at each m; closed-form or quadrature
/// tensors built per m.
std::vector<TruncationRow> truncation_sweep(const EigenBasis& basis, const std::vector<Index>& m_list,
                                            const Eigen::VectorXd& theta0, const SolverConfig& cfg,
                                            const ParallelContext& ctx = {});

}  // namespace sqg
