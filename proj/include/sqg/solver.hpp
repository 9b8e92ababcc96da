#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sqg/error.hpp"
#include "sqg/spectral.hpp"
#include "sqg/tensor.hpp"

namespace sqg {

enum class Integrator { if_rk4, rk4 };

std::string to_string(Integrator i);
Integrator integrator_from_string(const std::string& s);

struct SolverConfig {
  double nu = 0.0;
  double s = 1.0;
  /// 0 selects auto_time_step().
  double dt = 0.0;
  double T = 1.0;
  int snapshot_stride = 1;
  Integrator integrator = Integrator::if_rk4;
  /// Abort when E(t) > (1 + tol) E(0) while nu >= 0.
  double energy_growth_tol = 1e-6;

  /// Throws Error(config) on nu < 0, s outside (0, 2], dt > T, T <= 0 or stride < 1.
  void validate() const;
};

struct TrajectoryState {
  double t = 0.0;
  SpectralField theta;
};

/// Sampled after every accepted step (and at t = 0).
struct BalanceLedger {
  std::vector<double> t;
  std::vector<double> E;         // 1/2 ||theta||^2
  std::vector<double> H;         // 1/2 ||theta||^2_{D(Lambda^{-1/2})}
  std::vector<double> diss_s;    // nu int_0^t ||Lambda^{s/2} theta||^2
  std::vector<double> diss_sm1;  // nu int_0^t ||Lambda^{(s-1)/2} theta||^2
};

struct Trajectory {
  std::vector<TrajectoryState> snapshots;
  /// Ledger row of each snapshot.
  std::vector<std::size_t> snapshot_rows;
  BalanceLedger ledger;
  SolverConfig config;  // dt is the step actually used
  TensorBuildMeta tensor_meta;
  std::uint64_t tensor_checksum = 0;
};

/// Numeric error carrying the last finite state.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, TrajectoryState last_good)
      : Error(ErrorKind::numeric, what), last_good_(std::move(last_good)) {}
  const TrajectoryState& last_good() const { return last_good_; }

 private:
  TrajectoryState last_good_;
};

/// -sum_{j,k} gamma_jkl theta_j theta_k - nu lambda_l^{s/2} theta_l
SpectralField rhs(const SpectralField& theta, double nu, double s, const InteractionTensor& t);

/// One step of length dt; dt = 0 returns the state unchanged.
TrajectoryState step(const TrajectoryState& state, double dt, const SolverConfig& cfg,
                     const InteractionTensor& t);

/// min(1e-3, 0.5 / (m max|gamma| ||theta0||)), shrunk so that T is a whole
/// number of steps.
double auto_time_step(const InteractionTensor& t, const Eigen::VectorXd& theta0, double T);

/// Integrates P_m theta0 to T. Throws BlowUpError on non-finite state or
/// ||theta|| > 1e6 ||theta0||, Error(numeric) on energy growth, and
/// Error(config) when T is not a whole number of steps of cfg.dt.
Trajectory integrate(const SpectralField& theta0, const SolverConfig& cfg, const InteractionTensor& t);

/// max_t |E(t) + diss_s(t) - E(0)| / E(0) over every ledger sample.
double energy_balance_residual(const Trajectory& traj);
/// max_t |H(t) + diss_sm1(t) - H(0)| / H(0) over every ledger sample.
double hamiltonian_balance_residual(const Trajectory& traj);

}  // namespace sqg
