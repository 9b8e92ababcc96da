#include <doctest.h>

#include <cmath>
#include <random>

#include "sqg/basis.hpp"
#include "sqg/error.hpp"
#include "sqg/solver.hpp"
#include "sqg/spectral.hpp"
#include "sqg/tensor.hpp"

using namespace sqg;

namespace {

const EigenBasis& basis16() {
  static const EigenBasis b = build_square_basis(16);
  return b;
}

const InteractionTensor& tensor16() {
  static const InteractionTensor t = build_tensor(basis16(), 16);
  return t;
}

Eigen::VectorXd random_theta(Index m, unsigned seed, double amp = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Eigen::VectorXd c(m);
  for (Index j = 0; j < m; ++j) c(j) = amp * n(rng) / (1.0 + static_cast<double>(j));
  return c;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no sqg::Error thrown");
  return ErrorKind::io;
}

SolverConfig config(double nu, double s, double dt, double T = 1.0) {
  SolverConfig c;
  c.nu = nu;
  c.s = s;
  c.dt = dt;
  c.T = T;
  return c;
}

}  // namespace

TEST_CASE("right-hand side of a single mode") {
  const auto& b = basis16();
  const auto& t = tensor16();
  const auto w1 = unit_field(b, 0, 16);
  CHECK(rhs(w1, 0.0, 1.0, t).coefficients.cwiseAbs().maxCoeff() == 0.0);
  for (double s : {0.5, 1.0, 2.0}) {
    const auto r = rhs(w1, 0.3, s, t);
    CHECK(r.coefficients(0) == doctest::Approx(-0.3 * std::pow(2.0, 0.5 * s)).epsilon(1e-15));
    CHECK(r.coefficients.tail(15).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("nonlinear term is orthogonal to theta") {
  const auto& b = basis16();
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const auto th = make_field(b, random_theta(16, seed, 3.0));
    const auto r = rhs(th, 0.0, 1.0, tensor16());
    CHECK(std::abs(r.coefficients.dot(th.coefficients)) <= 1e-12 * std::pow(th.coefficients.norm(), 3));
  }
}

TEST_CASE("binding is checked") {
  const auto other = build_square_basis(17);
  CHECK(kind_of([&] { rhs(unit_field(other, 0, 16), 0.0, 1.0, tensor16()); }) == ErrorKind::binding);
  CHECK(kind_of([&] { rhs(unit_field(basis16(), 0, 15), 0.0, 1.0, tensor16()); }) == ErrorKind::binding);
}

TEST_CASE("integrating factor is exact on the linear flow") {
  const auto& b = basis16();
  // Same basis, interaction forced to zero.
  const InteractionTensor lin(16, {}, b.id(), b.descriptor_hash(), b.eigenvalues().head(16), {});
  const Eigen::VectorXd th = random_theta(16, 3);
  for (double s : {0.5, 1.0, 2.0}) {
    const auto cfg = config(0.7, s, 0.05);
    TrajectoryState st{0.0, make_field(b, th)};
    for (int n = 1; n <= 20; ++n) {
      st = step(st, 0.05, cfg, lin);
      const Eigen::VectorXd exact =
          (-0.7 * b.eigenvalue_power(0.5 * s).head(16).array() * st.t).exp().matrix().cwiseProduct(th);
      CHECK((st.theta.coefficients - exact).cwiseAbs().maxCoeff() <= 1e-14 * th.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("zero step is the identity") {
  const auto th = make_field(basis16(), random_theta(16, 8));
  for (auto integ : {Integrator::if_rk4, Integrator::rk4}) {
    auto cfg = config(0.1, 1.0, 1e-3);
    cfg.integrator = integ;
    const auto st = step({0.25, th}, 0.0, cfg, tensor16());
    CHECK(st.t == 0.25);
    CHECK(st.theta.coefficients == th.coefficients);
  }
}

TEST_CASE("fourth-order convergence under step halving") {
  const auto& b = basis16();
  Eigen::VectorXd th = Eigen::VectorXd::Zero(16);
  th(1) = 4.0;
  th(2) = 3.0;
  th(4) = 1.0;
  const auto theta0 = make_field(b, th);
  for (auto integ : {Integrator::if_rk4, Integrator::rk4}) {
    auto cfg = config(0.05, 1.0, 1.0 / 64);
    cfg.integrator = integ;
    auto final_state = [&](double dt) {
      cfg.dt = dt;
      return integrate(theta0, cfg, tensor16()).snapshots.back().theta.coefficients;
    };
    const Eigen::VectorXd ref = final_state(1.0 / 4096);
    const double e1 = (final_state(1.0 / 32) - ref).norm();
    const double e2 = (final_state(1.0 / 64) - ref).norm();
    CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.25));
  }
}

TEST_CASE("trajectories of the inviscid system") {
  const auto& b = basis16();
  SUBCASE("a single mode is stationary") {
    const auto traj = integrate(unit_field(b, 0, 16), config(0.0, 1.0, 1e-2), tensor16());
    CHECK(traj.snapshots.size() == 101);
    for (const auto& s : traj.snapshots) CHECK(s.theta.coefficients == traj.snapshots.front().theta.coefficients);
  }
  SUBCASE("energy and Hamiltonian are conserved") {
    const auto traj = integrate(make_field(b, random_theta(16, 12)), config(0.0, 1.0, 1e-3), tensor16());
    const auto& L = traj.ledger;
    CHECK(std::abs(L.E.back() - L.E.front()) / L.E.front() <= 1e-8);
    CHECK(std::abs(L.H.back() - L.H.front()) / L.H.front() <= 1e-8);
    CHECK(energy_balance_residual(traj) <= 1e-8);
    CHECK(hamiltonian_balance_residual(traj) <= 1e-8);
    for (double d : L.diss_s) CHECK(d == 0.0);
    // The state actually moves.
    CHECK((traj.snapshots.back().theta.coefficients - traj.snapshots.front().theta.coefficients).norm() > 1e-3);
  }
}

TEST_CASE("single-mode decay matches the exponential") {
  const auto& b = basis16();
  for (double s : {0.5, 1.0, 2.0}) {
    const auto traj = integrate(unit_field(b, 0, 16), config(0.1, s, 1e-3), tensor16());
    double worst = 0.0;
    for (const auto& st : traj.snapshots) {
      Eigen::VectorXd exact = Eigen::VectorXd::Zero(16);
      exact(0) = std::exp(-0.1 * std::pow(2.0, 0.5 * s) * st.t);
      worst = std::max(worst, (st.theta.coefficients - exact).norm());
    }
    CHECK(worst <= 1e-8);
    CHECK(energy_balance_residual(traj) <= 1e-6);
    CHECK(hamiltonian_balance_residual(traj) <= 1e-6);
  }
}

TEST_CASE("balance residuals are second order in dt") {
  const auto th = make_field(basis16(), random_theta(16, 2));
  const auto coarse = integrate(th, config(0.1, 1.0, 2e-3), tensor16());
  const auto fine = integrate(th, config(0.1, 1.0, 1e-3), tensor16());
  CHECK(energy_balance_residual(coarse) / energy_balance_residual(fine) == doctest::Approx(4.0).epsilon(0.1));
  CHECK(hamiltonian_balance_residual(coarse) / hamiltonian_balance_residual(fine) ==
        doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("snapshots and ledger bookkeeping") {
  auto cfg = config(0.1, 1.0, 0.01, 0.5);
  cfg.snapshot_stride = 7;
  const auto traj = integrate(make_field(basis16(), random_theta(16, 1)), cfg, tensor16());
  CHECK(traj.ledger.t.size() == 51);
  CHECK(traj.ledger.t.back() == 0.5);
  // 0, 7, 14, ..., 49, and the final step.
  CHECK(traj.snapshots.size() == 9);
  CHECK(traj.snapshots.back().t == 0.5);
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i)
    CHECK(traj.ledger.t[traj.snapshot_rows[i]] == traj.snapshots[i].t);
  CHECK(traj.tensor_checksum == tensor16().checksum());
  CHECK(traj.config.dt == 0.01);
}

TEST_CASE("short initial data is padded") {
  const auto traj = integrate(unit_field(basis16(), 0, 4), config(0.0, 1.0, 0.1), tensor16());
  CHECK(traj.snapshots.front().theta.size() == 16);
}

TEST_CASE("automatic time step divides T") {
  const Eigen::VectorXd th = random_theta(16, 4, 50.0);
  const double dt = auto_time_step(tensor16(), th, 0.7);
  CHECK(dt <= 1e-3);
  const double n = 0.7 / dt;
  CHECK(std::abs(n - std::round(n)) < 1e-9);
  auto cfg = config(0.0, 1.0, 0.0, 0.7);
  const auto traj = integrate(make_field(basis16(), th), cfg, tensor16());
  CHECK(traj.config.dt == doctest::Approx(dt));
  CHECK(auto_time_step(tensor16(), Eigen::VectorXd::Zero(16), 1.0) == 1e-3);
}

TEST_CASE("configuration errors") {
  CHECK(kind_of([] { config(-1.0, 1.0, 1e-3).validate(); }) == ErrorKind::config);
  CHECK(kind_of([] { config(0.1, 0.0, 1e-3).validate(); }) == ErrorKind::config);
  CHECK(kind_of([] { config(0.1, 2.5, 1e-3).validate(); }) == ErrorKind::config);
  CHECK(kind_of([] { config(0.1, 1.0, -1e-3).validate(); }) == ErrorKind::config);
  CHECK(kind_of([] { config(0.1, 1.0, 1e-3, 0.0).validate(); }) == ErrorKind::config);
  auto bad_stride = config(0.1, 1.0, 1e-3);
  bad_stride.snapshot_stride = 0;
  CHECK(kind_of([&] { bad_stride.validate(); }) == ErrorKind::config);
  CHECK(integrator_from_string("rk4") == Integrator::rk4);
  CHECK(kind_of([] { integrator_from_string("euler"); }) == ErrorKind::config);
  const auto th = unit_field(basis16(), 0, 16);
  CHECK(kind_of([&] { integrate(th, config(0.1, 1.0, 0.3), tensor16()); }) == ErrorKind::config);
}

TEST_CASE("instability is reported as a numeric error") {
  const auto th = make_field(basis16(), random_theta(16, 6, 200.0));
  auto cfg = config(0.0, 1.0, 0.25);
  cfg.integrator = Integrator::rk4;
  CHECK(kind_of([&] { integrate(th, cfg, tensor16()); }) == ErrorKind::numeric);
  try {
    integrate(th, cfg, tensor16());
  } catch (const BlowUpError& e) {
    CHECK(e.last_good().theta.coefficients.allFinite());
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numeric);
  }
}

TEST_CASE("viscous energy is nonincreasing step to step") {
  const auto traj = integrate(make_field(basis16(), random_theta(16, 14, 3.0)), config(0.05, 1.0, 1e-3), tensor16());
  const auto& E = traj.ledger.E;
  for (std::size_t i = 1; i < E.size(); ++i) CHECK(E[i] < E[i - 1]);
}

TEST_CASE("larger truncations agree on the leading coordinates") {
  const auto big = build_square_basis(40);
  const auto t16 = build_tensor(big, 16);
  const auto t40 = build_tensor(big, 40);
  const Eigen::VectorXd th = random_theta(16, 15);
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(40);
  padded.head(16) = th;
  const auto r16 = rhs(make_field(big, th), 0.1, 1.0, t16);
  const auto r40 = rhs(make_field(big, padded), 0.1, 1.0, t40);
  CHECK((r40.coefficients.head(16) - r16.coefficients).cwiseAbs().maxCoeff() <= 1e-14);
  // Energy leaks into the new modes only through triples reaching past m.
  CHECK(r40.coefficients.tail(24).norm() > 0.0);
}
