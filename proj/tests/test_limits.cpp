#include <doctest.h>

#include <cmath>
#include <random>

#include "sqg/basis.hpp"
#include "sqg/error.hpp"
#include "sqg/limits.hpp"
#include "sqg/solver.hpp"
#include "sqg/spectral.hpp"
#include "sqg/tensor.hpp"

using namespace sqg;

namespace {

const EigenBasis& basis() {
  static const EigenBasis b = build_square_basis(16);
  return b;
}

const InteractionTensor& tensor() {
  static const InteractionTensor t = build_tensor(basis(), 16);
  return t;
}

Eigen::VectorXd random_theta(unsigned seed, double amp = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Eigen::VectorXd c(16);
  for (Index j = 0; j < 16; ++j) c(j) = amp * n(rng) / (1.0 + static_cast<double>(j));
  return c;
}

Trajectory run(const Eigen::VectorXd& th, double nu, double s = 1.0, double dt = 1e-2, int stride = 5) {
  SolverConfig c;
  c.nu = nu;
  c.s = s;
  c.dt = dt;
  c.T = 1.0;
  c.snapshot_stride = stride;
  return integrate(make_field(basis(), th), c, tensor());
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

}  // namespace

TEST_CASE("test functions") {
  const auto tf = default_test_functions(basis().domain(), 2.0);
  CHECK(tf.time.center == 1.0);
  CHECK(tf.time.radius == doctest::Approx(0.8));
  CHECK(tf.space.radius == doctest::Approx(0.3 * basis().domain().inradius()));
  CHECK_NOTHROW(validate_test_functions(basis().domain(), tf, 2.0));

  auto off = tf;
  off.space.center = Eigen::Vector2d(0.2, 0.2);
  CHECK(kind_of([&] { validate_test_functions(basis().domain(), off, 2.0); }) == ErrorKind::config);
  auto late = tf;
  late.time.center = 1.9;
  CHECK(kind_of([&] { validate_test_functions(basis().domain(), late, 2.0); }) == ErrorKind::config);

  // Analytic derivatives against central differences.
  const double h = 1e-6;
  for (double t : {0.4, 0.9, 1.3, 1.75}) {
    const double fd = (tf.time.value(t + h) - tf.time.value(t - h)) / (2 * h);
    CHECK(tf.time.derivative(t) == doctest::Approx(fd).epsilon(1e-6));
  }
  CHECK(tf.time.value(0.1) == 0.0);
  CHECK(tf.time.derivative(1.95) == 0.0);

  Points x(2, 2);
  x << 1.4, 1.7, 1.9, 1.2;
  const auto g = tf.space.gradient(x);
  Points xp = x, xm = x;
  xp.col(0).array() += h;
  xm.col(0).array() -= h;
  const Eigen::VectorXd fdx = (tf.space.value(xp) - tf.space.value(xm)) / (2 * h);
  CHECK((g.col(0) - fdx).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("L2-in-time distance") {
  const auto a = run(random_theta(1), 0.0);
  const auto b = run(random_theta(2), 0.0);
  const auto c = run(random_theta(3), 0.05);
  CHECK(l2_time_distance(a, a) == 0.0);

  // Against the zero trajectory the distance is the time trapezoid of 2E.
  const auto zero = run(Eigen::VectorXd::Zero(16), 0.0);
  double want = 0.0;
  for (std::size_t i = 0; i + 1 < a.snapshots.size(); ++i) {
    const double dt = a.snapshots[i + 1].t - a.snapshots[i].t;
    want += 0.5 * dt * (2 * a.ledger.E[a.snapshot_rows[i]] + 2 * a.ledger.E[a.snapshot_rows[i + 1]]);
  }
  CHECK(l2_time_distance(a, zero) == doctest::Approx(std::sqrt(want)).epsilon(1e-12));

  CHECK(l2_time_distance(a, c) <= l2_time_distance(a, b) + l2_time_distance(b, c));
  CHECK(l2_time_distance(a, b) == doctest::Approx(l2_time_distance(b, a)).epsilon(1e-15));

  const auto coarse = run(random_theta(1), 0.0, 1.0, 1e-2, 10);
  CHECK(kind_of([&] { l2_time_distance(a, coarse); }) == ErrorKind::alignment);
}

TEST_CASE("weak-form residual") {
  const auto tf = default_test_functions(basis().domain(), 1.0);
  const auto zero = run(Eigen::VectorXd::Zero(16), 0.0);
  CHECK(weak_form_residual(basis(), zero, tf) == 0.0);

  const auto traj = run(random_theta(4, 3.0), 0.0, 1.0, 1e-3, 1);
  auto outside = tf;
  outside.time.center = 5.0;
  CHECK(weak_form_residual(basis(), traj, outside) == 0.0);

  CHECK(weak_form_residual(basis(), traj, tf, TestProjection::projected) <= 1e-7);
  const double unproj = weak_form_residual(basis(), traj, tf, TestProjection::unprojected);
  CHECK(unproj > 1e-7);

  const auto visc = run(random_theta(4, 3.0), 0.1, 1.0, 1e-3, 1);
  CHECK(weak_form_residual(basis(), visc, tf, TestProjection::projected) <= 1e-7);
}

TEST_CASE("Hamiltonian drift") {
  CHECK(hamiltonian_drift(run(random_theta(5), 0.0, 1.0, 1e-3)) <= 1e-8);
  // s = 1: H(t) + nu int ||theta||^2 = H(0), so the drift is the final ledger value.
  const auto t1 = run(random_theta(5), 0.02, 1.0, 1e-3);
  const double pred = t1.ledger.diss_sm1.back() / t1.ledger.H.front();
  CHECK(hamiltonian_drift(t1) == doctest::Approx(pred).epsilon(1e-6));
  const auto t2 = run(random_theta(5), 0.01, 1.0, 1e-3);
  CHECK(hamiltonian_drift(t1) / hamiltonian_drift(t2) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("time-derivative norm in D(Lambda^-6)") {
  Eigen::VectorXd w1 = Eigen::VectorXd::Zero(16);
  w1(0) = 1.5;
  CHECK(time_derivative_negative_norm(run(w1, 0.0), tensor()) == 0.0);
  for (double s : {1.0, 2.0}) {
    const double want = 0.1 * std::pow(2.0, 0.5 * s) * std::pow(2.0, -3.0) * 1.5;
    CHECK(time_derivative_negative_norm(run(w1, 0.1, s), tensor()) == doctest::Approx(want).epsilon(1e-12));
  }
  const auto d = initial_data_distance(run(random_theta(6), 0.0), tensor());
  CHECK(d.front() == 0.0);
  CHECK(d.back() > 0.0);
}

TEST_CASE("log-log slope") {
  const std::vector<double> x{1e-1, 1e-2, 1e-3, 1e-4};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 1.5));
  CHECK(log_log_slope(x, y) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(std::isnan(log_log_slope({1.0}, {2.0})));
  CHECK(std::isnan(log_log_slope({1.0, 0.0}, {2.0, 3.0})));
}

TEST_CASE("sweep configuration") {
  SweepConfig c;
  c.theta0 = random_theta(7);
  c.m = 16;
  c.solver.T = 0.5;
  c.solver.dt = 1e-2;
  c.nu_list = {0.1};
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::config);
  c.nu_list = {0.01, 0.1};
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::config);
  c.nu_list = {0.1, 0.0, 0.01};
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::config);
  c.nu_list = {0.1, -0.01};
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::config);
  c.nu_list = {0.1, 0.01, 0.0};
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("sweep rows") {
  SweepConfig c;
  c.theta0 = random_theta(8, 2.0);
  c.m = 16;
  c.solver.T = 0.5;
  c.solver.dt = 1e-3;
  c.solver.snapshot_stride = 10;

  SUBCASE("duplicated viscosities give identical rows") {
    c.nu_list = {0.1, 0.1};
    const auto r = run_sweep(basis(), c, tensor(), ParallelContext{2});
    REQUIRE(r.rows.size() == 3);
    CHECK(r.complete);
    CHECK(r.rows[0].dist_to_inviscid == r.rows[1].dist_to_inviscid);
    CHECK(r.rows[0].ham_drift == r.rows[1].ham_drift);
    CHECK(r.rows[2].nu == 0.0);
    CHECK(r.rows[2].dist_to_inviscid == 0.0);
    CHECK(r.rows[2].ham_drift <= 1e-8);
  }
  SUBCASE("distance decreases with nu") {
    c.nu_list = {1e-1, 1e-2, 1e-3};
    const auto r = run_sweep(basis(), c, tensor());
    REQUIRE(r.rows.size() == 4);
    CHECK(r.rows[0].dist_to_inviscid > r.rows[1].dist_to_inviscid);
    CHECK(r.rows[1].dist_to_inviscid > r.rows[2].dist_to_inviscid);
    CHECK(r.distance_slope == doctest::Approx(1.0).epsilon(0.1));
    CHECK(r.drift_slope == doctest::Approx(1.0).epsilon(0.1));
    CHECK(r.diss_vanish_slope >= 0.9);
    CHECK(r.rows[3].diss_vanish == 0.0);
    // Initial data are attained: the distance to theta0 shrinks with t.
    for (const auto& row : r.rows) CHECK(row.initial_distance < 0.1 * row.dist_to_inviscid + 1e-2);
    for (const auto& row : r.rows) CHECK(row.completed);
    CHECK(r.dt == 1e-3);
  }
  SUBCASE("a failing trajectory leaves a partial report") {
    c.theta0 = random_theta(8, 400.0);
    c.solver.dt = 0.25;
    c.solver.integrator = Integrator::rk4;
    c.nu_list = {0.1, 0.01};
    const auto r = run_sweep(basis(), c, tensor());
    CHECK_FALSE(r.complete);
    CHECK_FALSE(r.error.empty());
    CHECK(r.error_kind == ErrorKind::numeric);
  }
  SUBCASE("tensor must match the truncation") {
    c.nu_list = {0.1, 0.01};
    c.m = 8;
    CHECK(kind_of([&] { run_sweep(basis(), c, tensor()); }) == ErrorKind::binding);
  }
}

TEST_CASE("truncation sweep") {
  SolverConfig c;
  c.nu = 0.01;
  c.dt = 1e-2;
  c.T = 0.5;
  const auto big = build_square_basis(32);
  Eigen::VectorXd th = Eigen::VectorXd::Zero(8);
  for (Index j = 0; j < 8; ++j) th(j) = std::cos(static_cast<double>(j)) / std::sqrt(big.eigenvalues()(j));
  const auto rows = truncation_sweep(big, {8, 16, 32}, th, c);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].m == 8);
  CHECK(rows[2].m == 32);
  for (const auto& r : rows) {
    CHECK(r.energy_final > 0.0);
    CHECK(r.neg_norm_sup > 0.0);
  }
  CHECK(rows[2].neg_norm_sup / rows[0].neg_norm_sup == doctest::Approx(1.0).epsilon(0.5));
}
