#include "sqg/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "sqg/basis.hpp"
#include "sqg/commutators.hpp"
#include "sqg/error.hpp"
#include "sqg/io.hpp"
#include "sqg/limits.hpp"
#include "sqg/solver.hpp"
#include "sqg/spectral.hpp"
#include "sqg/tensor.hpp"

namespace sqg {

namespace {

using nlohmann::json;

std::string sci(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

std::string list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + sci(v[i]);
  return out + "]";
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

Index mode_index(const EigenBasis& b, std::array<int, 2> mi) {
  for (const auto& m : b.modes())
    if (m.multi_index == mi) return m.ordinal - 1;
  throw Error(ErrorKind::config, "mode not in basis");
}

void write_artifact(const VerifyOptions& opts, const std::string& name, const std::string& text) {
  if (opts.artifact_dir) write_text(*opts.artifact_dir / name, text);
}

// Smooth 8-mode initial datum shared by the limit criteria.
Eigen::VectorXd smooth_theta0(const EigenBasis& b) {
  Eigen::VectorXd th(8);
  for (Index j = 0; j < 8; ++j) th(j) = 2.0 * std::cos(1.7 * static_cast<double>(j) + 0.3) / std::sqrt(b.eigenvalues()(j));
  return th;
}

struct Outcome {
  bool passed;
  std::string detail;
};

// 1 ---------------------------------------------------------------------------
Outcome tensor_antisymmetry(const VerifyOptions& opts) {
  const auto b = build_square_basis(32);
  const auto dense = quadrature_tensor_dense(b, 32, opts.ctx);
  const auto rep = check_antisymmetries(dense, b.eigenvalues());
  TensorBuildConfig cfg;
  cfg.method = TensorMethod::quadrature;
  cfg.parallel_width = opts.ctx.width;
  const auto stored = check_antisymmetries(build_tensor(b, 32, cfg));
  const double tol = 1e-12;
  const bool ok = rep.max_defect_kl <= tol && rep.max_defect_weighted <= tol &&
                  stored.max_defect_weighted <= tol && stored.max_defect_kl <= tol;
  return {ok, "exhaustive " + std::to_string(rep.count_checked) + " triples at order " +
                  std::to_string(b.domain().quadrature_order) + ": kl " + sci(rep.max_defect_kl) +
                  ", weighted " + sci(rep.max_defect_weighted) + "; stored quadrature tensor weighted " +
                  sci(stored.max_defect_weighted) + " (tol 1e-12)"};
}

// 2 ---------------------------------------------------------------------------
Outcome oracle_equivalence(const VerifyOptions& opts) {
  const auto b = build_square_basis(16);
  const Index m = 16;
  const auto dense = quadrature_tensor_dense(b, m, opts.ctx);
  const auto& modes = b.modes();
  double worst = 0.0;
  for (Index j = 0; j < m; ++j)
    for (Index k = 0; k < m; ++k)
      for (Index l = 0; l < m; ++l)
        worst = std::max(worst, std::abs(dense(j, k, l) - closed_form_square_entry(modes[j].multi_index,
                                                                                   modes[k].multi_index,
                                                                                   modes[l].multi_index)));
  const double expected = 3.0 / (2.0 * std::numbers::sqrt2 * std::numbers::pi);
  const double entry = dense(mode_index(b, {1, 1}), mode_index(b, {2, 1}), mode_index(b, {1, 2}));
  const double entry_cf = closed_form_square_entry({1, 1}, {2, 1}, {1, 2});
  const double entry_err = std::max(std::abs(entry - expected), std::abs(entry_cf - expected));
  return {worst <= 1e-10 && entry_err <= 1e-10,
          "max |quadrature - closed form| " + sci(worst) + " over " + std::to_string(m * m * m) +
              " triples (tol 1e-10); gamma((1,1),(2,1),(1,2)) error " + sci(entry_err)};
}

// 3 ---------------------------------------------------------------------------
Outcome inviscid_conservation(const VerifyOptions& opts) {
  const auto b = build_square_basis(64);
  const auto t = build_tensor(b, 64, {.parallel_width = opts.ctx.width});
  const SpectralField th0 = make_field(b, 10.0 * random_field(b, 64, 2024));
  SolverConfig cfg;
  cfg.nu = 0.0;
  cfg.T = 1.0;
  Eigen::VectorXd finals[3];
  double drift_e = 0.0, drift_h = 0.0;
  const double dts[3] = {1e-3, 5e-4, 2.5e-4};
  for (int i = 0; i < 3; ++i) {
    cfg.dt = dts[i];
    const auto traj = integrate(th0, cfg, t);
    finals[i] = traj.snapshots.back().theta.coefficients;
    if (i == 0) {
      drift_e = energy_balance_residual(traj);
      drift_h = hamiltonian_drift(traj);
      const json c = {{"criterion", 3}, {"m", 64}, {"seed", 2024}, {"amplitude", 10.0}, {"solver", to_json(traj.config)}};
      const ArtifactStamp stamp{config_hash(c), t.checksum()};
      write_artifact(opts, "inviscid_trajectory.csv", trajectory_csv(b, traj, stamp));
      write_artifact(opts, "inviscid_trajectory.json", trajectory_json(b, traj, c, stamp).dump(2));
    }
  }
  const double ratio = (finals[0] - finals[1]).norm() / (finals[1] - finals[2]).norm();
  return {drift_e <= 1e-8 && drift_h <= 1e-8 && ratio >= 12.0 && ratio <= 20.0,
          "relative drift E " + sci(drift_e) + ", H " + sci(drift_h) + " (tol 1e-8); step-halving ratio " +
              sci(ratio) + " (want [12, 20])"};
}

// 4 ---------------------------------------------------------------------------
Outcome viscous_balances(const VerifyOptions& opts) {
  const auto b = build_square_basis(32);
  const auto t = build_tensor(b, 32, {.parallel_width = opts.ctx.width});
  const SpectralField th0 = make_field(b, random_field(b, 32, 7));
  bool ok = true;
  std::string detail;
  for (double s : {0.5, 1.0, 2.0}) {
    SolverConfig cfg;
    cfg.nu = 0.1;
    cfg.s = s;
    cfg.T = 1.0;
    double e[2], h[2];
    for (int i = 0; i < 2; ++i) {
      cfg.dt = i == 0 ? 1e-3 : 5e-4;
      const auto traj = integrate(th0, cfg, t);
      e[i] = energy_balance_residual(traj);
      h[i] = hamiltonian_balance_residual(traj);
    }
    const double re = e[0] / e[1], rh = h[0] / h[1];
    const bool pass = e[0] <= 1e-5 && h[0] <= 1e-5 && re >= 3.5 && re <= 4.5 && rh >= 3.5 && rh <= 4.5;
    ok = ok && pass;
    detail += "s=" + format_double(s) + ": E " + sci(e[0]) + " (x" + sci(re) + "), H " + sci(h[0]) + " (x" +
              sci(rh) + "); ";
  }
  return {ok, detail + "tol 1e-5, halving ratio in [3.5, 4.5]"};
}

// 5 ---------------------------------------------------------------------------
Outcome single_mode_decay(const VerifyOptions& opts) {
  const auto b = build_square_basis(16);
  const auto t = build_tensor(b, 16, {.parallel_width = opts.ctx.width});
  const SpectralField th0 = unit_field(b, 0, 16);
  double worst = 0.0;
  for (double s : {0.5, 1.0, 1.5, 2.0}) {
    SolverConfig cfg;
    cfg.nu = 0.1;
    cfg.s = s;
    cfg.T = 1.0;
    cfg.dt = 1e-3;
    const auto traj = integrate(th0, cfg, t);
    const double rate = cfg.nu * std::pow(b.eigenvalues()(0), 0.5 * s);
    for (const auto& snap : traj.snapshots)
      worst = std::max(worst, (snap.theta.coefficients - std::exp(-rate * snap.t) * th0.coefficients).norm());
    if (s == 1.0) {
      const json c = {{"criterion", 5}, {"m", 16}, {"theta0", "w_1"}, {"solver", to_json(traj.config)}};
      const ArtifactStamp stamp{config_hash(c), t.checksum()};
      write_artifact(opts, "decay_trajectory.csv", trajectory_csv(b, traj, stamp));
      write_artifact(opts, "decay_trajectory.json", trajectory_json(b, traj, c, stamp).dump(2));
    }
  }
  return {worst <= 1e-8, "max relative error over s in {0.5, 1, 1.5, 2}: " + sci(worst) + " (tol 1e-8)"};
}

// 6 ---------------------------------------------------------------------------
Outcome inviscid_limit_sweep(const VerifyOptions& opts) {
  const auto b = build_square_basis(64, 64);
  const auto t = build_tensor(b, 48, {.parallel_width = opts.ctx.width});
  SweepConfig sc;
  sc.nu_list = {1e-1, 1e-2, 1e-3, 1e-4};
  sc.theta0 = smooth_theta0(b);
  sc.m = 48;
  sc.solver.s = 1.0;
  sc.solver.T = 1.0;
  const auto rep = run_sweep(b, sc, t, opts.ctx);
  if (!rep.complete) return {false, "sweep incomplete: " + rep.error};

  SweepConfig control = sc;
  control.solver.dt = 0.5 * rep.dt;
  const auto rep2 = run_sweep(b, control, t, opts.ctx);
  double control_dev = 0.0;
  std::vector<double> dist;
  for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i) {
    dist.push_back(rep.rows[i].dist_to_inviscid);
    control_dev = std::max(control_dev, std::abs(rep2.rows[i].dist_to_inviscid / dist.back() - 1.0));
  }
  const json c = {{"criterion", 6}, {"m", 48}, {"nu_list", sc.nu_list}, {"solver", to_json(sc.solver)}};
  const ArtifactStamp stamp{config_hash(c), t.checksum()};
  write_artifact(opts, "sweep.csv", sweep_csv(rep, stamp));
  write_artifact(opts, "sweep.json", sweep_json(rep, c, stamp).dump(2));

  const bool ok = strictly_decreasing(dist) && dist.back() <= 0.02 * dist.front() && rep.drift_slope >= 0.9 &&
                  control_dev <= 0.01;
  return {ok, "distances " + list(dist) + " (last/first " + sci(dist.back() / dist.front()) +
                  ", want <= 0.02); drift slope " + sci(rep.drift_slope) + " (want >= 0.9); dt/2 control deviation " +
                  sci(control_dev)};
}

// 7 ---------------------------------------------------------------------------
Outcome weak_form(const VerifyOptions& opts) {
  const auto b = build_square_basis(64, 64);
  const auto tf = default_test_functions(b.domain(), 1.0);
  const Eigen::VectorXd th = smooth_theta0(b);
  std::vector<double> projected, unprojected;
  std::vector<std::vector<double>> rows;
  std::uint64_t checksum = 0;
  for (Index m : {16, 32, 64}) {
    const auto t = build_tensor(b, m, {.parallel_width = opts.ctx.width});
    SolverConfig cfg;
    cfg.T = 1.0;
    cfg.dt = 1e-3;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
    x.head(th.size()) = th;
    const auto traj = integrate(make_field(b, x), cfg, t);
    projected.push_back(weak_form_residual(b, traj, tf, TestProjection::projected));
    unprojected.push_back(weak_form_residual(b, traj, tf, TestProjection::unprojected));
    rows.push_back({static_cast<double>(m), projected.back(), unprojected.back()});
    checksum = t.checksum();
  }
  const json c = {{"criterion", 7}, {"m", {16, 32, 64}}, {"quadrature_order", 64}, {"dt", 1e-3}};
  write_artifact(opts, "weak_residual.csv",
                 to_csv({config_hash(c), checksum}, {"m", "projected", "unprojected"}, rows));
  const double worst = *std::max_element(projected.begin(), projected.end());
  return {worst <= 1e-7 && strictly_decreasing(unprojected),
          "projected " + list(projected) + " (tol 1e-7); unprojected " + list(unprojected) + " (want decreasing)"};
}

// 8 ---------------------------------------------------------------------------
Outcome compactness(const VerifyOptions& opts) {
  const auto b = build_square_basis(64, 64);
  SolverConfig cfg;
  cfg.nu = 0.01;
  cfg.s = 1.0;
  cfg.T = 1.0;
  cfg.dt = 1e-3;
  const auto rows = truncation_sweep(b, {16, 32, 64}, smooth_theta0(b), cfg, opts.ctx);
  std::vector<double> sup;
  for (const auto& r : rows) sup.push_back(r.neg_norm_sup);
  const double ratio = *std::max_element(sup.begin(), sup.end()) / *std::min_element(sup.begin(), sup.end());
  return {ratio < 2.0, "sup_t ||d_t theta||_{D(Lambda^-6)} for m = 16, 32, 64: " + list(sup) + " (max/min " +
                           sci(ratio) + ", want < 2)"};
}

// 9 ---------------------------------------------------------------------------
Outcome projection_lemma(const VerifyOptions&) {
  auto tails = [](const EigenBasis& b) {
    const Eigen::VectorXd phi = b.eigenvalue_power(-4.0);
    const SpectralField f{phi, b.id()};
    std::vector<double> out;
    for (Index m : {8, 16, 32, 64, 128}) out.push_back(tail_norm(b, f, m, 3.0));
    return out;
  };
  const auto disk = tails(build_disk_basis(1024));
  const auto square = tails(build_square_basis(1024));
  return {strictly_decreasing(disk) && disk.back() < 1e-6,
          "disk tails " + list(disk) + " (want decreasing, < 1e-6 at m = 128); square (corners, reported only) " +
              list(square)};
}

// 10 --------------------------------------------------------------------------
Outcome commutator_lab(const VerifyOptions& opts) {
  const auto b = build_square_basis(256);
  const auto c = commutator_multiplier_ratio(b, Multiplier::constant(2.5), 64, 8, 1, opts.ctx);
  const auto sat = commutator_saturation(b, Multiplier::sine_product(), {64, 128, 256}, 20, 1, opts.ctx);
  const double growth = sat.reports.back().sup / sat.reports.front().sup - 1.0;

  const auto fine = build_square_basis(256, 128, EigenBasis::SquarePath::separable);
  SpaceBump phi;
  phi.center = fine.domain().center();
  phi.radius = 0.5 * fine.domain().inradius();
  std::vector<double> lemma;
  for (Index M : {32, 64, 128, 256}) {
    double mean = 0.0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      Eigen::VectorXd psi = Eigen::VectorXd::Zero(M);
      psi.head(16) = random_field(fine, 16, seed);
      mean += 0.25 * nonlinearity_identity_residual(fine, psi, phi);
    }
    lemma.push_back(mean);
  }
  const json cfg = {{"criterion", 10}, {"multiplier", "sine_product"}, {"M", {64, 128, 256}}, {"samples", 20}, {"seed", 1}};
  const ArtifactStamp stamp{config_hash(cfg), 0};
  write_artifact(opts, "commutator.csv", commutator_csv(sat, stamp));
  write_artifact(opts, "commutator.json", commutator_json(sat, cfg, stamp).dump(2));

  const bool ok = c.sup <= 1e-12 && std::abs(growth) < 0.10 && strictly_decreasing(lemma);
  return {ok, "constant chi ratio " + sci(c.sup) + " (tol 1e-12); sin x sin y sup M=64 " +
                  sci(sat.reports.front().sup) + " -> M=256 " + sci(sat.reports.back().sup) + " (growth " +
                  sci(growth) + ", want < 10%); Lemma residual M = 32..256 " + list(lemma) + " (want decreasing)"};
}

struct CriterionDef {
  const char* name;
  double budget;
  std::function<Outcome(const VerifyOptions&)> fn;
};

const CriterionDef& definition(int id) {
  static const std::vector<CriterionDef> defs = {
      {"tensor antisymmetries", 30.0, tensor_antisymmetry},
      {"oracle equivalence", 10.0, oracle_equivalence},
      {"inviscid conservation", 120.0, inviscid_conservation},
      {"viscous balances", 120.0, viscous_balances},
      {"single-mode decay", 10.0, single_mode_decay},
      {"inviscid-limit sweep", 600.0, inviscid_limit_sweep},
      {"weak-form residual", 300.0, weak_form},
      {"compactness diagnostic", 120.0, compactness},
      {"projection lemma", 5.0, projection_lemma},
      {"commutator lab", 300.0, commutator_lab},
  };
  if (id < 1 || id > static_cast<int>(defs.size()))
    throw Error(ErrorKind::config, "no acceptance criterion " + std::to_string(id));
  return defs[static_cast<std::size_t>(id - 1)];
}

}  // namespace

Suite suite_from_string(const std::string& s) {
  if (s == "tensor") return Suite::tensor;
  if (s == "solver") return Suite::solver;
  if (s == "limits") return Suite::limits;
  if (s == "commutators") return Suite::commutators;
  if (s == "all") return Suite::all;
  throw Error(ErrorKind::config, "unknown suite '" + s + "' (tensor, solver, limits, commutators, all)");
}

std::string to_string(Suite s) {
  switch (s) {
    case Suite::tensor: return "tensor";
    case Suite::solver: return "solver";
    case Suite::limits: return "limits";
    case Suite::commutators: return "commutators";
    case Suite::all: return "all";
  }
  return "unknown";
}

std::vector<int> suite_criteria(Suite s) {
  switch (s) {
    case Suite::tensor: return {1, 2};
    case Suite::solver: return {3, 4, 5};
    case Suite::limits: return {6, 7, 8, 9};
    case Suite::commutators: return {10};
    case Suite::all: return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  }
  return {};
}

CriterionResult run_criterion(int id, const VerifyOptions& opts) {
  const auto& def = definition(id);
  CriterionResult r;
  r.id = id;
  r.name = def.name;
  r.budget_seconds = def.budget;
  const auto start = std::chrono::steady_clock::now();
  try {
    const auto out = def.fn(opts);
    r.passed = out.passed;
    r.detail = out.detail;
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (r.seconds > r.budget_seconds) {
    r.passed = false;
    r.detail += "; runtime over budget";
  }
  return r;
}

std::vector<CriterionResult> run_suite(Suite s, const VerifyOptions& opts) {
  std::vector<CriterionResult> out;
  for (int id : suite_criteria(s)) out.push_back(run_criterion(id, opts));
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream s;
  s.precision(2);
  s << std::fixed << (r.passed ? "[PASS] " : "[FAIL] ") << r.id << " " << r.name << " (" << r.seconds
    << " s, budget " << std::defaultfloat << r.budget_seconds << " s): " << r.detail;
  return s.str();
}

}  // namespace sqg
