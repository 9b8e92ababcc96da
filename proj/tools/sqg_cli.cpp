#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sqg/basis.hpp"
#include "sqg/commutators.hpp"
#include "sqg/config.hpp"
#include "sqg/error.hpp"
#include "sqg/io.hpp"
#include "sqg/limits.hpp"
#include "sqg/solver.hpp"
#include "sqg/spectral.hpp"
#include "sqg/tensor.hpp"
#include "sqg/verify.hpp"

namespace {

using nlohmann::json;
using namespace sqg;

struct GlobalOptions {
  std::string config;
  std::optional<double> nu;
  std::optional<int> m;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  unsigned threads = ParallelContext::machine().width;
};

void print_error(ErrorKind kind, const std::string& message, const json& extra = json::object()) {
  json rec = {{"error", std::string(to_string(kind))}, {"exit_code", exit_code(kind)}, {"message", message}};
  rec.update(extra);
  std::cerr << rec.dump() << std::endl;
}

RunConfig load(const GlobalOptions& g) {
  if (g.config.empty()) throw Error(ErrorKind::config, "--config is required for this subcommand");
  auto cfg = load_run_config(g.config);
  Overrides o;
  o.nu = g.nu;
  o.m = g.m;
  if (g.out) o.out = *g.out;
  o.seed = g.seed;
  apply_overrides(cfg, o);
  cfg.validate();
  return cfg;
}

// The hashed configuration leaves out where files go, so moving the output or
// cache directory does not change artifact bytes.
json hashed_config(const RunConfig& cfg) {
  json j = cfg.to_json();
  j.erase("output_dir");
  j["tensor"].erase("cache_dir");
  return j;
}

std::filesystem::path artifact(const RunConfig& cfg, const std::string& suffix) {
  return cfg.output_dir / (cfg.experiment + suffix);
}

TensorSource tensor_for(const RunConfig& cfg, const EigenBasis& basis, const ParallelContext& ctx) {
  TensorBuildConfig t;
  t.prune_epsilon = cfg.prune;
  t.parallel_width = ctx.width;
  t.method = cfg.method;
  return obtain_tensor(basis, cfg.m, t, cache_root(cfg), cfg.verify_tol);
}

int basis_info(const GlobalOptions& g) {
  const auto cfg = load(g);
  const auto basis = make_basis(cfg, cfg.m);
  json modes = json::array();
  for (const auto& md : basis.modes())
    modes.push_back({{"ordinal", md.ordinal}, {"multi_index", md.multi_index}, {"eigenvalue", md.eigenvalue}});
  json out = {{"id", basis.id()}, {"descriptor", basis.descriptor()}, {"modes", modes}};
  std::cout << out.dump(2) << std::endl;
  return 0;
}

int tensor_build(const GlobalOptions& g, const ParallelContext& ctx) {
  const auto cfg = load(g);
  const auto basis = make_basis(cfg, cfg.m);
  const auto src = tensor_for(cfg, basis, ctx);
  const auto& rep = src.antisymmetry;
  json out = {{"path", src.path.string()},
              {"from_cache", src.from_cache},
              {"rebuilt_after", src.rebuilt_after},
              {"m", src.tensor.m()},
              {"checksum", ArtifactStamp{"", src.tensor.checksum()}.checksum_hex()},
              {"meta", to_json(src.tensor.meta())},
              {"antisymmetry",
               {{"max_defect_kl", rep.max_defect_kl},
                {"max_defect_weighted", rep.max_defect_weighted},
                {"count_checked", rep.count_checked},
                {"tolerance", cfg.verify_tol}}}};
  std::cout << out.dump(2) << std::endl;
  return 0;
}

int run(const GlobalOptions& g, const ParallelContext& ctx) {
  const auto cfg = load(g);
  const auto basis = make_basis(cfg, cfg.m);
  const auto src = tensor_for(cfg, basis, ctx);
  const json hc = hashed_config(cfg);
  const ArtifactStamp stamp{config_hash(hc), src.tensor.checksum()};
  const auto theta0 = make_field(basis, initial_coefficients(cfg, basis));
  try {
    const auto traj = integrate(theta0, cfg.solver, src.tensor);
    write_text(artifact(cfg, "_trajectory.csv"), trajectory_csv(basis, traj, stamp));
    write_text(artifact(cfg, "_trajectory.json"), trajectory_json(basis, traj, hc, stamp).dump(2) + "\n");
    if (cfg.write_coefficients) {
      const auto dir = artifact(cfg, "_snapshots");
      std::filesystem::create_directories(dir);
      char name[32];
      for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        std::snprintf(name, sizeof name, "theta_%06zu.bin", i);
        write_binary(dir / name, traj.snapshots[i].theta.coefficients);
      }
    }
  } catch (const BlowUpError& e) {
    write_binary(artifact(cfg, "_last_good.bin"), e.last_good().theta.coefficients);
    print_error(e.kind(), e.what(), {{"last_good_t", e.last_good().t}});
    return exit_code(e.kind());
  }
  return 0;
}

int sweep(const GlobalOptions& g, const ParallelContext& ctx) {
  const auto cfg = load(g);
  const auto basis = make_basis(cfg, cfg.m);
  SweepConfig sc;
  sc.nu_list = cfg.nu_list;
  sc.m = cfg.m;
  sc.solver = cfg.solver;
  sc.theta0 = initial_coefficients(cfg, basis);
  sc.validate();
  const auto src = tensor_for(cfg, basis, ctx);
  const json hc = hashed_config(cfg);
  const ArtifactStamp stamp{config_hash(hc), src.tensor.checksum()};
  const auto report = run_sweep(basis, sc, src.tensor, ctx);
  write_text(artifact(cfg, "_sweep.csv"), sweep_csv(report, stamp));
  write_text(artifact(cfg, "_sweep.json"), sweep_json(report, hc, stamp).dump(2) + "\n");
  if (!report.complete) {
    print_error(report.error_kind, report.error, {{"partial_report", artifact(cfg, "_sweep.json").string()}});
    return exit_code(report.error_kind);
  }
  return 0;
}

int commutator_lab(const GlobalOptions& g, const ParallelContext& ctx) {
  const auto cfg = load(g);
  const auto& cc = cfg.commutator;
  if (cc.multiplier == Multiplier::Kind::sine_product && cfg.domain != DomainKind::square)
    throw Error(ErrorKind::config, "sine_product multipliers vanish on the boundary of the square only");
  Index m_max = cfg.m;
  for (Index M : cc.M_list) m_max = std::max(m_max, M);
  const auto basis = make_basis(cfg, static_cast<int>(m_max));
  const auto chi = cc.make_multiplier();
  const auto sat = commutator_saturation(basis, chi, cc.M_list, static_cast<std::size_t>(cc.samples), cfg.seed, ctx);

  json lemma = json::array();
  std::vector<std::vector<double>> lemma_rows;
  if (!cc.lemma_M.empty()) {
    const Index top = *std::max_element(cc.lemma_M.begin(), cc.lemma_M.end());
    const auto fine = cfg.domain == DomainKind::square
                          ? build_square_basis(static_cast<int>(top), cc.lemma_quadrature_order)
                          : build_disk_basis(static_cast<int>(top), cc.lemma_quadrature_order);
    SpaceBump phi;
    phi.center = fine.domain().center();
    phi.radius = cc.lemma_bump_radius * fine.domain().inradius();
    constexpr int seeds = 4;
    for (Index M : cc.lemma_M) {
      double mean = 0.0;
      for (int k = 0; k < seeds; ++k) {
        Eigen::VectorXd psi = Eigen::VectorXd::Zero(M);
        psi.head(cc.lemma_modes) = random_field(fine, cc.lemma_modes, cfg.seed + static_cast<std::uint64_t>(k));
        mean += nonlinearity_identity_residual(fine, psi, phi) / seeds;
      }
      lemma.push_back({{"M", M}, {"residual", mean}});
      lemma_rows.push_back({static_cast<double>(M), mean});
    }
  }

  const json hc = hashed_config(cfg);
  const ArtifactStamp stamp{config_hash(hc), 0};
  json out = commutator_json(sat, hc, stamp);
  out["lemma"] = lemma;
  write_text(artifact(cfg, "_commutator.csv"), commutator_csv(sat, stamp));
  if (!lemma_rows.empty()) write_text(artifact(cfg, "_lemma.csv"), to_csv(stamp, lemma_columns, lemma_rows));
  write_text(artifact(cfg, "_commutator.json"), out.dump(2) + "\n");
  return 0;
}

int verify(const GlobalOptions& g, const ParallelContext& ctx, const std::string& suite_name) {
  const Suite suite = suite_from_string(suite_name);
  VerifyOptions opts;
  opts.ctx = ctx;
  if (g.out) opts.artifact_dir = std::filesystem::path(*g.out);
  bool ok = true;
  json results = json::array();
  for (int id : suite_criteria(suite)) {
    const auto r = run_criterion(id, opts);
    std::cout << format_result(r) << std::endl;
    ok = ok && r.passed;
    results.push_back({{"id", r.id},
                       {"name", r.name},
                       {"passed", r.passed},
                       {"detail", r.detail},
                       {"seconds", r.seconds},
                       {"budget_seconds", r.budget_seconds}});
  }
  if (opts.artifact_dir)
    write_text(*opts.artifact_dir / ("verify_" + suite_name + ".json"),
               json{{"suite", suite_name}, {"passed", ok}, {"criteria", results}}.dump(2) + "\n");
  if (!ok) {
    print_error(ErrorKind::verification, "suite '" + suite_name + "' has failing criteria");
    return exit_code(ErrorKind::verification);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Galerkin SQG toolkit: bases, interaction tensors, trajectories, sweeps and checks"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config, "JSON run configuration");
  app.add_option("--nu", g.nu, "override solver.nu");
  app.add_option("--m", g.m, "override basis.m");
  app.add_option("--out", g.out, "override output_dir");
  app.add_option("--seed", g.seed, "override seed");
  app.add_option("--threads", g.threads, "worker pool width")->check(CLI::PositiveNumber);

  auto* basis_cmd = app.add_subcommand("basis-info", "print the basis descriptor and eigenvalue table");
  auto* tensor_cmd = app.add_subcommand("tensor-build", "build or load, then verify, the cached tensor");
  auto* run_cmd = app.add_subcommand("run", "integrate one trajectory");
  auto* sweep_cmd = app.add_subcommand("sweep", "viscosity sweep against the inviscid run");
  auto* comm_cmd = app.add_subcommand("commutator-lab", "commutator saturation and nonlinearity identity");
  auto* verify_cmd = app.add_subcommand("verify", "run acceptance criteria");
  std::string suite = "all";
  verify_cmd->add_option("--suite", suite, "tensor | solver | limits | commutators | all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error(ErrorKind::config, e.what());
    return exit_code(ErrorKind::config);
  }

  const ParallelContext ctx{g.threads};
  try {
    if (*basis_cmd) return basis_info(g);
    if (*tensor_cmd) return tensor_build(g, ctx);
    if (*run_cmd) return run(g, ctx);
    if (*sweep_cmd) return sweep(g, ctx);
    if (*comm_cmd) return commutator_lab(g, ctx);
    if (*verify_cmd) return verify(g, ctx, suite);
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    print_error(ErrorKind::io, e.what());
    return exit_code(ErrorKind::io);
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"exit_code", 1}, {"message", e.what()}}.dump() << std::endl;
    return 1;
  }
  return 0;
}
