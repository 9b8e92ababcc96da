#include "sqg/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include "sqg/error.hpp"
#include "sqg/hash.hpp"
#include "sqg/io.hpp"

namespace sqg {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& section) {
  if (!obj.is_object()) throw Error(ErrorKind::config, "section '" + section + "' must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key))
      throw Error(ErrorKind::config, "unknown key '" + key + "' in " + (section.empty() ? "config" : section));
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

json section(const json& j, const char* key) { return j.contains(key) ? j.at(key) : json::object(); }

std::string multiplier_name(Multiplier::Kind k) {
  switch (k) {
    case Multiplier::Kind::constant: return "constant";
    case Multiplier::Kind::sine_product: return "sine_product";
    case Multiplier::Kind::radial: return "radial";
  }
  return "unknown";
}

Multiplier::Kind multiplier_kind(const std::string& s) {
  if (s == "constant") return Multiplier::Kind::constant;
  if (s == "sine_product") return Multiplier::Kind::sine_product;
  if (s == "radial") return Multiplier::Kind::radial;
  throw Error(ErrorKind::config, "unknown multiplier '" + s + "' (constant, sine_product, radial)");
}

std::string initial_name(InitialData::Kind k) {
  switch (k) {
    case InitialData::Kind::random: return "random";
    case InitialData::Kind::mode: return "mode";
    case InitialData::Kind::coefficients: return "coefficients";
  }
  return "unknown";
}

InitialData::Kind initial_kind(const std::string& s) {
  if (s == "random") return InitialData::Kind::random;
  if (s == "mode") return InitialData::Kind::mode;
  if (s == "coefficients") return InitialData::Kind::coefficients;
  throw Error(ErrorKind::config, "unknown initial kind '" + s + "' (random, mode, coefficients)");
}

}  // namespace

Multiplier CommutatorSection::make_multiplier() const {
  switch (multiplier) {
    case Multiplier::Kind::constant: return Multiplier::constant(value);
    case Multiplier::Kind::sine_product: return Multiplier::sine_product(a, b, value);
    case Multiplier::Kind::radial: return Multiplier::radial(radial_coeffs);
  }
  return Multiplier::constant(value);
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  try {
    check_keys(j, {"experiment", "output_dir", "seed", "basis", "tensor", "solver", "initial", "sweep", "commutator"}, "");
    read(j, "experiment", c.experiment);
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    read(j, "seed", c.seed);

    const json b = section(j, "basis");
    check_keys(b, {"domain", "m", "m_max", "quadrature_order"}, "basis");
    if (b.contains("domain")) c.domain = domain_kind_from_string(b.at("domain").get<std::string>());
    read(b, "m", c.m);
    read(b, "m_max", c.m_max);
    read(b, "quadrature_order", c.quadrature_order);

    const json t = section(j, "tensor");
    check_keys(t, {"cache_dir", "prune", "method", "verify_tol"}, "tensor");
    if (t.contains("cache_dir")) c.cache_dir = t.at("cache_dir").get<std::string>();
    read(t, "prune", c.prune);
    if (t.contains("method")) c.method = tensor_method_from_string(t.at("method").get<std::string>());
    read(t, "verify_tol", c.verify_tol);

    const json s = section(j, "solver");
    check_keys(s, {"nu", "s", "dt", "T", "snapshot_stride", "integrator", "write_coefficients"}, "solver");
    read(s, "nu", c.solver.nu);
    read(s, "s", c.solver.s);
    read(s, "dt", c.solver.dt);
    read(s, "T", c.solver.T);
    read(s, "snapshot_stride", c.solver.snapshot_stride);
    if (s.contains("integrator")) c.solver.integrator = integrator_from_string(s.at("integrator").get<std::string>());
    read(s, "write_coefficients", c.write_coefficients);

    const json i = section(j, "initial");
    check_keys(i, {"kind", "mode", "amplitude", "modes", "coefficients"}, "initial");
    if (i.contains("kind")) c.initial.kind = initial_kind(i.at("kind").get<std::string>());
    read(i, "mode", c.initial.mode);
    read(i, "amplitude", c.initial.amplitude);
    read(i, "modes", c.initial.modes);
    read(i, "coefficients", c.initial.coefficients);

    const json w = section(j, "sweep");
    check_keys(w, {"nu_list"}, "sweep");
    read(w, "nu_list", c.nu_list);

    const json k = section(j, "commutator");
    check_keys(k, {"multiplier", "value", "a", "b", "radial_coeffs", "M", "samples", "lemma_M", "lemma_modes",
                   "lemma_bump_radius", "lemma_quadrature_order"},
               "commutator");
    if (k.contains("multiplier")) c.commutator.multiplier = multiplier_kind(k.at("multiplier").get<std::string>());
    read(k, "value", c.commutator.value);
    read(k, "a", c.commutator.a);
    read(k, "b", c.commutator.b);
    read(k, "radial_coeffs", c.commutator.radial_coeffs);
    read(k, "M", c.commutator.M_list);
    read(k, "samples", c.commutator.samples);
    read(k, "lemma_M", c.commutator.lemma_M);
    read(k, "lemma_modes", c.commutator.lemma_modes);
    read(k, "lemma_bump_radius", c.commutator.lemma_bump_radius);
    read(k, "lemma_quadrature_order", c.commutator.lemma_quadrature_order);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config, std::string("malformed config: ") + e.what());
  }
  return c;
}

json RunConfig::to_json() const {
  return {{"experiment", experiment},
          {"output_dir", output_dir.string()},
          {"seed", seed},
          {"basis", {{"domain", sqg::to_string(domain)}, {"m", m}, {"m_max", m_max}, {"quadrature_order", quadrature_order}}},
          {"tensor",
           {{"cache_dir", cache_dir.string()}, {"prune", prune}, {"method", sqg::to_string(method)}, {"verify_tol", verify_tol}}},
          {"solver",
           {{"nu", solver.nu},
            {"s", solver.s},
            {"dt", solver.dt},
            {"T", solver.T},
            {"snapshot_stride", solver.snapshot_stride},
            {"integrator", sqg::to_string(solver.integrator)},
            {"write_coefficients", write_coefficients}}},
          {"initial",
           {{"kind", initial_name(initial.kind)},
            {"mode", initial.mode},
            {"amplitude", initial.amplitude},
            {"modes", initial.modes},
            {"coefficients", initial.coefficients}}},
          {"sweep", {{"nu_list", nu_list}}},
          {"commutator",
           {{"multiplier", multiplier_name(commutator.multiplier)},
            {"value", commutator.value},
            {"a", commutator.a},
            {"b", commutator.b},
            {"radial_coeffs", commutator.radial_coeffs},
            {"M", commutator.M_list},
            {"samples", commutator.samples},
            {"lemma_M", commutator.lemma_M},
            {"lemma_modes", commutator.lemma_modes},
            {"lemma_bump_radius", commutator.lemma_bump_radius},
            {"lemma_quadrature_order", commutator.lemma_quadrature_order}}}};
}

void RunConfig::validate() const {
  if (experiment.empty() || experiment.find_first_of("/\\") != std::string::npos)
    throw Error(ErrorKind::config, "experiment id must be a non-empty file-name-safe string");
  if (m < 1 || m > 1024) throw Error(ErrorKind::config, "basis.m must lie in 1..1024");
  if (m_max != 0 && (m_max < m || m_max > 1024))
    throw Error(ErrorKind::config, "basis.m_max must lie in m..1024");
  if (quadrature_order < 0) throw Error(ErrorKind::config, "basis.quadrature_order must be >= 0");
  if (quadrature_order > 0) {
    const int need = minimum_quadrature_order(domain, std::max(m, m_max));
    if (quadrature_order < need)
      throw Error(ErrorKind::config, "basis.quadrature_order " + std::to_string(quadrature_order) +
                                         " below the minimum " + std::to_string(need));
  }
  if (!(prune >= 0.0)) throw Error(ErrorKind::config, "tensor.prune must be >= 0");
  if (!(verify_tol > 0.0)) throw Error(ErrorKind::config, "tensor.verify_tol must be positive");
  if (method == TensorMethod::closed_form && domain != DomainKind::square)
    throw Error(ErrorKind::config, "closed-form tensors exist only on the square");
  solver.validate();
  switch (initial.kind) {
    case InitialData::Kind::mode:
      if (initial.mode < 1 || initial.mode > m) throw Error(ErrorKind::config, "initial.mode must lie in 1..m");
      break;
    case InitialData::Kind::random:
      if (initial.modes < 0 || initial.modes > m) throw Error(ErrorKind::config, "initial.modes must lie in 0..m");
      break;
    case InitialData::Kind::coefficients:
      if (initial.coefficients.empty()) throw Error(ErrorKind::config, "initial.coefficients is empty");
      break;
  }
  if (!std::isfinite(initial.amplitude)) throw Error(ErrorKind::config, "initial.amplitude must be finite");
  if (commutator.samples < 1) throw Error(ErrorKind::config, "commutator.samples must be >= 1");
  for (Index M : commutator.M_list)
    if (M < 1 || M > 1024) throw Error(ErrorKind::config, "commutator.M entries must lie in 1..1024");
  for (Index M : commutator.lemma_M)
    if (M < commutator.lemma_modes || M > 1024)
      throw Error(ErrorKind::config, "commutator.lemma_M entries must lie in lemma_modes..1024");
  if (commutator.lemma_modes < 1) throw Error(ErrorKind::config, "commutator.lemma_modes must be >= 1");
  if (!(commutator.lemma_bump_radius > 0.0 && commutator.lemma_bump_radius < 1.0))
    throw Error(ErrorKind::config, "commutator.lemma_bump_radius must lie in (0, 1)");
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot read config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config, "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return RunConfig::from_json(j);
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.nu) cfg.solver.nu = *o.nu;
  if (o.m) cfg.m = *o.m;
  if (o.out) cfg.output_dir = *o.out;
  if (o.seed) cfg.seed = *o.seed;
}

EigenBasis make_basis(const RunConfig& cfg, int m_max) {
  m_max = std::max({m_max, cfg.m, cfg.m_max});
  return cfg.domain == DomainKind::square ? build_square_basis(m_max, cfg.quadrature_order)
                                          : build_disk_basis(m_max, cfg.quadrature_order);
}

Eigen::VectorXd initial_coefficients(const RunConfig& cfg, const EigenBasis& basis) {
  const Index m = cfg.m;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  switch (cfg.initial.kind) {
    case InitialData::Kind::mode: x(cfg.initial.mode - 1) = cfg.initial.amplitude; break;
    case InitialData::Kind::random: {
      const Index n = cfg.initial.modes == 0 ? m : cfg.initial.modes;
      x.head(n) = cfg.initial.amplitude * random_field(basis, n, cfg.seed);
      break;
    }
    case InitialData::Kind::coefficients: {
      const Index n = std::min<Index>(m, static_cast<Index>(cfg.initial.coefficients.size()));
      for (Index j = 0; j < n; ++j) x(j) = cfg.initial.amplitude * cfg.initial.coefficients[j];
      break;
    }
  }
  return x;
}

std::filesystem::path cache_root(const RunConfig& cfg) {
  if (const char* env = std::getenv("SQG_CACHE_DIR"); env && *env) return env;
  return cfg.cache_dir;
}

std::filesystem::path tensor_cache_path(const std::filesystem::path& root, const EigenBasis& basis, Index m,
                                        const TensorBuildConfig& tcfg) {
  TensorMethod method = tcfg.method;
  if (method == TensorMethod::automatic)
    method = basis.domain().kind == DomainKind::square ? TensorMethod::closed_form : TensorMethod::quadrature;
  std::string name = "tensor_m" + std::to_string(m) + "_" + to_string(method);
  if (method == TensorMethod::quadrature && tcfg.quadrature_order != 0)
    name += "_q" + std::to_string(tcfg.quadrature_order);
  name += "_prune" + format_double(tcfg.prune_epsilon) + ".sqgt";
  return root / to_hex(basis.descriptor_hash()) / name;
}

TensorSource obtain_tensor(const EigenBasis& basis, Index m, const TensorBuildConfig& tcfg,
                           const std::filesystem::path& root, double verify_tol) {
  const auto path = tensor_cache_path(root, basis, m, tcfg);
  std::string rebuilt_after;
  std::error_code ec;
  auto verified = [&](InteractionTensor t, bool from_cache) {
    try {
      auto rep = verify_antisymmetries(t, verify_tol);
      return TensorSource{std::move(t), path, from_cache, rebuilt_after, rep};
    } catch (const Error&) {
      std::filesystem::remove(path, ec);
      throw;
    }
  };
  if (std::filesystem::exists(path)) {
    try {
      auto t = load_cache(path, basis);
      if (t.m() == m) return verified(std::move(t), true);
      rebuilt_after = "cached tensor has a different size";
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::cache_invalid && e.kind() != ErrorKind::corruption) throw;
      rebuilt_after = e.what();
    }
    std::filesystem::remove(path, ec);
  }
  auto src = verified(build_tensor(basis, m, tcfg), false);
  save_cache(src.tensor, path);
  return src;
}

}  // namespace sqg
