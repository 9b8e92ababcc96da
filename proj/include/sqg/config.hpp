#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqg/basis.hpp"
#include "sqg/commutators.hpp"
#include "sqg/solver.hpp"
#include "sqg/tensor.hpp"

namespace sqg {

struct InitialData {
  enum class Kind { random, mode, coefficients };
  Kind kind = Kind::random;
  int mode = 1;          // 1-based, Kind::mode
  double amplitude = 1.0;
  int modes = 0;         // random: number of leading modes, 0 = all m
  std::vector<double> coefficients;
};

struct CommutatorSection {
  Multiplier::Kind multiplier = Multiplier::Kind::sine_product;
  double value = 1.0;                // constant value or sine amplitude
  int a = 1, b = 1;                  // sine wavenumbers
  std::vector<double> radial_coeffs;
  std::vector<Index> M_list{64, 128, 256};
  int samples = 20;
  /// Lemma residual sweep for a fixed psi over these M (empty: skipped).
  std::vector<Index> lemma_M{32, 64, 128, 256};
  int lemma_modes = 16;
  double lemma_bump_radius = 0.5;    // fraction of the inradius
  int lemma_quadrature_order = 0;    // 0: basis minimum

  Multiplier make_multiplier() const;
};

/// One JSON file drives every subcommand:
///   {"experiment", "output_dir", "seed",
///    "basis": {"domain", "m", "m_max", "quadrature_order"},
///    "tensor": {"cache_dir", "prune", "method", "verify_tol"},
///    "solver": {"nu", "s", "dt", "T", "snapshot_stride", "integrator", "write_coefficients"},
///    "initial": {"kind", "mode", "amplitude", "modes", "coefficients"},
///    "sweep": {"nu_list"},
///    "commutator": {"multiplier", "value", "a", "b", "radial_coeffs", "M", "samples",
///                   "lemma_M", "lemma_modes", "lemma_bump_radius", "lemma_quadrature_order"}}
/// Every section and key is optional; unknown keys are rejected.
struct RunConfig {
  std::string experiment = "experiment";
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;

  DomainKind domain = DomainKind::square;
  int m = 16;
  int m_max = 0;  // 0: m
  int quadrature_order = 0;

  std::filesystem::path cache_dir = ".sqg-cache";
  double prune = 0.0;
  TensorMethod method = TensorMethod::automatic;
  double verify_tol = 1e-10;

  SolverConfig solver;
  bool write_coefficients = false;
  InitialData initial;
  std::vector<double> nu_list;
  CommutatorSection commutator;

  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// Checks every section against module invariants before any compute.
  void validate() const;
};

/// Throws Error(config) when the file is missing or not valid JSON.
RunConfig load_run_config(const std::filesystem::path& path);

struct Overrides {
  std::optional<double> nu;
  std::optional<int> m;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
};

void apply_overrides(RunConfig& cfg, const Overrides& o);

EigenBasis make_basis(const RunConfig& cfg, int m_max);

/// P_m theta0 per the initial-data section.
Eigen::VectorXd initial_coefficients(const RunConfig& cfg, const EigenBasis& basis);

/// SQG_CACHE_DIR when set, else the configured cache directory.
std::filesystem::path cache_root(const RunConfig& cfg);

/// <root>/<basis descriptor hash>/tensor_m<m>_<method>_prune<eps>.sqgt
std::filesystem::path tensor_cache_path(const std::filesystem::path& root, const EigenBasis& basis, Index m,
                                        const TensorBuildConfig& tcfg);

struct TensorSource {
  InteractionTensor tensor;
  std::filesystem::path path;
  bool from_cache = false;
  /// Message of the cache error that forced a rebuild, if any.
  std::string rebuilt_after;
  AntisymmetryReport antisymmetry;
};

/// Loads a valid cache or builds and writes one; either way the tensor is
/// checked with verify_antisymmetries(verify_tol). A cache that fails to load
/// is deleted and rebuilt. On a verification failure the cache file is
/// removed (or never written) and Error(verification) propagates.
TensorSource obtain_tensor(const EigenBasis& basis, Index m, const TensorBuildConfig& tcfg,
                           const std::filesystem::path& root, double verify_tol);

}  // namespace sqg
