#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqg/basis.hpp"
#include "sqg/commutators.hpp"
#include "sqg/limits.hpp"
#include "sqg/solver.hpp"

namespace sqg {

/// Shortest round-trip decimal form, '.' separator regardless of locale.
std::string format_double(double v);

/// Provenance written into every artifact: CSVs carry it as a leading
/// "# config_hash=<hex> tensor_checksum=<hex>" comment line, JSON as fields.
struct ArtifactStamp {
  std::string config_hash;
  std::uint64_t tensor_checksum = 0;

  std::string comment_line() const;
  std::string checksum_hex() const;
};

/// SHA-256 (hex) of the compact serialization of a JSON document.
std::string config_hash(const nlohmann::json& config);

struct CsvTable {
  std::vector<std::string> comments;  // without the leading '#'
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a column; throws Error(io) naming the missing column.
  std::size_t column(const std::string& name) const;
};

std::string to_csv(const ArtifactStamp& stamp, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows);
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

/// Writes via a temporary file renamed into place; creates parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

// Artifact schemas -----------------------------------------------------------

inline const std::vector<std::string> trajectory_columns{"t", "E", "H", "diss_s", "diss_sm1", "linf_u"};
inline const std::vector<std::string> sweep_columns{"nu",           "dist_to_inviscid", "weak_residual",
                                                    "ham_drift",    "energy_residual",  "neg_norm_sup",
                                                    "diss_vanish"};
inline const std::vector<std::string> commutator_columns{"M", "sample", "ratio"};
inline const std::vector<std::string> lemma_columns{"M", "residual"};

/// One row per snapshot; linf_u is max |u| over the basis grid.
std::string trajectory_csv(const EigenBasis& basis, const Trajectory& traj, const ArtifactStamp& stamp);
/// {config, solver, dt, tensor_checksum, tensor_meta, basis, residuals}
nlohmann::json trajectory_json(const EigenBasis& basis, const Trajectory& traj, const nlohmann::json& config,
                               const ArtifactStamp& stamp);

std::string sweep_csv(const SweepReport& report, const ArtifactStamp& stamp);
/// Rows, fitted slopes, completion state and the sweep configuration.
nlohmann::json sweep_json(const SweepReport& report, const nlohmann::json& config, const ArtifactStamp& stamp);

std::string commutator_csv(const SaturationReport& report, const ArtifactStamp& stamp);
/// Per-M sup/mean, growth between consecutive M and the saturation flag.
nlohmann::json commutator_json(const SaturationReport& report, const nlohmann::json& config,
                               const ArtifactStamp& stamp);

nlohmann::json to_json(const TensorBuildMeta& meta);
nlohmann::json to_json(const SolverConfig& cfg);

}  // namespace sqg
