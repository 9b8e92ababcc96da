#include "sqg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "sqg/error.hpp"
#include "sqg/hash.hpp"
#include "sqg/spectral.hpp"

namespace sqg {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string ArtifactStamp::checksum_hex() const {
  char buf[17];
  const auto res = std::to_chars(buf, buf + 16, tensor_checksum, 16);
  std::string s(buf, res.ptr);
  return std::string(16 - s.size(), '0') + s;
}

std::string ArtifactStamp::comment_line() const {
  return "# config_hash=" + config_hash + " tensor_checksum=" + checksum_hex();
}

std::string config_hash(const nlohmann::json& config) {
  const auto h = sha256(config.dump());
  return to_hex(h);
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(ErrorKind::io, "CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::string to_csv(const ArtifactStamp& stamp, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows) {
  std::string out = stamp.comment_line() + "\n";
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += "\n";
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error(ErrorKind::io, "malformed CSV number '" + s + "'");
  return v;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      t.comments.push_back(line.substr(1));
      continue;
    }
    const auto cells = split(line);
    if (!have_header) {
      t.header = cells;
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      throw Error(ErrorKind::io, "CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                                     std::to_string(t.header.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c));
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw Error(ErrorKind::io, "CSV has no header");
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return parse_csv({std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()});
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open " + tmp.string() + " for writing");
    out << text;
    if (!out) throw Error(ErrorKind::io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::io, "cannot move " + tmp.string() + " into place");
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const TensorBuildMeta& meta) {
  return {{"method", meta.method},
          {"quadrature_order", meta.quadrature_order},
          {"prune_epsilon", meta.prune_epsilon},
          {"parallel_width", meta.parallel_width},
          {"wall_seconds", meta.wall_seconds},
          {"candidates", meta.candidates},
          {"stored", meta.stored},
          {"pruned", meta.pruned},
          {"max_abs", meta.max_abs},
          {"fill_fraction", meta.fill_fraction}};
}

nlohmann::json to_json(const SolverConfig& cfg) {
  return {{"nu", cfg.nu},
          {"s", cfg.s},
          {"dt", cfg.dt},
          {"T", cfg.T},
          {"snapshot_stride", cfg.snapshot_stride},
          {"integrator", to_string(cfg.integrator)},
          {"energy_growth_tol", cfg.energy_growth_tol}};
}

std::string trajectory_csv(const EigenBasis& basis, const Trajectory& traj, const ArtifactStamp& stamp) {
  std::vector<std::vector<double>> rows;
  const auto& L = traj.ledger;
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const auto r = traj.snapshot_rows[i];
    const PhysicalField u = velocity(basis, traj.snapshots[i].theta);
    const double linf = u.values.rows() ? u.values.rowwise().norm().maxCoeff() : 0.0;
    rows.push_back({L.t[r], L.E[r], L.H[r], L.diss_s[r], L.diss_sm1[r], linf});
  }
  return to_csv(stamp, trajectory_columns, rows);
}

nlohmann::json trajectory_json(const EigenBasis& basis, const Trajectory& traj, const nlohmann::json& config,
                               const ArtifactStamp& stamp) {
  return {{"config", config},
          {"config_hash", stamp.config_hash},
          {"tensor_checksum", stamp.checksum_hex()},
          {"solver", to_json(traj.config)},
          {"tensor_meta", to_json(traj.tensor_meta)},
          {"basis", basis.descriptor()},
          {"snapshots", traj.snapshots.size()},
          {"residuals",
           {{"energy_balance", energy_balance_residual(traj)},
            {"hamiltonian_balance", hamiltonian_balance_residual(traj)},
            {"hamiltonian_drift", hamiltonian_drift(traj)}}}};
}

std::string sweep_csv(const SweepReport& report, const ArtifactStamp& stamp) {
  std::vector<std::vector<double>> rows;
  for (const auto& r : report.rows)
    rows.push_back({r.nu, r.dist_to_inviscid, r.weak_residual, r.ham_drift, r.energy_residual,
                    r.neg_norm_sup, r.diss_vanish});
  return to_csv(stamp, sweep_columns, rows);
}

nlohmann::json sweep_json(const SweepReport& report, const nlohmann::json& config, const ArtifactStamp& stamp) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"nu", r.nu},
                    {"dist_to_inviscid", r.dist_to_inviscid},
                    {"weak_residual", r.weak_residual},
                    {"ham_drift", r.ham_drift},
                    {"energy_residual", r.energy_residual},
                    {"neg_norm_sup", r.neg_norm_sup},
                    {"diss_vanish", r.diss_vanish},
                    {"initial_distance", r.initial_distance},
                    {"completed", r.completed}});
  const auto& sc = report.config;
  return {{"config", config},
          {"config_hash", stamp.config_hash},
          {"tensor_checksum", stamp.checksum_hex()},
          {"m", sc.m},
          {"nu_list", sc.nu_list},
          {"solver", to_json(sc.solver)},
          {"dt", report.dt},
          {"complete", report.complete},
          {"error", report.error},
          {"rows", rows},
          {"fits",
           {{"distance_slope", report.distance_slope},
            {"drift_slope", report.drift_slope},
            {"diss_vanish_slope", report.diss_vanish_slope},
            {"weak_residual_constant", report.weak_residual_constant}}}};
}

std::string commutator_csv(const SaturationReport& report, const ArtifactStamp& stamp) {
  std::vector<std::vector<double>> rows;
  for (const auto& r : report.reports)
    for (std::size_t k = 0; k < r.ratios.size(); ++k)
      rows.push_back({static_cast<double>(r.M), static_cast<double>(k), r.ratios[k]});
  return to_csv(stamp, commutator_columns, rows);
}

nlohmann::json commutator_json(const SaturationReport& report, const nlohmann::json& config,
                               const ArtifactStamp& stamp) {
  nlohmann::json per_m = nlohmann::json::array();
  for (const auto& r : report.reports)
    per_m.push_back({{"M", r.M}, {"samples", r.samples}, {"sup", r.sup}, {"mean", r.mean},
                     {"worst_sample", r.worst_sample}});
  return {{"config", config},
          {"config_hash", stamp.config_hash},
          {"tensor_checksum", stamp.checksum_hex()},
          {"reports", per_m},
          {"growth", report.growth},
          {"saturation_flag", report.flagged}};
}

}  // namespace sqg
