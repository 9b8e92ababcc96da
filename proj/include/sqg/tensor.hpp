#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sqg/basis.hpp"
#include "sqg/parallel.hpp"

namespace sqg {

enum class TensorMethod { automatic, closed_form, quadrature };

std::string to_string(TensorMethod m);
TensorMethod tensor_method_from_string(const std::string& s);

struct TensorBuildConfig {
  /// 0 uses the basis grid; any other value must equal the basis grid order.
  int quadrature_order = 0;
  /// Entries with |gamma| <= prune_epsilon are dropped. 0 drops exact zeros only.
  double prune_epsilon = 0.0;
  unsigned parallel_width = 1;
  /// automatic: closed form on the square, quadrature on the disk.
  TensorMethod method = TensorMethod::automatic;
};

struct TensorBuildMeta {
  std::string method;
  int quadrature_order = 0;
  double prune_epsilon = 0.0;
  unsigned parallel_width = 1;
  double wall_seconds = 0.0;
  std::size_t candidates = 0;  // triples with k < l and j != k
  std::size_t stored = 0;
  std::size_t pruned = 0;
  double max_abs = 0.0;
  double fill_fraction = 0.0;  // stored / candidates
};

/// Galerkin triad coefficients
///   gamma_jkl = lambda_j^{-1/2} int (grad^perp w_j . grad w_k) w_l dx
/// stored only for k < l; gamma_jlk = -gamma_jkl is synthesised on read.
/// Indices are 0-based.
class InteractionTensor {
 public:
  struct Entry {
    std::uint32_t j, k, l;
    double value;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  /// Entries are sorted by (j, k, l); every entry must satisfy k < l < m.
  InteractionTensor(Index m, std::vector<Entry> entries, std::string basis_id,
                    std::array<std::uint8_t, 32> basis_hash, Eigen::VectorXd eigenvalues,
                    TensorBuildMeta meta);

  Index m() const { return m_; }
  const std::vector<Entry>& entries() const { return entries_; }
  const std::string& basis_id() const { return basis_id_; }
  const std::array<std::uint8_t, 32>& basis_hash() const { return basis_hash_; }
  /// lambda_1..lambda_m of the basis the tensor was built on.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const TensorBuildMeta& meta() const { return meta_; }
  /// FNV-1a over the little-endian entry payload (same value as the cache trailer).
  std::uint64_t checksum() const { return checksum_; }
  double max_abs() const;

  /// gamma_jkl for any index triple, mirrors included; 0 when not stored.
  double operator()(Index j, Index k, Index l) const;

  /// N_l = sum_{j,k} gamma_jkl theta_j theta_k for l < m.
  Eigen::VectorXd contract(const Eigen::Ref<const Eigen::VectorXd>& theta) const;

 private:
  Index m_;
  std::vector<Entry> entries_;
  std::string basis_id_;
  std::array<std::uint8_t, 32> basis_hash_;
  Eigen::VectorXd eigenvalues_;
  TensorBuildMeta meta_;
  std::uint64_t checksum_;
};

InteractionTensor build_tensor(const EigenBasis& basis, Index m, const TensorBuildConfig& cfg = {});

/// Exact gamma_jkl on the square for multi-indices (a, b), from
///   int_0^pi sin(px) cos(qx) sin(rx) dx = (pi/4)(delta_{r,p+q} + delta_{r,p-q} - delta_{r,q-p}).
double closed_form_square_entry(const std::array<int, 2>& j, const std::array<int, 2>& k,
                                const std::array<int, 2>& l);

/// Every gamma_jkl (all k, l) by grid quadrature. m^3 doubles; used for
/// exhaustive cross-checks.
struct DenseTensor {
  Index m = 0;
  std::vector<double> data;
  double operator()(Index j, Index k, Index l) const { return data[(j * m + k) * m + l]; }
};
DenseTensor quadrature_tensor_dense(const EigenBasis& basis, Index m,
                                    const ParallelContext& ctx = {});

struct AntisymmetryReport {
  double max_defect_kl = 0.0;        // |gamma_jkl + gamma_jlk|
  double max_defect_weighted = 0.0;  // |gamma_jkl lambda_l^{-1/2} + gamma_lkj lambda_j^{-1/2}|
  std::size_t count_checked = 0;
  std::array<Index, 3> worst_kl{-1, -1, -1};
  std::array<Index, 3> worst_weighted{-1, -1, -1};
};

/// Checks every stored entry and its mirror image.
AntisymmetryReport check_antisymmetries(const InteractionTensor& t);
/// Exhaustive over all m^3 triples.
AntisymmetryReport check_antisymmetries(const DenseTensor& t, const Eigen::VectorXd& eigenvalues);

/// check_antisymmetries, throwing Error(verification) naming the worst
/// triple when either defect exceeds tol.
AntisymmetryReport verify_antisymmetries(const InteractionTensor& t, double tol);

/// Cache file: "SQGT", u32 version, 32-byte basis hash, u32 m, u64 count,
/// count x (u32 j, u32 k, u32 l, f64 value), u64 FNV-1a of the entry bytes.
/// All little-endian. Written to a temporary and renamed into place.
void save_cache(const InteractionTensor& t, const std::filesystem::path& path);

/// Throws Error(cache_invalid) on magic, version or basis mismatch and
/// Error(corruption) on truncation or checksum mismatch.
InteractionTensor load_cache(const std::filesystem::path& path, const EigenBasis& basis);

constexpr std::uint32_t cache_version = 1;

}  // namespace sqg
