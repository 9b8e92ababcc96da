#include "sqg/tensor.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <optional>
#include <tuple>

#include "sqg/error.hpp"
#include "sqg/hash.hpp"

namespace sqg {

namespace {

constexpr double pi = std::numbers::pi;
constexpr char magic[4] = {'S', 'Q', 'G', 'T'};
constexpr std::size_t header_size = 4 + 4 + 32 + 4 + 8;
constexpr std::size_t entry_size = 4 + 4 + 4 + 8;

template <class T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t b = 0; b < sizeof(T); ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

template <class T>
T get_le(const std::uint8_t* p) {
  T v = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) v |= static_cast<T>(p[b]) << (8 * b);
  return v;
}

std::vector<std::uint8_t> entry_payload(const std::vector<InteractionTensor::Entry>& entries) {
  std::vector<std::uint8_t> out;
  out.reserve(entries.size() * entry_size);
  for (const auto& e : entries) {
    put_le(out, e.j);
    put_le(out, e.k);
    put_le(out, e.l);
    put_le(out, std::bit_cast<std::uint64_t>(e.value));
  }
  return out;
}

bool entry_less(const InteractionTensor::Entry& a, const InteractionTensor::Entry& b) {
  return std::tie(a.j, a.k, a.l) < std::tie(b.j, b.k, b.l);
}

// (delta_{r,p+q} + delta_{r,p-q} - delta_{r,q-p}); the integral is pi/4 times this.
int sin_cos_sin(int p, int q, int r) {
  return (r == p + q) + (r == p - q) - (r == q - p);
}

// gamma_jkl = numerator / (2 pi sqrt(lambda_j)) with an integer numerator.
int closed_form_numerator(const std::array<int, 2>& j, const std::array<int, 2>& k,
                          const std::array<int, 2>& l) {
  const auto [aj, bj] = j;
  const auto [ak, bk] = k;
  const auto [al, bl] = l;
  return -bj * ak * sin_cos_sin(aj, ak, al) * sin_cos_sin(bk, bj, bl) +
         aj * bk * sin_cos_sin(ak, aj, al) * sin_cos_sin(bj, bk, bl);
}

struct PairIndex {
  std::vector<std::pair<Index, Index>> pairs;  // (k, l), k < l, row-major
};

PairIndex upper_pairs(Index m) {
  PairIndex p;
  p.pairs.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
  for (Index k = 0; k < m; ++k)
    for (Index l = k + 1; l < m; ++l) p.pairs.emplace_back(k, l);
  return p;
}

// The basis itself, or the same modes on a grid of a different order.
const EigenBasis& quadrature_basis(const EigenBasis& basis, int order,
                                   std::optional<EigenBasis>& storage) {
  if (order < 0) throw Error(ErrorKind::config, "tensor quadrature_order must be non-negative");
  if (order == 0 || order == basis.domain().quadrature_order) return basis;
  const int m_max = static_cast<int>(basis.size());
  if (basis.domain().kind == DomainKind::square)
    storage.emplace(build_square_basis(m_max, order, EigenBasis::SquarePath::separable));
  else
    storage.emplace(build_disk_basis(m_max, order));
  return *storage;
}

// Columns of gamma_{., k, l} for a batch of (k, l) pairs:
//   R = Dx^T (wt . dy_k . w_l) - Dy^T (wt . dx_k . w_l), rows scaled by lambda^{-1/2}.
Eigen::MatrixXd quadrature_columns(const EigenBasis::Tables& t, const Eigen::VectorXd& wt,
                                   const Eigen::VectorXd& inv_sqrt_lambda,
                                   const std::vector<std::pair<Index, Index>>& pairs,
                                   std::size_t begin, std::size_t end) {
  const Index npts = wt.size();
  const auto count = static_cast<Index>(end - begin);
  Eigen::MatrixXd a(npts, count), b(npts, count);
  for (Index c = 0; c < count; ++c) {
    const auto [k, l] = pairs[begin + static_cast<std::size_t>(c)];
    const Eigen::VectorXd wl = wt.cwiseProduct(t.values.col(l));
    a.col(c) = t.dx.col(k).cwiseProduct(wl);
    b.col(c) = t.dy.col(k).cwiseProduct(wl);
  }
  Eigen::MatrixXd r = t.dx.transpose() * b;
  r.noalias() -= t.dy.transpose() * a;
  return inv_sqrt_lambda.asDiagonal() * r;
}

}  // namespace

std::string to_string(TensorMethod m) {
  switch (m) {
    case TensorMethod::automatic: return "automatic";
    case TensorMethod::closed_form: return "closed_form";
    case TensorMethod::quadrature: return "quadrature";
  }
  return "unknown";
}

TensorMethod tensor_method_from_string(const std::string& s) {
  if (s == "automatic") return TensorMethod::automatic;
  if (s == "closed_form") return TensorMethod::closed_form;
  if (s == "quadrature") return TensorMethod::quadrature;
  throw Error(ErrorKind::config,
              "unknown tensor method '" + s + "' (expected automatic, closed_form or quadrature)");
}

// ---------------------------------------------------------------------------

InteractionTensor::InteractionTensor(Index m, std::vector<Entry> entries, std::string basis_id,
                                     std::array<std::uint8_t, 32> basis_hash,
                                     Eigen::VectorXd eigenvalues, TensorBuildMeta meta)
    : m_(m),
      entries_(std::move(entries)),
      basis_id_(std::move(basis_id)),
      basis_hash_(basis_hash),
      eigenvalues_(std::move(eigenvalues)),
      meta_(std::move(meta)) {
  if (m_ < 0) throw Error(ErrorKind::config, "tensor size must be non-negative");
  if (eigenvalues_.size() != m_)
    throw Error(ErrorKind::config, "tensor needs exactly m eigenvalues");
  const auto um = static_cast<std::uint32_t>(m_);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.j >= um || e.k >= e.l || e.l >= um)
      throw Error(ErrorKind::config, "tensor entry (" + std::to_string(e.j) + "," +
                                         std::to_string(e.k) + "," + std::to_string(e.l) +
                                         ") violates the k < l < m storage convention");
    if (i > 0 && !entry_less(entries_[i - 1], e))
      throw Error(ErrorKind::config, "tensor entries must be strictly sorted by (j, k, l)");
  }
  checksum_ = fnv1a64(entry_payload(entries_));
}

double InteractionTensor::max_abs() const {
  double r = 0.0;
  for (const auto& e : entries_) r = std::max(r, std::abs(e.value));
  return r;
}

double InteractionTensor::operator()(Index j, Index k, Index l) const {
  if (k == l) return 0.0;
  double sign = 1.0;
  if (k > l) {
    std::swap(k, l);
    sign = -1.0;
  }
  const Entry key{static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(k),
                  static_cast<std::uint32_t>(l), 0.0};
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), key, entry_less);
  if (it == entries_.end() || it->j != key.j || it->k != key.k || it->l != key.l) return 0.0;
  return sign * it->value;
}

Eigen::VectorXd InteractionTensor::contract(const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  if (theta.size() != m_)
    throw Error(ErrorKind::binding, "coefficient vector of length " + std::to_string(theta.size()) +
                                        " does not match tensor size " + std::to_string(m_));
  Eigen::VectorXd n = Eigen::VectorXd::Zero(m_);
  for (const auto& e : entries_) {
    const double gj = e.value * theta(e.j);
    n(e.l) += gj * theta(e.k);
    n(e.k) -= gj * theta(e.l);
  }
  return n;
}

// ---------------------------------------------------------------------------

double closed_form_square_entry(const std::array<int, 2>& j, const std::array<int, 2>& k,
                                const std::array<int, 2>& l) {
  for (const auto* idx : {&j, &k, &l})
    if ((*idx)[0] < 1 || (*idx)[1] < 1)
      throw Error(ErrorKind::config, "square multi-indices must be positive");
  const int n = closed_form_numerator(j, k, l);
  if (n == 0) return 0.0;
  const double lambda_j = j[0] * j[0] + j[1] * j[1];
  return n / (2.0 * pi * std::sqrt(lambda_j));
}

InteractionTensor build_tensor(const EigenBasis& basis, Index m, const TensorBuildConfig& cfg) {
  if (m < 1 || m > basis.size())
    throw Error(ErrorKind::config, "tensor size " + std::to_string(m) + " outside 1.." +
                                       std::to_string(basis.size()));
  if (!(cfg.prune_epsilon >= 0.0)) throw Error(ErrorKind::config, "prune_epsilon must be >= 0");
  const auto start = std::chrono::steady_clock::now();

  TensorMethod method = cfg.method;
  if (method == TensorMethod::automatic)
    method = basis.domain().kind == DomainKind::square ? TensorMethod::closed_form
                                                       : TensorMethod::quadrature;
  if (method == TensorMethod::closed_form && basis.domain().kind != DomainKind::square)
    throw Error(ErrorKind::config, "closed-form tensor entries exist only on the square");

  const ParallelContext ctx{std::max(1u, cfg.parallel_width)};
  const auto pairs = upper_pairs(m).pairs;
  const Eigen::VectorXd inv_sqrt_lambda = basis.eigenvalue_power(-0.5).head(m);
  std::vector<std::vector<InteractionTensor::Entry>> chunks(ctx.width);
  std::vector<std::size_t> pruned(ctx.width, 0);
  int order = basis.domain().quadrature_order;

  auto keep = [&](std::size_t chunk, Index j, Index k, Index l, double v) {
    if (std::abs(v) <= cfg.prune_epsilon) {
      if (v != 0.0 || cfg.prune_epsilon > 0.0) ++pruned[chunk];
      return;
    }
    chunks[chunk].push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(k),
                             static_cast<std::uint32_t>(l), v});
  };

  if (method == TensorMethod::closed_form) {
    const auto& modes = basis.modes();
    parallel_for(ctx, pairs.size(), [&](std::size_t begin, std::size_t end, std::size_t c) {
      for (std::size_t p = begin; p < end; ++p) {
        const auto [k, l] = pairs[p];
        for (Index j = 0; j < m; ++j) {
          if (j == k) continue;
          const int n = closed_form_numerator(modes[j].multi_index, modes[k].multi_index,
                                              modes[l].multi_index);
          keep(c, j, k, l, n == 0 ? 0.0 : n * inv_sqrt_lambda(j) / (2.0 * pi));
        }
      }
    });
  } else {
    std::optional<EigenBasis> storage;
    const EigenBasis& qb = quadrature_basis(basis, cfg.quadrature_order, storage);
    order = qb.domain().quadrature_order;
    const auto tables = qb.tables(m);
    const Eigen::VectorXd& wt = qb.grid().weights;
    constexpr std::size_t batch = 256;
    parallel_for(ctx, pairs.size(), [&](std::size_t begin, std::size_t end, std::size_t c) {
      for (std::size_t b0 = begin; b0 < end; b0 += batch) {
        const std::size_t b1 = std::min(end, b0 + batch);
        const Eigen::MatrixXd r = quadrature_columns(tables, wt, inv_sqrt_lambda, pairs, b0, b1);
        for (std::size_t p = b0; p < b1; ++p) {
          const auto [k, l] = pairs[p];
          const auto col = static_cast<Index>(p - b0);
          for (Index j = 0; j < m; ++j)
            if (j != k) keep(c, j, k, l, r(j, col));
        }
      }
    });
  }

  std::vector<InteractionTensor::Entry> entries;
  std::size_t total_pruned = 0;
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    entries.insert(entries.end(), chunks[c].begin(), chunks[c].end());
    total_pruned += pruned[c];
  }
  std::sort(entries.begin(), entries.end(), entry_less);

  TensorBuildMeta meta;
  meta.method = to_string(method);
  meta.quadrature_order = method == TensorMethod::closed_form ? 0 : order;
  meta.prune_epsilon = cfg.prune_epsilon;
  meta.parallel_width = ctx.width;
  meta.candidates = pairs.size() * static_cast<std::size_t>(m - 1);
  meta.stored = entries.size();
  meta.pruned = total_pruned;
  for (const auto& e : entries) meta.max_abs = std::max(meta.max_abs, std::abs(e.value));
  meta.fill_fraction =
      meta.candidates == 0 ? 0.0 : static_cast<double>(meta.stored) / static_cast<double>(meta.candidates);
  meta.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return InteractionTensor(m, std::move(entries), basis.id(), basis.descriptor_hash(),
                           basis.eigenvalues().head(m), std::move(meta));
}

DenseTensor quadrature_tensor_dense(const EigenBasis& basis, Index m, const ParallelContext& ctx) {
  if (m < 1 || m > basis.size())
    throw Error(ErrorKind::config, "tensor size " + std::to_string(m) + " outside 1.." +
                                       std::to_string(basis.size()));
  const auto t = basis.tables(m);
  const Eigen::VectorXd& wt = basis.grid().weights;
  const Eigen::VectorXd inv_sqrt_lambda = basis.eigenvalue_power(-0.5).head(m);
  DenseTensor out{m, std::vector<double>(static_cast<std::size_t>(m * m * m))};
  const Eigen::MatrixXd weighted_values = wt.asDiagonal() * t.values;
  parallel_for(ctx, static_cast<std::size_t>(m), [&](std::size_t begin, std::size_t end, std::size_t) {
    for (auto k = static_cast<Index>(begin); k < static_cast<Index>(end); ++k) {
      const Eigen::MatrixXd a = t.dx.col(k).asDiagonal() * weighted_values;
      const Eigen::MatrixXd b = t.dy.col(k).asDiagonal() * weighted_values;
      Eigen::MatrixXd r = t.dx.transpose() * b;
      r.noalias() -= t.dy.transpose() * a;
      for (Index j = 0; j < m; ++j)
        for (Index l = 0; l < m; ++l) out.data[(j * m + k) * m + l] = inv_sqrt_lambda(j) * r(j, l);
    }
  });
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void record(double defect, Index j, Index k, Index l, double& worst, std::array<Index, 3>& at) {
  if (defect > worst) {
    worst = defect;
    at = {j, k, l};
  }
}

}  // namespace

AntisymmetryReport check_antisymmetries(const InteractionTensor& t) {
  AntisymmetryReport rep;
  const auto& lam = t.eigenvalues();
  auto inv_sqrt = [&](Index i) { return 1.0 / std::sqrt(lam(i)); };
  for (const auto& e : t.entries()) {
    const Index j = e.j, k = e.k, l = e.l;
    // Stored entry and its (k, l) image.
    record(std::abs(t(j, k, l) + t(j, l, k)), j, k, l, rep.max_defect_kl, rep.worst_kl);
    record(std::abs(t(j, k, l) * inv_sqrt(l) + t(l, k, j) * inv_sqrt(j)), j, k, l,
           rep.max_defect_weighted, rep.worst_weighted);
    record(std::abs(t(j, l, k) * inv_sqrt(k) + t(k, l, j) * inv_sqrt(j)), j, l, k,
           rep.max_defect_weighted, rep.worst_weighted);
    rep.count_checked += 2;
  }
  return rep;
}

AntisymmetryReport check_antisymmetries(const DenseTensor& t, const Eigen::VectorXd& eigenvalues) {
  AntisymmetryReport rep;
  const Index m = t.m;
  if (eigenvalues.size() < m) throw Error(ErrorKind::config, "too few eigenvalues for tensor");
  const Eigen::VectorXd inv_sqrt = eigenvalues.head(m).cwiseSqrt().cwiseInverse();
  for (Index j = 0; j < m; ++j)
    for (Index k = 0; k < m; ++k)
      for (Index l = 0; l < m; ++l) {
        record(std::abs(t(j, k, l) + t(j, l, k)), j, k, l, rep.max_defect_kl, rep.worst_kl);
        record(std::abs(t(j, k, l) * inv_sqrt(l) + t(l, k, j) * inv_sqrt(j)), j, k, l,
               rep.max_defect_weighted, rep.worst_weighted);
        ++rep.count_checked;
      }
  return rep;
}

AntisymmetryReport verify_antisymmetries(const InteractionTensor& t, double tol) {
  const auto rep = check_antisymmetries(t);
  auto triple = [](const std::array<Index, 3>& a) {
    return "(" + std::to_string(a[0]) + "," + std::to_string(a[1]) + "," + std::to_string(a[2]) + ")";
  };
  if (rep.max_defect_kl > tol)
    throw Error(ErrorKind::verification, "antisymmetry in (k,l) violated: defect " +
                                             std::to_string(rep.max_defect_kl) + " at (j,k,l) = " +
                                             triple(rep.worst_kl) + " (0-based)");
  if (rep.max_defect_weighted > tol) {
    const auto& w = rep.worst_weighted;
    throw Error(ErrorKind::verification,
                "weighted antisymmetry violated: defect " + std::to_string(rep.max_defect_weighted) +
                    " at (j,k,l) = " + triple(w) + " against (l,k,j) = " +
                    triple({w[2], w[1], w[0]}) + " (0-based)");
  }
  return rep;
}

// ---------------------------------------------------------------------------

void save_cache(const InteractionTensor& t, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(std::begin(magic), std::end(magic));
  put_le(bytes, cache_version);
  bytes.insert(bytes.end(), t.basis_hash().begin(), t.basis_hash().end());
  put_le(bytes, static_cast<std::uint32_t>(t.m()));
  put_le(bytes, static_cast<std::uint64_t>(t.entries().size()));
  const auto payload = entry_payload(t.entries());
  bytes.insert(bytes.end(), payload.begin(), payload.end());
  put_le(bytes, fnv1a64(payload));

  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::io, "cannot move tensor cache into place at " + path.string());
  }
}

InteractionTensor load_cache(const std::filesystem::path& path, const EigenBasis& basis) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open tensor cache " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  const std::string where = "tensor cache " + path.string() + ": ";

  if (bytes.size() < 4 || !std::equal(std::begin(magic), std::end(magic), bytes.begin()))
    throw Error(ErrorKind::cache_invalid, where + "bad magic");
  if (bytes.size() < header_size) throw Error(ErrorKind::corruption, where + "truncated header");
  const auto version = get_le<std::uint32_t>(bytes.data() + 4);
  if (version != cache_version)
    throw Error(ErrorKind::cache_invalid, where + "version " + std::to_string(version) +
                                              ", expected " + std::to_string(cache_version));
  if (!std::equal(basis.descriptor_hash().begin(), basis.descriptor_hash().end(), bytes.begin() + 8))
    throw Error(ErrorKind::cache_invalid, where + "built for a different basis");
  const auto m = get_le<std::uint32_t>(bytes.data() + 40);
  const auto count = get_le<std::uint64_t>(bytes.data() + 44);
  if (m < 1 || m > basis.size())
    throw Error(ErrorKind::cache_invalid, where + "tensor size " + std::to_string(m) +
                                              " does not fit the basis");
  if (count > (bytes.size() - header_size) / entry_size ||
      bytes.size() != header_size + count * entry_size + 8)
    throw Error(ErrorKind::corruption, where + "file length does not match entry count " +
                                           std::to_string(count));

  const std::uint8_t* payload = bytes.data() + header_size;
  const std::size_t payload_size = count * entry_size;
  const auto stored_sum = get_le<std::uint64_t>(payload + payload_size);
  if (fnv1a64({payload, payload_size}) != stored_sum)
    throw Error(ErrorKind::corruption, where + "checksum mismatch");

  std::vector<InteractionTensor::Entry> entries(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t* p = payload + i * entry_size;
    entries[i] = {get_le<std::uint32_t>(p), get_le<std::uint32_t>(p + 4),
                  get_le<std::uint32_t>(p + 8), std::bit_cast<double>(get_le<std::uint64_t>(p + 12))};
  }
  TensorBuildMeta meta;
  meta.method = "cache";
  meta.stored = entries.size();
  for (const auto& e : entries) meta.max_abs = std::max(meta.max_abs, std::abs(e.value));
  meta.candidates = static_cast<std::size_t>(m) * (m - 1) / 2 * (m - 1);
  meta.fill_fraction =
      meta.candidates == 0 ? 0.0 : static_cast<double>(meta.stored) / static_cast<double>(meta.candidates);
  try {
    return InteractionTensor(m, std::move(entries), basis.id(), basis.descriptor_hash(),
                             basis.eigenvalues().head(m), std::move(meta));
  } catch (const Error& e) {
    throw Error(ErrorKind::corruption, where + e.what());
  }
}

}  // namespace sqg
