#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>

#include "sqg/basis.hpp"
#include "sqg/error.hpp"
#include "sqg/tensor.hpp"

using namespace sqg;
namespace fs = std::filesystem;

namespace {

// Brute-force midpoint quadrature of lambda_j^{-1/2} int (grad^perp w_j . grad w_k) w_l
// for w = (2/pi) sin(ax) sin(by), written out directly from the definition.
double oracle_gamma(std::array<int, 2> j, std::array<int, 2> k, std::array<int, 2> l, int n = 48) {
  const double pi = std::numbers::pi;
  const double h = pi / n;
  const double c = 2.0 / pi;
  double sum = 0.0;
  for (int p = 0; p < n; ++p) {
    const double x = (p + 0.5) * h;
    for (int q = 0; q < n; ++q) {
      const double y = (q + 0.5) * h;
      const double jx = c * j[0] * std::cos(j[0] * x) * std::sin(j[1] * y);
      const double jy = c * j[1] * std::sin(j[0] * x) * std::cos(j[1] * y);
      const double kx = c * k[0] * std::cos(k[0] * x) * std::sin(k[1] * y);
      const double ky = c * k[1] * std::sin(k[0] * x) * std::cos(k[1] * y);
      const double wl = c * std::sin(l[0] * x) * std::sin(l[1] * y);
      sum += (-jy * kx + jx * ky) * wl;
    }
  }
  return sum * h * h / std::sqrt(double(j[0] * j[0] + j[1] * j[1]));
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

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("closed-form entries") {
  const double want = 3.0 / (2.0 * std::sqrt(2.0) * std::numbers::pi);
  CHECK(want == doctest::Approx(0.3376186185589148).epsilon(1e-15));
  CHECK(closed_form_square_entry({1, 1}, {2, 1}, {1, 2}) == doctest::Approx(want).epsilon(1e-14));
  CHECK(oracle_gamma({1, 1}, {2, 1}, {1, 2}) == doctest::Approx(want).epsilon(1e-12));
  CHECK(closed_form_square_entry({1, 1}, {1, 2}, {2, 1}) == doctest::Approx(-want).epsilon(1e-14));
  // No compatible wavenumber triple in x: 1 + 1 and |1 - 1| both differ from 3.
  CHECK(closed_form_square_entry({1, 1}, {1, 2}, {3, 3}) == 0.0);
  CHECK(closed_form_square_entry({2, 3}, {2, 3}, {1, 1}) == 0.0);
  CHECK(closed_form_square_entry({2, 3}, {1, 4}, {1, 4}) == 0.0);
  CHECK(kind_of([] { closed_form_square_entry({0, 1}, {1, 1}, {1, 1}); }) == ErrorKind::config);
}

TEST_CASE("closed form and quadrature match the brute-force oracle") {
  const auto b = build_square_basis(16);
  const auto cf = build_tensor(b, 16, {.method = TensorMethod::closed_form});
  const auto qd = build_tensor(b, 16, {.method = TensorMethod::quadrature});
  double worst = 0.0;
  for (Index j = 0; j < 16; ++j)
    for (Index k = 0; k < 16; ++k)
      for (Index l = 0; l < 16; ++l) {
        const double o = oracle_gamma(b.modes()[j].multi_index, b.modes()[k].multi_index, b.modes()[l].multi_index);
        worst = std::max({worst, std::abs(cf(j, k, l) - o), std::abs(qd(j, k, l) - o)});
      }
  CHECK(worst < 1e-12);
}

TEST_CASE("structural zeros") {
  const auto b = build_square_basis(20);
  const auto t = build_tensor(b, 20);
  for (Index j = 0; j < 20; ++j)
    for (Index l = 0; l < 20; ++l) {
      CHECK(t(j, j, l) == 0.0);
      CHECK(t(l, j, j) == 0.0);
    }
  for (const auto& e : t.entries()) {
    CHECK(e.k < e.l);
    CHECK(e.j != e.k);
  }
}

TEST_CASE("antisymmetries hold on both domains") {
  const auto sq = build_square_basis(16);
  auto rep = verify_antisymmetries(build_tensor(sq, 16, {.method = TensorMethod::quadrature}), 1e-12);
  CHECK(rep.count_checked > 0);
  CHECK(rep.max_defect_kl <= 1e-12);
  CHECK(rep.max_defect_weighted <= 1e-12);

  const auto dense = quadrature_tensor_dense(sq, 12);
  const auto drep = check_antisymmetries(dense, sq.eigenvalues());
  CHECK(drep.count_checked == 12u * 12u * 12u);
  CHECK(drep.max_defect_kl <= 1e-12);
  CHECK(drep.max_defect_weighted <= 1e-12);

  const auto disk = build_disk_basis(12);
  const auto dt = build_tensor(disk, 12);
  CHECK(dt.meta().method == "quadrature");
  const auto disk_rep = check_antisymmetries(dt);
  CHECK(disk_rep.max_defect_weighted <= 1e-10);
  CHECK(dt.max_abs() > 0.1);
  CHECK(kind_of([&] { build_tensor(disk, 4, {.method = TensorMethod::closed_form}); }) == ErrorKind::config);
}

TEST_CASE("a corrupted entry is reported by triple") {
  const auto b = build_square_basis(16);
  const auto t = build_tensor(b, 16);
  auto entries = t.entries();
  auto& e = entries[entries.size() / 2];
  e.value += 1e-3;
  const InteractionTensor bad(t.m(), entries, t.basis_id(), t.basis_hash(), t.eigenvalues(), t.meta());
  try {
    verify_antisymmetries(bad, 1e-12);
    FAIL("expected a verification error");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::verification);
    const std::string what = err.what();
    // The corrupted value and its (k,l) mirror enter two weighted pairs.
    auto named = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
      const auto s = "(" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + ")";
      return what.find(s) != std::string::npos;
    };
    CHECK((named(e.j, e.k, e.l) || named(e.l, e.k, e.j) || named(e.j, e.l, e.k) || named(e.k, e.l, e.j)));
  }
}

TEST_CASE("m = 1 tensor is empty and passes vacuously") {
  const auto b = build_square_basis(4);
  const auto t = build_tensor(b, 1);
  CHECK(t.entries().empty());
  const auto rep = verify_antisymmetries(t, 1e-12);
  CHECK(rep.count_checked == 0);
  CHECK(t.contract(Eigen::VectorXd::Ones(1))(0) == 0.0);
}

TEST_CASE("contraction conserves energy and Hamiltonian") {
  const auto b = build_square_basis(40);
  const auto t = build_tensor(b, 40);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd th(40);
    for (auto& v : th) v = n(rng);
    const Eigen::VectorXd N = t.contract(th);
    const double scale = std::pow(th.norm(), 3);
    CHECK(std::abs(N.dot(th)) <= 1e-12 * scale);
    const Eigen::VectorXd w = b.eigenvalue_power(-0.5).head(40).cwiseProduct(th);
    CHECK(std::abs(N.dot(w)) <= 1e-12 * scale);

    // Against the naive triple sum over operator().
    if (trial == 0) {
      Eigen::VectorXd naive = Eigen::VectorXd::Zero(40);
      for (Index j = 0; j < 40; ++j)
        for (Index k = 0; k < 40; ++k)
          for (Index l = 0; l < 40; ++l) naive(l) += t(j, k, l) * th(j) * th(k);
      CHECK((naive - N).cwiseAbs().maxCoeff() < 1e-12 * N.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("pruning and build statistics") {
  const auto b = build_square_basis(24);
  const auto full = build_tensor(b, 24);
  CHECK(full.meta().stored == full.entries().size());
  CHECK(full.meta().pruned == 0);
  CHECK(full.meta().fill_fraction == doctest::Approx(double(full.meta().stored) / double(full.meta().candidates)));
  const double eps = 0.5 * full.max_abs();
  const auto pruned = build_tensor(b, 24, {.prune_epsilon = eps});
  CHECK(pruned.entries().size() < full.entries().size());
  // With a positive threshold every candidate is either stored or pruned.
  CHECK(pruned.meta().stored + pruned.meta().pruned == pruned.meta().candidates);
  for (const auto& e : pruned.entries()) CHECK(std::abs(e.value) > eps);
  CHECK(kind_of([&] { build_tensor(b, 24, {.prune_epsilon = -1.0}); }) == ErrorKind::config);
  CHECK(kind_of([&] { build_tensor(b, 25); }) == ErrorKind::config);
}

TEST_CASE("builds are bit-stable across parallel widths") {
  const auto b = build_square_basis(32);
  for (auto method : {TensorMethod::closed_form, TensorMethod::quadrature}) {
    const auto a = build_tensor(b, 32, {.parallel_width = 1, .method = method});
    const auto c = build_tensor(b, 32, {.parallel_width = 3, .method = method});
    CHECK(a.checksum() == c.checksum());
    CHECK(a.entries() == c.entries());
  }
}

TEST_CASE("cache round trip and failure modes") {
  TempDir dir("sqg_test_tensor_cache");
  const auto b = build_square_basis(32);
  const auto t = build_tensor(b, 32);
  const auto path = dir.path / "t.sqgt";
  save_cache(t, path);
  CHECK_FALSE(fs::exists(dir.path / "t.sqgt.partial"));

  const auto back = load_cache(path, b);
  CHECK(back.entries() == t.entries());
  CHECK(back.checksum() == t.checksum());
  CHECK(back.m() == 32);

  SUBCASE("different basis") {
    const auto other = build_square_basis(33);
    CHECK(kind_of([&] { load_cache(path, other); }) == ErrorKind::cache_invalid);
  }
  SUBCASE("truncated payload") {
    auto bytes = slurp(path);
    bytes.resize(bytes.size() - 13);
    spit(path, bytes);
    CHECK(kind_of([&] { load_cache(path, b); }) == ErrorKind::corruption);
  }
  SUBCASE("truncated header") {
    auto bytes = slurp(path);
    bytes.resize(20);
    spit(path, bytes);
    CHECK(kind_of([&] { load_cache(path, b); }) == ErrorKind::corruption);
  }
  SUBCASE("flipped payload byte") {
    auto bytes = slurp(path);
    bytes[bytes.size() / 2] ^= 0x10;
    spit(path, bytes);
    CHECK(kind_of([&] { load_cache(path, b); }) == ErrorKind::corruption);
  }
  SUBCASE("bad magic") {
    auto bytes = slurp(path);
    bytes[0] = 'X';
    spit(path, bytes);
    CHECK(kind_of([&] { load_cache(path, b); }) == ErrorKind::cache_invalid);
  }
  SUBCASE("future version") {
    auto bytes = slurp(path);
    bytes[4] = static_cast<char>(cache_version + 1);
    spit(path, bytes);
    CHECK(kind_of([&] { load_cache(path, b); }) == ErrorKind::cache_invalid);
  }
  SUBCASE("missing file") {
    CHECK(kind_of([&] { load_cache(dir.path / "absent.sqgt", b); }) == ErrorKind::io);
  }
}

TEST_CASE("cache header layout is little-endian") {
  TempDir dir("sqg_test_tensor_layout");
  const auto b = build_square_basis(8);
  const auto t = build_tensor(b, 8);
  save_cache(t, dir.path / "t.sqgt");
  const auto bytes = slurp(dir.path / "t.sqgt");
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "SQGT");
  CHECK(static_cast<unsigned char>(bytes[4]) == cache_version);
  CHECK(static_cast<unsigned char>(bytes[4 + 4 + 32]) == 8);
  CHECK(bytes.size() == 4 + 4 + 32 + 4 + 8 + t.entries().size() * 20 + 8);
}
