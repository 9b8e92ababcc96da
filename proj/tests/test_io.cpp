#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "sqg/basis.hpp"
#include "sqg/commutators.hpp"
#include "sqg/error.hpp"
#include "sqg/io.hpp"
#include "sqg/limits.hpp"
#include "sqg/solver.hpp"
#include "sqg/spectral.hpp"
#include "sqg/tensor.hpp"

using namespace sqg;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no sqg::Error thrown");
  return ErrorKind::io;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("doubles round-trip through text") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 200; ++i) rows.push_back({std::exp(u(rng)), -std::exp(u(rng)), u(rng)});
  rows.push_back({0.0, -0.0, std::numeric_limits<double>::denorm_min()});
  rows.push_back({NAN, INFINITY, -INFINITY});
  const auto text = to_csv({"abc", 42}, {"a", "b", "c"}, rows);
  CHECK(text.find(',') != std::string::npos);
  const auto t = parse_csv(text);
  REQUIRE(t.rows.size() == rows.size());
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    for (int j = 0; j < 3; ++j) CHECK(t.rows[i][j] == rows[i][j]);
  CHECK(std::isnan(t.rows.back()[0]));
  CHECK(t.rows.back()[1] == INFINITY);
  CHECK(t.rows.back()[2] == -INFINITY);
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-300) == "1e-300");
}

TEST_CASE("CSV stamp and schema errors") {
  const ArtifactStamp stamp{"deadbeef", 0xabc};
  CHECK(stamp.checksum_hex() == "0000000000000abc");
  CHECK(stamp.comment_line() == "# config_hash=deadbeef tensor_checksum=0000000000000abc");
  const auto t = parse_csv(to_csv(stamp, {"x", "y"}, {{1.0, 2.0}}));
  REQUIRE(t.comments.size() == 1);
  CHECK(t.comments[0] == " config_hash=deadbeef tensor_checksum=0000000000000abc");
  CHECK(t.column("y") == 1);
  CHECK(kind_of([&] { t.column("z"); }) == ErrorKind::io);
  CHECK(message_of([&] { t.column("dist_to_inviscid"); }).find("dist_to_inviscid") != std::string::npos);

  CHECK(kind_of([] { parse_csv("a,b\n1,x\n"); }) == ErrorKind::io);
  CHECK(kind_of([] { parse_csv("a,b\n1,2,3\n"); }) == ErrorKind::io);
  CHECK(kind_of([] { parse_csv("# only a comment\n"); }) == ErrorKind::io);
  CHECK(kind_of([] { parse_csv("a\n1.5e\n"); }) == ErrorKind::io);
  CHECK(parse_csv("a,b\r\n1,2\r\n").rows[0][1] == 2.0);
}

TEST_CASE("config hash") {
  const nlohmann::json a = {{"x", 1}, {"y", {1, 2}}};
  const nlohmann::json b = {{"y", {1, 2}}, {"x", 1}};
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 64);
  CHECK(config_hash(a) != config_hash({{"x", 2}, {"y", {1, 2}}}));
}

TEST_CASE("atomic text writes") {
  const auto dir = fs::temp_directory_path() / "sqg_test_io_write";
  fs::remove_all(dir);
  const auto path = dir / "nested" / "f.csv";
  write_text(path, "hello\n");
  CHECK(fs::exists(path));
  CHECK_FALSE(fs::exists(dir / "nested" / "f.csv.partial"));
  write_text(path, "x,y\n1,2\n");
  CHECK(read_csv(path).rows[0][1] == 2.0);
  fs::remove_all(dir);
  CHECK(kind_of([&] { read_csv(path); }) == ErrorKind::io);
}

TEST_CASE("artifact schemas") {
  const auto b = build_square_basis(16);
  const auto t = build_tensor(b, 16);
  const ArtifactStamp stamp{"cafe", t.checksum()};
  const nlohmann::json cfg = {{"k", 1}};

  SUBCASE("trajectory") {
    SolverConfig c;
    c.dt = 0.05;
    c.T = 0.5;
    c.snapshot_stride = 2;
    const auto traj = integrate(unit_field(b, 0, 16), c, t);
    const auto csv = parse_csv(trajectory_csv(b, traj, stamp));
    CHECK(csv.header == trajectory_columns);
    REQUIRE(csv.rows.size() == traj.snapshots.size());
    const auto E = csv.column("E");
    for (const auto& r : csv.rows) CHECK(r[E] == 0.5);
    CHECK(csv.rows.back()[csv.column("t")] == 0.5);
    CHECK(csv.comments[0].find(stamp.checksum_hex()) != std::string::npos);
    const auto j = trajectory_json(b, traj, cfg, stamp);
    CHECK(j.at("config_hash") == "cafe");
    CHECK(j.at("tensor_checksum") == stamp.checksum_hex());
    CHECK(j.at("solver").at("dt") == 0.05);
    CHECK(j.at("residuals").at("energy_balance").get<double>() <= 1e-14);
  }
  SUBCASE("sweep") {
    SweepConfig sc;
    sc.m = 16;
    sc.theta0 = random_field(b, 16, 1);
    sc.nu_list = {0.1, 0.01};
    sc.solver.dt = 0.01;
    sc.solver.T = 0.2;
    const auto rep = run_sweep(b, sc, t);
    const auto csv = parse_csv(sweep_csv(rep, stamp));
    CHECK(csv.header == sweep_columns);
    CHECK(csv.rows.size() == 3);
    CHECK(csv.rows[2][csv.column("nu")] == 0.0);
    const auto j = sweep_json(rep, cfg, stamp);
    CHECK(j.at("complete") == true);
    CHECK(j.at("rows").size() == 3);
    CHECK(j.at("fits").contains("drift_slope"));
    CHECK(j.at("rows")[0].at("dist_to_inviscid").get<double>() == csv.rows[0][csv.column("dist_to_inviscid")]);
  }
  SUBCASE("commutator") {
    const auto big = build_square_basis(64);
    const auto sat = commutator_saturation(big, Multiplier::sine_product(), {16, 32}, 3);
    const auto csv = parse_csv(commutator_csv(sat, {"cafe", 0}));
    CHECK(csv.header == commutator_columns);
    CHECK(csv.rows.size() == 6);
    CHECK(csv.rows[3][csv.column("M")] == 32.0);
    CHECK(csv.rows[3][csv.column("sample")] == 0.0);
    const auto j = commutator_json(sat, cfg, {"cafe", 0});
    CHECK(j.at("reports").size() == 2);
    CHECK(j.at("growth").size() == 1);
    CHECK(j.at("saturation_flag").is_boolean());
    CHECK(j.at("tensor_checksum") == "0000000000000000");
  }
}
