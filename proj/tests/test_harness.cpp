#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gsq/experiments.hpp"
#include "test_util.hpp"

using namespace gsq;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gsq_test_" + name);
  fs::remove_all(p);
  return p;
}

const char* kBrownianConfig = R"(# small brownian run
[experiment]
name = brownian-pi
seed = 77

[group]
lambda = 1

[hamiltonian]
h = zero | random:2:7
u = 1, 0
v = 0.6, 0:0.8

[schedule]
t = 0.5
r = 1, 16
paths = 3000

[estimator]
steps_per_unit = 64
)";

}  // namespace

TEST_CASE("config round trip", "[harness]") {
  for (const char* name : {"spectrum", "quantize", "propagate", "brownian-pi", "smooth-pi", "signature"}) {
    const auto c = harness::preset(name);
    const auto back = harness::parse_config(harness::emit_config(c));
    CHECK(back == c);
    CHECK(harness::emit_config(back) == harness::emit_config(c));
  }
  auto c = harness::parse_config(kBrownianConfig);
  CHECK(c.seed == 77u);
  CHECK(c.hamiltonians == std::vector<std::string>{"zero", "random:2:7"});
  CHECK(c.r == std::vector<double>{1.0, 16.0});
  c.v = {0.1, cplx(0.3, -1.0 / 3.0)};
  c.t = 0.1 + 0.2;
  c.lambda = {{0}, {3}};
  CHECK(harness::parse_config(harness::emit_config(c)) == c);
}

TEST_CASE("config errors carry line and field", "[harness]") {
  const std::string no_seed = "[experiment]\nname = spectrum\n";
  try {
    harness::parse_config(no_seed);
    FAIL("missing seed accepted");
  } catch (const ConfigParseError& e) {
    CHECK(e.field == "experiment.seed");
  }
  const std::string bad_value = "[experiment]\nname = spectrum\nseed = 1\n[schedule]\n\nt = fast\n";
  try {
    harness::parse_config(bad_value);
    FAIL("bad value accepted");
  } catch (const ConfigParseError& e) {
    CHECK(e.field == "schedule.t");
    CHECK(e.line == 6u);
  }
  const std::string unknown = "[experiment]\nname = spectrum\nseed = 1\ncolour = red\n";
  try {
    harness::parse_config(unknown);
    FAIL("unknown key accepted");
  } catch (const ConfigParseError& e) {
    CHECK(e.field == "experiment.colour");
    CHECK(e.line == 4u);
  }
  try {
    harness::parse_config("[experiment]\nname = spectrum\nthis line has no equals sign\n");
    FAIL("syntax error accepted");
  } catch (const ConfigParseError& e) {
    CHECK(e.line == 3u);
  }
  CHECK_THROWS_AS(harness::parse_config("[experiment]\nname = spectrum\nseed = 1\n[schedule]\nr =\n"), ConfigParseError);
  CHECK_THROWS_AS(harness::parse_config("[experiment]\nname = dance\nseed = 1\n"), ConfigParseError);
  CHECK_THROWS_AS(harness::parse_config("[experiment]\nname = spectrum\nseed = -4\n"), ConfigParseError);
  CHECK_THROWS_AS(harness::load_config("/nonexistent/gsq.ini"), IoError);
}

TEST_CASE("config hash ignores workers and output directory", "[harness]") {
  auto c = harness::preset("brownian-pi");
  const auto h = harness::config_hash(c);
  c.workers = 8;
  c.out = "elsewhere";
  CHECK(harness::config_hash(c) == h);
  c.seed += 1;
  CHECK(harness::config_hash(c) != h);
}

TEST_CASE("memory guard", "[harness]") {
  auto c = harness::preset("spectrum");
  c.cutoff = 60;
  CHECK_THROWS_AS(harness::run_experiment(c), ResourceLimitError);
  c.cutoff = 8;
  c.memory_mib = 0.01;
  CHECK_THROWS_AS(harness::check_memory(c), ResourceLimitError);
  c.memory_mib = 512;
  CHECK_NOTHROW(harness::check_memory(c));
}

TEST_CASE("spectrum and quantize experiments", "[harness]") {
  auto c = harness::preset("spectrum");
  c.cutoff = 4;
  const auto rec = harness::run_experiment(c);
  CHECK(rec.passed());
  const auto& t = rec.tables().front();
  REQUIRE(t.rows.size() == 5u);
  for (const auto& row : t.rows) {
    const double two_j = std::stod(row[1]);
    CHECK(std::stod(row[2]) == Catch::Approx(two_j / 4.0 + 0.125).margin(1e-9));
    CHECK(row[5] == row[6]);
  }

  auto q = harness::preset("quantize");
  q.hamiltonians = {"const:1"};
  const auto qr = harness::run_experiment(q);
  CHECK(qr.passed());
  CHECK(std::stod(qr.tables().front().rows.front()[6]) < 1e-12);
}

TEST_CASE("brownian experiment, reports and determinism", "[harness]") {
  auto c = harness::parse_config(kBrownianConfig);
  const auto rec = harness::run_experiment(c);
  CHECK(rec.passed());
  const auto& t = rec.tables().front();
  CHECK(t.columns[0] == "lambda");
  // h = 0: the estimate column is <u|v> = 0.6 within 3 std_error
  for (const auto& row : t.rows)
    if (row[1] == "zero") {
      CHECK(std::stod(row[9]) == 0.6);
      CHECK(std::abs(std::stod(row[6]) - 0.6) <= 3.0 * std::stod(row[8]));
    }
  // plot data for the nonzero Hamiltonian trends down in r
  const auto& plot = rec.plots()[1];
  REQUIRE(plot.points.size() == 2u);
  CHECK(plot.points[1][1] < plot.points[0][1]);

  const fs::path a = scratch("run_a"), b = scratch("run_b");
  const auto files = harness::emit_report(rec, a.string());
  CHECK(files.size() == 1 + rec.tables().size() + rec.plots().size());
  c.workers = 3;
  harness::emit_report(harness::run_experiment(c), b.string());
  for (const char* f : {"brownian.csv", "brownian_0_zero.dat", "brownian_1_random_2_7.dat"})
    CHECK(slurp(a / f) == slurp(b / f));
  CHECK(slurp(a / "brownian.csv").rfind("# gsq csv v1 table=brownian\n", 0) == 0);

  // the JSON summary parses and carries the checks
  const auto j = nlohmann::json::parse(slurp(a / "brownian-pi.json"));
  CHECK(j["schema"] == "gsq.record/1");
  CHECK(j["passed"] == true);
  CHECK(j["seed"] == 77);
}

TEST_CASE("report errors leave no partial output", "[harness]") {
  harness::ExperimentRecord empty;
  empty.experiment = "brownian-pi";
  const fs::path d = scratch("empty");
  CHECK_THROWS(harness::emit_report(empty, d.string()));
  CHECK_FALSE(fs::exists(d));
  empty.add_table("brownian", {"a"});
  CHECK_THROWS(harness::emit_report(empty, d.string()));
  CHECK_FALSE(fs::exists(d));

  // a regular file where the directory should be
  const fs::path blocker = scratch("blocker");
  std::ofstream(blocker) << "x";
  harness::ExperimentRecord one;
  one.experiment = "spectrum";
  one.add_table("spectrum", {"a"}).rows.push_back({"1"});
  try {
    harness::emit_report(one, (blocker / "sub").string());
    FAIL("write into a file path accepted");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find(blocker.string()) != std::string::npos);
  }
}

TEST_CASE("rough path JSON round trip", "[harness]") {
  rng::Stream s(101, 0, rng::kTestData);
  const auto ebm = roughpath::enhance_brownian(roughpath::brownian_increments(3, 1.0, 6, s), 1.0, 6, 3);
  const auto back = harness::rough_path_from_json(nlohmann::json::parse(harness::to_json(ebm).dump()));
  REQUIRE(back.size() == ebm.size());
  CHECK(back.times == ebm.times);
  for (std::size_t k = 0; k < ebm.size(); ++k) {
    CHECK(back.values[k].v == ebm.values[k].v);
    CHECK(back.values[k].m == ebm.values[k].m);
  }
  auto broken = harness::to_json(ebm);
  broken["level2"][2][0][0] = 99.0;
  CHECK_THROWS_AS(harness::rough_path_from_json(broken), NonGroupElementError);
  broken["schema"] = "other";
  CHECK_THROWS_AS(harness::rough_path_from_json(broken), IoError);
}

TEST_CASE("signature and smooth experiments", "[harness]") {
  const auto sig = harness::run_experiment(harness::preset("signature"));
  CHECK(sig.passed());
  CHECK(sig.documents().size() == 2u);
  // level-1 entries equal the path increment: 2 + 4 + 8 + 1 rows at depth 3, d = 2
  CHECK(sig.tables().front().rows.size() == 15u);

  auto sm = harness::preset("smooth-pi");
  sm.hamiltonians = {"zero"};
  sm.u = sm.v = {1.0, 0.0};
  sm.r = {2};
  sm.n = {4, 16};
  sm.paths = 1500;
  const auto rec = harness::run_experiment(sm);
  CHECK(rec.passed());
  CHECK(rec.plots().front().x_label == "n");
  sm.r = {1, 2, 3};
  CHECK_THROWS_AS(harness::run_experiment(sm), ConfigParseError);
}
