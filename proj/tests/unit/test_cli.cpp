#include "swarmcov/cli/commands.hpp"
#include "swarmcov/cli/scenario.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace swarmcov;
using namespace swarmcov::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = SWARMCOV_SCENARIO_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("swarmcov_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

const char* kSmallSwitching = R"(name: small
fields: coordinate
domain: {kind: box, lo: [0], hi: [1]}
control: {variant: switching, D: 0.05, k: 10, epsilon: 0.05}
target: {kind: sinusoid, amplitude: 0.5}
sim: {dt: 0.01, t_final: 1, n_particles: 500, seed: 4, snapshot_every: 10}
output: {metrics_cells: 10, snapshots: false}
)";

struct Captured {
  int code;
  std::string out;
  std::string err;
};

template <typename Fn>
Captured capture(Fn&& fn) {
  std::ostringstream out, err;
  const int code = fn(out, err);
  return {code, out.str(), err.str()};
}

CommandOptions single_thread(fs::path out) {
  CommandOptions o;
  o.out = std::move(out);
  o.threads = 1;
  return o;
}

}  // namespace

TEST_CASE("scenario files parse, serialize and parse back unchanged") {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(kScenarios)) {
    if (entry.path().extension() != ".yaml") continue;
    ++seen;
    CAPTURE(entry.path());
    const Scenario a = load_scenario(entry.path());
    const std::string once = serialize_scenario(a);
    const Scenario b = parse_scenario(once, a.base_dir);
    CHECK(serialize_scenario(b) == once);
    CHECK(scenario_json(a) == scenario_json(b));
  }
  CHECK(seen >= 6);
}

TEST_CASE("schema errors name the field") {
  const std::string base = kSmallSwitching;
  auto replaced = [&](const std::string& from, const std::string& to) {
    std::string s = base;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  CHECK_THROWS_WITH_AS(parse_scenario(replaced("dt: 0.01", "dt: 0")), doctest::Contains("sim.dt"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_scenario(replaced("dt: 0.01", "dt: -1")), doctest::Contains("sim.dt"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_scenario(replaced("k: 10", "kk: 10")), doctest::Contains("control.kk"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_scenario(replaced("variant: switching", "variant: teleport")),
                       doctest::Contains("control.variant"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_scenario(replaced("n_particles: 500", "n_particles: many")),
                       doctest::Contains("sim.n_particles"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("name: [unterminated"), ConfigError);
}

TEST_CASE("dt <= 0 exits with a usage error") {
  TempDir tmp;
  std::string text = kSmallSwitching;
  text.replace(text.find("dt: 0.01"), 8, "dt: 0");
  const fs::path file = tmp.write("bad.yaml", text);
  const auto r = capture([&](auto& o, auto& e) { return cmd_run(file, single_thread(tmp.path / "out"), o, e); });
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("sim.dt") != std::string::npos);
  CHECK_FALSE(fs::exists(tmp.path / "out" / "metrics.csv"));
}

TEST_CASE("missing scenario file exits with a usage error") {
  const auto r = capture([&](auto& o, auto& e) { return cmd_run("/nonexistent/x.yaml", CommandOptions{}, o, e); });
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("/nonexistent/x.yaml") != std::string::npos);
}

TEST_CASE("unwritable output exits with a domain error") {
  TempDir tmp;
  const fs::path file = tmp.write("s.yaml", kSmallSwitching);
  tmp.write("blocker", "x");
  const auto r = capture([&](auto& o, auto& e) { return cmd_run(file, single_thread(tmp.path / "blocker" / "sub"), o, e); });
  CHECK(r.code == kExitDomain);
}

TEST_CASE("a single uniform agent exports one trajectory") {
  TempDir tmp;
  const auto r = capture([&](auto& o, auto& e) {
    return cmd_run(kScenarios / "uniform_single.yaml", single_thread(tmp.path), o, e);
  });
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("final_l1=") != std::string::npos);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(tmp.path)) {
    if (entry.path().filename().string().rfind("snapshots_", 0) != 0) continue;
    ++files;
    std::ifstream in(entry.path());
    std::string header, row, extra;
    std::getline(in, header);
    CHECK(header == "t,particle_id,x1,x2,x3,motion_state");
    CHECK(std::getline(in, row));
    CHECK(row.find(",0,") != std::string::npos);
    CHECK_FALSE(std::getline(in, extra));
  }
  // t_final / dt = 100 steps, a snapshot every 10 plus the initial state
  CHECK(files == 11);
  const auto metrics = read_metrics_csv(tmp.path / "metrics.csv");
  CHECK(metrics.size() == 11);
  const auto run = nlohmann::json::parse(slurp(tmp.path / "run.json"));
  CHECK(run["provenance"]["seed"] == 3);
  CHECK(run["config"]["sim"]["n_particles"] == 1);
}

TEST_CASE("same scenario and seed give identical metrics bytes") {
  TempDir tmp;
  const fs::path file = tmp.write("s.yaml", kSmallSwitching);
  for (const char* dir : {"a", "b"}) {
    const auto r = capture([&](auto& o, auto& e) { return cmd_run(file, single_thread(tmp.path / dir), o, e); });
    REQUIRE(r.code == kExitOk);
  }
  CommandOptions threaded = single_thread(tmp.path / "c");
  threaded.threads = 3;
  REQUIRE(capture([&](auto& o, auto& e) { return cmd_run(file, threaded, o, e); }).code == kExitOk);
  CommandOptions reseeded = single_thread(tmp.path / "d");
  reseeded.seed = 99;
  REQUIRE(capture([&](auto& o, auto& e) { return cmd_run(file, reseeded, o, e); }).code == kExitOk);

  const std::string a = slurp(tmp.path / "a" / "metrics.csv");
  CHECK_FALSE(a.empty());
  CHECK(a == slurp(tmp.path / "b" / "metrics.csv"));
  CHECK(a == slurp(tmp.path / "c" / "metrics.csv"));
  CHECK(a != slurp(tmp.path / "d" / "metrics.csv"));
  CHECK(nlohmann::json::parse(slurp(tmp.path / "d" / "run.json"))["provenance"]["seed"] == 99);
}

TEST_CASE("jsonl export") {
  TempDir tmp;
  std::string text = kSmallSwitching;
  text.replace(text.find("snapshots: false"), 16, "snapshots: true, format: jsonl");
  const fs::path file = tmp.write("s.yaml", text);
  REQUIRE(capture([&](auto& o, auto& e) { return cmd_run(file, single_thread(tmp.path / "out"), o, e); }).code == kExitOk);
  std::ifstream in(tmp.path / "out" / "snapshots.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["positions"].size() == 500);
    CHECK(j["motion_state"].size() == 500);
    ++lines;
  }
  CHECK(lines == 11);
}

TEST_CASE("linear oracle decays log-linearly") {
  TempDir tmp;
  const auto r = capture([&](auto& o, auto& e) {
    return cmd_oracle(kScenarios / "linear_decay_1d.yaml", single_thread(tmp.path), o, e);
  });
  REQUIRE(r.code == kExitOk);
  const auto rows = read_metrics_csv(tmp.path / "metrics.csv");
  // least-squares line through log(l1) for t >= 0.2
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& row : rows) {
    CHECK(std::abs(row.total_mass - 1.0) <= 1e-12);
    if (row.t < 0.2) continue;
    const double y = std::log(row.l1_to_target);
    n += 1;
    sx += row.t;
    sy += y;
    sxx += row.t * row.t;
    sxy += row.t * y;
    syy += y * y;
  }
  REQUIRE(n >= 5);
  const double cov = sxy - sx * sy / n, vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
  CHECK(cov / vx < 0.0);
  CHECK(cov * cov / (vx * vy) >= 0.999);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].l1_to_target < rows[i - 1].l1_to_target);
}

TEST_CASE("oracle started at equilibrium stays flat") {
  TempDir tmp;
  const auto r = capture([&](auto& o, auto& e) {
    return cmd_oracle(kScenarios / "equilibrium_grid_2d.yaml", single_thread(tmp.path), o, e);
  });
  REQUIRE(r.code == kExitOk);
  const auto rows = read_metrics_csv(tmp.path / "metrics.csv");
  REQUIRE(rows.size() >= 2);
  for (const auto& row : rows) CHECK(row.l1_to_target <= 1e-12);
}

TEST_CASE("grid file that does not match the grid is rejected") {
  TempDir tmp;
  std::string text = slurp(kScenarios / "equilibrium_grid_2d.yaml");
  for (auto at = text.find("cells: [8, 8]"); at != std::string::npos; at = text.find("cells: [8, 8]")) {
    text.replace(at, 13, "cells: [10, 10]");
  }
  fs::create_directories(tmp.path / "targets");
  fs::copy_file(kScenarios / "targets" / "diagonal_8x8.csv", tmp.path / "targets" / "diagonal_8x8.csv");
  const fs::path file = tmp.write("mismatch.yaml", text);
  const auto r = capture([&](auto& o, auto& e) { return cmd_oracle(file, single_thread(tmp.path / "out"), o, e); });
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("target.file") != std::string::npos);
}

TEST_CASE("oracle needs a box of dimension one or two") {
  const auto r = capture([&](auto& o, auto& e) {
    return cmd_oracle(kScenarios / "sphere_caps.yaml", CommandOptions{}, o, e);
  });
  CHECK(r.code == kExitUsage);
}

TEST_CASE("output directory resolution") {
  Scenario s;
  s.name = "demo";
  CommandOptions opts;
  ::unsetenv(kOutDirEnv);
  CHECK(resolve_output_dir(s, opts) == fs::path("out") / "demo");
  ::setenv(kOutDirEnv, "/tmp/swarm_env", 1);
  CHECK(resolve_output_dir(s, opts) == fs::path("/tmp/swarm_env") / "demo");
  s.output.dir = "from_file";
  CHECK(resolve_output_dir(s, opts) == fs::path("from_file"));
  opts.out = "/tmp/flag";
  CHECK(resolve_output_dir(s, opts) == fs::path("/tmp/flag"));
  ::unsetenv(kOutDirEnv);
}

TEST_CASE("verify") {
  const auto ok = capture([](auto& o, auto& e) { return cmd_verify(CommandOptions{}, o, e); });
  CHECK(ok.code == kExitOk);
  CHECK(ok.out.find("FAIL") == std::string::npos);

  CommandOptions fault;
  fault.inject_fault = "bracket-sign";
  fault.verbose = true;
  const auto bad = capture([&](auto& o, auto& e) { return cmd_verify(fault, o, e); });
  CHECK(bad.code == kExitDomain);
  CHECK(bad.out.find("FAIL") != std::string::npos);
  CHECK(bad.out.find("residual") != std::string::npos);

  fault.inject_fault = "no-such-fault";
  CHECK(capture([&](auto& o, auto& e) { return cmd_verify(fault, o, e); }).code == kExitUsage);

  for (const auto& c : run_verify_suite(VerifyOptions{})) {
    CAPTURE(c.name);
    CHECK(c.pass);
  }
}
