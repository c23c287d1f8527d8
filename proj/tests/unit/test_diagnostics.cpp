#include "swarmcov/diagnostics.hpp"
#include "swarmcov/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace swarmcov;
namespace fs = std::filesystem;

namespace {

Grid unit_grid(int n) { return Grid::box(BoxDomain(make_point({0}), make_point({1})), {n}); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("swarmcov_diag_" + std::to_string(::getpid()));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

SwarmState with_moving(std::size_t n, std::size_t moving) {
  SwarmState s;
  s.positions.assign(n, make_point({0.5}));
  s.states.assign(n, MotionState::Motionless);
  for (std::size_t j = 0; j < moving; ++j) s.states[j] = MotionState::Moving;
  return s;
}

}  // namespace

TEST_CASE("L1 distance") {
  const Grid g = unit_grid(100);
  const GridField uniform(g, 1.0);
  CHECK(l1_distance(uniform, uniform) == 0.0);

  GridField left(g, 0.0), right(g, 0.0);
  for (std::size_t i = 0; i < 50; ++i) left.values[i] = 2.0;
  for (std::size_t i = 50; i < 100; ++i) right.values[i] = 2.0;
  CHECK(l1_distance(left, right) == doctest::Approx(2.0));
  CHECK(l1_distance(uniform, left) == doctest::Approx(1.0));
  CHECK_THROWS_AS(l1_distance(uniform, GridField(unit_grid(99), 1.0)), UsageError);
}

TEST_CASE("L1 distance is a metric on grid fields") {
  const Grid g = Grid::box(BoxDomain(make_point({0, 0}), make_point({2, 1})), {8, 5});
  auto field = [&](std::uint64_t seed) {
    GridField f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f.values[i] = StreamRng(seed, i, 0, StreamPurpose::Test).uniform();
    return f;
  };
  for (std::uint64_t s = 0; s < 30; ++s) {
    const GridField a = field(3 * s), b = field(3 * s + 1), c = field(3 * s + 2);
    CHECK(l1_distance(a, b) == doctest::Approx(l1_distance(b, a)));
    CHECK(l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c) + 1e-15);
    CHECK(l1_distance(a, b) >= 0.0);
  }
}

TEST_CASE("histogram density") {
  const Grid g = unit_grid(10);
  SUBCASE("one particle in one cell") {
    const std::vector<Point> one{make_point({0.55})};
    const GridField h = histogram_density(one, g, 1);
    CHECK(h.values[5] == doctest::Approx(10.0));
    CHECK(h.mass() == doctest::Approx(1.0));
  }
  SUBCASE("uniform samples") {
    std::vector<Point> pts;
    for (std::uint64_t i = 0; i < 1000000; ++i) pts.push_back(make_point({StreamRng(1, i, 0, StreamPurpose::Test).uniform()}));
    const GridField h = histogram_density(pts, g, pts.size());
    for (double v : h.values) CHECK(v == doctest::Approx(1.0).epsilon(0.01));
  }
  SUBCASE("subsets are normalized by the full population") {
    const std::vector<Point> two{make_point({0.05}), make_point({0.95})};
    const GridField h = histogram_density(two, g, 4);
    CHECK(h.values[0] == doctest::Approx(2.5));
    CHECK(h.mass() == doctest::Approx(0.5));
    CHECK(histogram_density(std::vector<Point>{}, g, 4).mass() == 0.0);
  }
  SUBCASE("points outside are clamped and counted") {
    const std::vector<Point> pts{make_point({-0.1}), make_point({1.2}), make_point({0.5})};
    std::size_t clamped = 0;
    const GridField h = histogram_density(pts, g, 3, &clamped);
    CHECK(clamped == 2);
    CHECK(h.values[0] > 0.0);
    CHECK(h.values[9] > 0.0);
  }
  CHECK_THROWS_AS(histogram_density(std::vector<Point>{}, g, 0), UsageError);
}

TEST_CASE("kde on a grid integrates to the particle fraction") {
  const BoxDomain box(make_point({0, 0}), make_point({1, 1}));
  std::vector<Point> pts;
  for (std::uint64_t i = 0; i < 200; ++i) {
    StreamRng rng(4, i, 0, StreamPurpose::Test);
    pts.push_back(make_point({0.2 + 0.6 * rng.uniform(), 0.2 + 0.6 * rng.uniform()}));
  }
  const KdeIndex index(Kernel::euclidean(0.1, 2), box, pts, 400);
  const GridField f = kde_density_on_grid(index, Grid::box(box, {200, 200}));
  CHECK(f.mass() == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("moving fraction") {
  CHECK(moving_fraction(with_moving(1000, 0)) == 0.0);
  CHECK(moving_fraction(with_moving(1000, 40)) == doctest::Approx(0.04));
  CHECK(moving_fraction(with_moving(1000, 62)) == doctest::Approx(0.062));
  CHECK(moving_fraction(with_moving(5, 5)) == 1.0);
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 123456789.125}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("CSV export") {
  TempDir tmp;
  RunRecord rec;
  rec.config = {{"name", "t"}, {"sim", {{"seed", 42}}}};
  rec.summary = {{"final_l1", 0.25}};
  rec.particles.push_back({0.0, 0, {make_point({0.1, 0.2}), make_point({0.3, 0.4})}, {MotionState::Moving, MotionState::Motionless}});
  rec.particles.push_back({1.5, 150, {make_point({0.5, 0.6}), make_point({0.7, 0.8})}, {MotionState::Motionless, MotionState::Motionless}});
  rec.metrics = {{0.0, 1.0 / 3.0, 1.0, 1.0}, {1.5, 0.1, 0.0, 0.9999999999999999}};
  export_run(rec, tmp.path, ExportFormat::Csv);

  CHECK(first_line(tmp.path / "metrics.csv") == "t,l1_to_target,moving_fraction,total_mass");
  CHECK(first_line(tmp.path / "snapshots_000000000.csv") == "t,particle_id,x1,x2,x3,motion_state");
  const std::string snap = slurp(tmp.path / "snapshots_000000150.csv");
  CHECK(snap == "t,particle_id,x1,x2,x3,motion_state\n1.5,0,0.5,0.59999999999999998,0,1\n"
                "1.5,1,0.69999999999999996,0.80000000000000004,0,1\n");

  const auto rows = read_metrics_csv(tmp.path / "metrics.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].l1_to_target == 1.0 / 3.0);
  CHECK(rows[1].total_mass == 0.9999999999999999);

  const auto run = nlohmann::json::parse(slurp(tmp.path / "run.json"));
  CHECK(run["config"]["name"] == "t");
  CHECK(run["summary"]["final_l1"] == 0.25);
  CHECK(run["provenance"]["seed"] == 42);
  CHECK(run["provenance"].contains("code_version"));
}

TEST_CASE("JSON lines and field export") {
  TempDir tmp;
  RunRecord rec;
  const Grid g = unit_grid(4);
  rec.target = GridField(g, 1.0);
  rec.fields.push_back({0.5, 5, GridField(g, 0.25), GridField(g, 0.75)});
  rec.metrics = {{0.5, 0.0, 0.25, 1.0}};
  export_run(rec, tmp.path / "csv", ExportFormat::Csv);
  export_run(rec, tmp.path / "jsonl", ExportFormat::JsonLines);

  CHECK(first_line(tmp.path / "csv" / "fields_000000005.csv") == "t,cell_id,x1,x2,x3,y1,y2,target");
  std::ifstream in(tmp.path / "jsonl" / "fields.jsonl");
  std::string line;
  REQUIRE(std::getline(in, line));
  const auto j = nlohmann::json::parse(line);
  CHECK(j["step"] == 5);
  CHECK(j["y2"].size() == 4);
  CHECK(j["y1"][0] == 0.25);
  CHECK(slurp(tmp.path / "csv" / "metrics.csv") == slurp(tmp.path / "jsonl" / "metrics.csv"));
}

TEST_CASE("unwritable output directory names the path") {
  TempDir tmp;
  fs::create_directories(tmp.path);
  std::ofstream(tmp.path / "blocker") << "x";
  RunRecord rec;
  CHECK_THROWS_WITH_AS(export_run(rec, tmp.path / "blocker" / "out", ExportFormat::Csv), doctest::Contains("blocker"),
                       DomainError);
}

TEST_CASE("metrics reader rejects malformed files") {
  TempDir tmp;
  fs::create_directories(tmp.path);
  std::ofstream(tmp.path / "bad.csv") << "t,foo\n1,2\n";
  CHECK_THROWS_AS(read_metrics_csv(tmp.path / "bad.csv"), DomainError);
  std::ofstream(tmp.path / "short.csv") << kMetricsHeader << "\n1,2,3\n";
  CHECK_THROWS_AS(read_metrics_csv(tmp.path / "short.csv"), DomainError);
}

TEST_CASE("particle recorder") {
  const Grid g = unit_grid(2);
  GridField target(g, 0.0);
  target.values[0] = 2.0;
  ParticleRecorder rec(g, target, true, true);
  SwarmState s;
  s.positions = {make_point({0.1}), make_point({0.2}), make_point({0.9}), make_point({0.95})};
  s.states = {MotionState::Motionless, MotionState::Motionless, MotionState::Moving, MotionState::Moving};
  rec(s);
  const MetricsRow& row = rec.record().metrics.at(0);
  // motionless half sits in the left cell with density 1 against a target of 2
  CHECK(row.l1_to_target == doctest::Approx(0.5));
  CHECK(row.moving_fraction == doctest::Approx(0.5));
  CHECK(row.total_mass == doctest::Approx(1.0));
  CHECK(rec.record().particles.size() == 1);

  ParticleRecorder all(g, target, false, false);
  all(s);
  CHECK(all.record().metrics.at(0).l1_to_target == doctest::Approx(1.0));
  CHECK(all.record().particles.empty());
  CHECK_THROWS_AS(ParticleRecorder(unit_grid(3), target, true, false), UsageError);
}

TEST_CASE("field recorder") {
  const Grid g = unit_grid(4);
  const GridField target(g, 1.0);
  const TwoStateField f{GridField(g, 0.25), GridField(g, 0.75)};
  FieldRecorder semi(target, false, true);
  semi({1.0, 10, &f});
  CHECK(semi.record().metrics.at(0).l1_to_target == doctest::Approx(0.25));
  CHECK(semi.record().metrics.at(0).moving_fraction == doctest::Approx(0.25));
  CHECK(semi.record().metrics.at(0).total_mass == doctest::Approx(1.0));
  CHECK(semi.record().fields.size() == 1);
  FieldRecorder lin(target, true, false);
  lin({1.0, 10, &f});
  CHECK(lin.record().metrics.at(0).l1_to_target == doctest::Approx(0.75));
}
