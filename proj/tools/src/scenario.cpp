#include "swarmcov/cli/scenario.hpp"

#include "swarmcov/target.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace swarmcov::cli {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

// Reads one mapping section and rejects keys it was never asked about.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) fail(path_.empty() ? "<root>" : path_, "expected a mapping");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_ && node_.IsMap() && node_[key] && !node_[key].IsNull();
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return as<T>(node_[key], join(path_, key));
  }

  template <class T>
  T require(const std::string& key) {
    if (!has(key)) fail(join(path_, key), "required field is missing");
    return as<T>(node_[key], join(path_, key));
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(node_ && node_.IsMap() ? node_[key] : YAML::Node(), join(path_, key));
  }

  YAML::Node raw(const std::string& key) {
    seen_.insert(key);
    return node_ && node_.IsMap() ? node_[key] : YAML::Node();
  }

  const std::string& path() const { return path_; }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) fail(join(path_, key), "unknown field");
    }
  }

  template <class T>
  static T as(const YAML::Node& n, const std::string& path) {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(path, "cannot read value '" + (n.IsScalar() ? n.Scalar() : std::string("<non-scalar>")) + "'");
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

void require_positive(double v, const std::string& path) {
  if (!(v > 0.0) || !std::isfinite(v)) fail(path, "must be positive and finite (got " + format_double(v) + ")");
}

void require_one_of(const std::string& v, std::initializer_list<const char*> options, const std::string& path) {
  std::string list;
  for (const char* o : options) {
    if (v == o) return;
    list += list.empty() ? o : std::string(", ") + o;
  }
  fail(path, "'" + v + "' is not one of: " + list);
}

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  // keep doubles recognizable as floating point when written back
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("scenario is not valid YAML: ") + e.what());
  }
  if (!root || root.IsNull()) throw ConfigError("scenario is empty");

  Scenario s;
  s.base_dir = base_dir;
  Section top(root, "");
  s.name = top.get<std::string>("name", s.name);
  s.fields = top.get<std::string>("fields", s.fields);
  require_one_of(s.fields, {"brockett", "sphere", "coordinate"}, "fields");

  {
    Section d = top.child("domain");
    s.domain.kind = d.get<std::string>("kind", s.domain.kind);
    require_one_of(s.domain.kind, {"box", "sphere"}, "domain.kind");
    if (s.domain.kind == "box") {
      s.domain.lo = d.require<std::vector<double>>("lo");
      s.domain.hi = d.require<std::vector<double>>("hi");
      if (s.domain.lo.size() != s.domain.hi.size() || s.domain.lo.empty() || s.domain.lo.size() > 3) {
        fail("domain.hi", "lo and hi must have the same length between 1 and 3");
      }
      for (std::size_t i = 0; i < s.domain.lo.size(); ++i) {
        if (!(s.domain.lo[i] < s.domain.hi[i])) fail("domain.hi", "each hi must exceed lo");
      }
    } else {
      s.domain.lo.clear();
      s.domain.hi.clear();
    }
    d.finish();
  }
  {
    Section c = top.child("control");
    auto& cs = s.control;
    cs.variant = c.get<std::string>("variant", cs.variant);
    require_one_of(cs.variant, {"noninteracting", "gradient_drift", "switching", "constant"}, "control.variant");
    cs.D = c.get<double>("D", cs.D);
    require_positive(cs.D, "control.D");
    cs.k = c.get<double>("k", cs.k);
    require_positive(cs.k, "control.k");
    cs.epsilon = c.get<double>("epsilon", cs.epsilon);
    require_positive(cs.epsilon, "control.epsilon");
    cs.density_source = c.get<std::string>("density_source", cs.density_source);
    require_one_of(cs.density_source, {"motionless", "all"}, "control.density_source");
    cs.q_max = c.get<double>("q_max", cs.q_max);
    require_positive(cs.q_max, "control.q_max");
    cs.density_scale = c.get<std::string>("density_scale", cs.density_scale);
    if (cs.density_scale != "absolute" && cs.density_scale != "domain") {
      double v = 0.0;
      auto res = std::from_chars(cs.density_scale.data(), cs.density_scale.data() + cs.density_scale.size(), v);
      if (res.ec != std::errc() || res.ptr != cs.density_scale.data() + cs.density_scale.size()) {
        fail("control.density_scale", "expected 'absolute', 'domain' or a positive number");
      }
      require_positive(v, "control.density_scale");
      cs.density_scale = shortest(v);
    }
    cs.u = c.get<std::vector<double>>("u", cs.u);
    cs.v = c.get<std::vector<double>>("v", cs.v);
    if (cs.variant == "constant" && (cs.u.empty() || cs.u.size() != cs.v.size())) {
      fail("control.u", "constant variant needs u and v of equal, nonzero length");
    }
    c.finish();
  }
  {
    Section t = top.child("target");
    auto& ts = s.target;
    ts.kind = t.get<std::string>("kind", ts.kind);
    require_one_of(ts.kind, {"uniform", "balls8", "balls8+floor", "balls", "sphere-caps", "sinusoid", "grid"},
                   "target.kind");
    ts.floor = t.get<double>("floor", ts.floor);
    if (!(ts.floor >= 0.0)) fail("target.floor", "must be non-negative");
    if (t.has("radius")) {
      ts.radius = t.get<double>("radius", 0.0);
      require_positive(*ts.radius, "target.radius");
    }
    ts.profile = t.get<std::string>("profile", ts.profile);
    require_one_of(ts.profile, {"flat", "raised-cosine"}, "target.profile");
    ts.centers = t.get<std::vector<std::vector<double>>>("centers", ts.centers);
    ts.threshold = t.get<double>("threshold", ts.threshold);
    if (!(ts.threshold > 0.0 && ts.threshold < 1.0)) fail("target.threshold", "must lie in (0, 1)");
    ts.amplitude = t.get<double>("amplitude", ts.amplitude);
    if (!(std::abs(ts.amplitude) < 1.0)) fail("target.amplitude", "must satisfy |amplitude| < 1");
    ts.wavenumber = t.get<int>("wavenumber", ts.wavenumber);
    if (ts.wavenumber < 1) fail("target.wavenumber", "must be at least 1");
    ts.file = t.get<std::string>("file", ts.file);
    ts.cells = t.get<std::vector<int>>("cells", ts.cells);
    if (ts.kind == "balls" && (ts.centers.empty() || !ts.radius)) {
      fail("target.centers", "kind 'balls' needs centers and radius");
    }
    if (ts.kind == "grid" && (ts.file.empty() || ts.cells.empty())) {
      fail("target.file", "kind 'grid' needs file and cells");
    }
    t.finish();
  }
  {
    Section i = top.child("initial");
    s.initial.kind = i.get<std::string>("kind", s.initial.kind);
    require_one_of(s.initial.kind, {"uniform", "region"}, "initial.kind");
    s.initial.lo = i.get<std::vector<double>>("lo", s.initial.lo);
    s.initial.hi = i.get<std::vector<double>>("hi", s.initial.hi);
    if (s.initial.kind == "region" && (s.initial.lo.empty() || s.initial.lo.size() != s.initial.hi.size())) {
      fail("initial.lo", "kind 'region' needs lo and hi of equal length");
    }
    i.finish();
  }
  {
    Section m = top.child("sim");
    auto& ss = s.sim;
    ss.dt = m.get<double>("dt", ss.dt);
    require_positive(ss.dt, "sim.dt");
    ss.t_final = m.get<double>("t_final", ss.t_final);
    if (!(ss.t_final >= 0.0) || !std::isfinite(ss.t_final)) fail("sim.t_final", "must be non-negative");
    ss.n_particles = m.get<std::int64_t>("n_particles", ss.n_particles);
    if (ss.n_particles < 1) fail("sim.n_particles", "must be at least 1");
    ss.seed = m.get<std::uint64_t>("seed", ss.seed);
    ss.substeps = m.get<int>("substeps", ss.substeps);
    if (ss.substeps < 1) fail("sim.substeps", "must be at least 1");
    ss.snapshot_every = m.get<std::int64_t>("snapshot_every", ss.snapshot_every);
    if (ss.snapshot_every < 1) fail("sim.snapshot_every", "must be at least 1");
    ss.integrator = m.get<std::string>("integrator", ss.integrator);
    require_one_of(ss.integrator, {"auto", "heun", "exact"}, "sim.integrator");
    m.finish();
  }
  {
    Section o = top.child("output");
    s.output.dir = o.get<std::string>("dir", s.output.dir);
    s.output.format = o.get<std::string>("format", s.output.format);
    require_one_of(s.output.format, {"csv", "jsonl"}, "output.format");
    s.output.metrics_cells = o.get<int>("metrics_cells", s.output.metrics_cells);
    if (s.output.metrics_cells < 1) fail("output.metrics_cells", "must be at least 1");
    s.output.snapshots = o.get<bool>("snapshots", s.output.snapshots);
    o.finish();
  }
  if (top.has("oracle")) {
    Section q = top.child("oracle");
    OracleSpec os;
    os.kind = q.get<std::string>("kind", os.kind);
    require_one_of(os.kind, {"linear", "semilinear"}, "oracle.kind");
    os.cells = q.get<std::vector<int>>("cells", os.cells);
    if (os.cells.empty() || os.cells.size() > 2) fail("oracle.cells", "needs one or two entries");
    for (int c : os.cells) {
      if (c < 2) fail("oracle.cells", "each axis needs at least 2 cells");
    }
    os.dt = q.get<double>("dt", os.dt);
    if (!(os.dt >= 0.0)) fail("oracle.dt", "must be non-negative (0 selects the stability bound)");
    os.t_final = q.get<double>("t_final", os.t_final);
    if (!(os.t_final >= 0.0)) fail("oracle.t_final", "must be non-negative");
    os.snapshot_every = q.get<std::int64_t>("snapshot_every", os.snapshot_every);
    if (os.snapshot_every < 1) fail("oracle.snapshot_every", "must be at least 1");
    os.b = q.get<double>("b", os.b);
    require_positive(os.b, "oracle.b");
    os.initial = q.get<std::string>("initial", os.initial);
    require_one_of(os.initial, {"uniform", "target"}, "oracle.initial");
    q.finish();
    s.oracle = os;
  } else {
    top.raw("oracle");
  }
  top.finish();
  return s;
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read scenario file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str(), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

namespace {

void emit_doubles(YAML::Emitter& out, const std::vector<double>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double x : v) out << shortest(x);
  out << YAML::EndSeq;
}

void emit_kv(YAML::Emitter& out, const char* key, double v) { out << YAML::Key << key << YAML::Value << shortest(v); }

}  // namespace

std::string serialize_scenario(const Scenario& s) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << s.name;
  out << YAML::Key << "fields" << YAML::Value << s.fields;

  out << YAML::Key << "domain" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << s.domain.kind;
  if (s.domain.kind == "box") {
    out << YAML::Key << "lo" << YAML::Value;
    emit_doubles(out, s.domain.lo);
    out << YAML::Key << "hi" << YAML::Value;
    emit_doubles(out, s.domain.hi);
  }
  out << YAML::EndMap;

  const auto& c = s.control;
  out << YAML::Key << "control" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "variant" << YAML::Value << c.variant;
  emit_kv(out, "D", c.D);
  emit_kv(out, "k", c.k);
  emit_kv(out, "epsilon", c.epsilon);
  out << YAML::Key << "density_source" << YAML::Value << c.density_source;
  emit_kv(out, "q_max", c.q_max);
  out << YAML::Key << "density_scale" << YAML::Value << c.density_scale;
  if (!c.u.empty()) {
    out << YAML::Key << "u" << YAML::Value;
    emit_doubles(out, c.u);
    out << YAML::Key << "v" << YAML::Value;
    emit_doubles(out, c.v);
  }
  out << YAML::EndMap;

  const auto& t = s.target;
  out << YAML::Key << "target" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << t.kind;
  emit_kv(out, "floor", t.floor);
  if (t.radius) emit_kv(out, "radius", *t.radius);
  out << YAML::Key << "profile" << YAML::Value << t.profile;
  if (!t.centers.empty()) {
    out << YAML::Key << "centers" << YAML::Value << YAML::BeginSeq;
    for (const auto& ctr : t.centers) emit_doubles(out, ctr);
    out << YAML::EndSeq;
  }
  emit_kv(out, "threshold", t.threshold);
  emit_kv(out, "amplitude", t.amplitude);
  out << YAML::Key << "wavenumber" << YAML::Value << t.wavenumber;
  if (!t.file.empty()) out << YAML::Key << "file" << YAML::Value << t.file;
  if (!t.cells.empty()) out << YAML::Key << "cells" << YAML::Value << YAML::Flow << t.cells;
  out << YAML::EndMap;

  out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << s.initial.kind;
  if (!s.initial.lo.empty()) {
    out << YAML::Key << "lo" << YAML::Value;
    emit_doubles(out, s.initial.lo);
    out << YAML::Key << "hi" << YAML::Value;
    emit_doubles(out, s.initial.hi);
  }
  out << YAML::EndMap;

  const auto& m = s.sim;
  out << YAML::Key << "sim" << YAML::Value << YAML::BeginMap;
  emit_kv(out, "dt", m.dt);
  emit_kv(out, "t_final", m.t_final);
  out << YAML::Key << "n_particles" << YAML::Value << m.n_particles;
  out << YAML::Key << "seed" << YAML::Value << m.seed;
  out << YAML::Key << "substeps" << YAML::Value << m.substeps;
  out << YAML::Key << "snapshot_every" << YAML::Value << m.snapshot_every;
  out << YAML::Key << "integrator" << YAML::Value << m.integrator;
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  if (!s.output.dir.empty()) out << YAML::Key << "dir" << YAML::Value << s.output.dir;
  out << YAML::Key << "format" << YAML::Value << s.output.format;
  out << YAML::Key << "metrics_cells" << YAML::Value << s.output.metrics_cells;
  out << YAML::Key << "snapshots" << YAML::Value << s.output.snapshots;
  out << YAML::EndMap;

  if (s.oracle) {
    const auto& q = *s.oracle;
    out << YAML::Key << "oracle" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << q.kind;
    out << YAML::Key << "cells" << YAML::Value << YAML::Flow << q.cells;
    emit_kv(out, "dt", q.dt);
    emit_kv(out, "t_final", q.t_final);
    out << YAML::Key << "snapshot_every" << YAML::Value << q.snapshot_every;
    emit_kv(out, "b", q.b);
    out << YAML::Key << "initial" << YAML::Value << q.initial;
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

nlohmann::json scenario_json(const Scenario& s) {
  using nlohmann::json;
  json j;
  j["name"] = s.name;
  j["fields"] = s.fields;
  j["domain"] = {{"kind", s.domain.kind}, {"lo", s.domain.lo}, {"hi", s.domain.hi}};
  const auto& c = s.control;
  j["control"] = {{"variant", c.variant},         {"D", c.D},         {"k", c.k},
                  {"epsilon", c.epsilon},         {"q_max", c.q_max}, {"density_source", c.density_source},
                  {"density_scale", c.density_scale}, {"u", c.u},     {"v", c.v}};
  const auto& t = s.target;
  j["target"] = {{"kind", t.kind},           {"floor", t.floor},         {"profile", t.profile},
                 {"centers", t.centers},     {"threshold", t.threshold}, {"amplitude", t.amplitude},
                 {"wavenumber", t.wavenumber}, {"file", t.file},         {"cells", t.cells}};
  if (t.radius) j["target"]["radius"] = *t.radius;
  j["initial"] = {{"kind", s.initial.kind}, {"lo", s.initial.lo}, {"hi", s.initial.hi}};
  const auto& m = s.sim;
  j["sim"] = {{"dt", m.dt},
              {"t_final", m.t_final},
              {"n_particles", m.n_particles},
              {"seed", m.seed},
              {"substeps", m.substeps},
              {"snapshot_every", m.snapshot_every},
              {"integrator", m.integrator}};
  j["output"] = {{"dir", s.output.dir},
                 {"format", s.output.format},
                 {"metrics_cells", s.output.metrics_cells},
                 {"snapshots", s.output.snapshots}};
  if (s.oracle) {
    const auto& q = *s.oracle;
    j["oracle"] = {{"kind", q.kind}, {"cells", q.cells},     {"dt", q.dt},      {"t_final", q.t_final},
                   {"snapshot_every", q.snapshot_every}, {"b", q.b}, {"initial", q.initial}};
  }
  return j;
}

std::vector<double> read_grid_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("target.file: cannot read '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != "cell_id,value") {
    throw ConfigError("target.file: '" + path.string() + "' must start with header cell_id,value");
  }
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (comma == std::string::npos) throw ConfigError("target.file: " + where + ": expected two columns");
    long long id = -1;
    double value = 0.0;
    const char* b = line.data();
    const char* e = b + line.size();
    auto r1 = std::from_chars(b, b + comma, id);
    auto r2 = std::from_chars(b + comma + 1, e, value);
    if (r1.ec != std::errc() || r1.ptr != b + comma || r2.ec != std::errc() || r2.ptr != e) {
      throw ConfigError("target.file: " + where + ": bad number");
    }
    if (id != static_cast<long long>(values.size())) {
      throw ConfigError("target.file: " + where + ": cell ids must run 0, 1, 2, ...");
    }
    values.push_back(value);
  }
  return values;
}

}  // namespace swarmcov::cli
