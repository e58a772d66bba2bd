#include "vortexflow/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "vortexflow/cache.hpp"

namespace vflow {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string lower(std::string s) {
  for (char& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

std::string read_text(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, std::string("cannot open ") + what + " " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

Vec2 parse_vec2(const std::string& s, const std::string& what) {
  const auto v = parse_numbers(s);
  if (v.size() != 2) config_error(what + " needs two numbers, got '" + s + "'");
  return {v[0], v[1]};
}

std::string resolve(const std::string& base, const std::string& file) {
  const std::filesystem::path p(file);
  if (p.is_absolute() || base.empty()) return p.string();
  return (std::filesystem::path(base) / p).string();
}

}  // namespace

bool ConfigSection::has(const std::string& key) const {
  return std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return e.first == key; });
}

const std::string& ConfigSection::get(const std::string& key) const {
  for (auto it = entries.rbegin(); it != entries.rend(); ++it)
    if (it->first == key) return it->second;
  config_error("section [" + name + "] (line " + std::to_string(line) + ") lacks key '" + key + "'");
}

std::string ConfigSection::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

std::vector<std::string> ConfigSection::all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (e.first == key) out.push_back(e.second);
  return out;
}

double ConfigSection::number(const std::string& key) const {
  try {
    return parse_number(get(key));
  } catch (const Error& e) {
    config_error("[" + name + "] " + key + ": " + e.what());
  }
}

double ConfigSection::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long ConfigSection::integer_or(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  const double v = number(key);
  if (v != std::floor(v) || std::abs(v) > 1e15) config_error("[" + name + "] " + key + " must be an integer");
  return long(v);
}

ConfigFile ConfigFile::parse(const std::string& text, const std::string& source) {
  ConfigFile cfg;
  cfg.source = source;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error(source + ":" + std::to_string(lineno) + ": unterminated section header");
      ConfigSection s;
      s.name = lower(trim(line.substr(1, line.size() - 2)));
      s.line = lineno;
      if (s.name.empty()) config_error(source + ":" + std::to_string(lineno) + ": empty section name");
      cfg.sections.push_back(std::move(s));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error(source + ":" + std::to_string(lineno) + ": expected key = value");
    if (cfg.sections.empty()) config_error(source + ":" + std::to_string(lineno) + ": entry before any section");
    const std::string key = lower(trim(line.substr(0, eq)));
    if (key.empty()) config_error(source + ":" + std::to_string(lineno) + ": empty key");
    cfg.sections.back().entries.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot open config file " + path);
  return parse(std::string(std::istreambuf_iterator<char>(in), {}), path);
}

const ConfigSection* ConfigFile::find(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

std::vector<const ConfigSection*> ConfigFile::all(const std::string& name) const {
  std::vector<const ConfigSection*> out;
  for (const auto& s : sections)
    if (s.name == name) out.push_back(&s);
  return out;
}

std::string ConfigFile::canonical() const {
  std::string out;
  for (const auto& s : sections) {
    out += "[" + s.name + "]\n";
    for (const auto& [k, v] : s.entries) out += k + "=" + v + "\n";
  }
  return out;
}

double parse_number(const std::string& text) {
  std::string s = lower(trim(text));
  if (s.empty()) config_error("empty number");
  double factor = 1.0;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    factor = pi;
    s.resize(s.size() - 2);
    if (!s.empty() && s.back() == '*') s.pop_back();
    if (s.empty() || s == "+") return factor;
    if (s == "-") return -factor;
  }
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    config_error("not a number: '" + text + "'");
  }
  if (used != s.size() || !std::isfinite(v)) config_error("not a number: '" + text + "'");
  return v * factor;
}

std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  for (const auto& w : split_words(s)) out.push_back(parse_number(w));
  return out;
}

namespace {

ComponentSpec parse_component(const ConfigSection& s, const std::string& base, std::uint64_t& hash) {
  const std::string type = lower(s.get_or("type", "circle"));
  ComponentSpec c;
  if (type == "circle") {
    c = ComponentSpec::circle(parse_vec2(s.get_or("center", "0,0"), "center"), s.number("radius"));
  } else if (type == "ellipse") {
    const Vec2 ax = parse_vec2(s.get("axes"), "axes");
    c = ComponentSpec::ellipse(parse_vec2(s.get_or("center", "0,0"), "center"), ax(0), ax(1), s.number_or("angle", 0.0));
  } else if (type == "points") {
    const std::string file = resolve(base, s.get("file"));
    hash = fnv1a(read_text(file, "point table"), hash);
    c = ComponentSpec::table(read_points_csv(file));
  } else {
    config_error("unknown component type '" + type + "'");
  }
  const std::string o = lower(s.get_or("orientation", "ccw"));
  if (o != "ccw" && o != "cw") config_error("orientation must be ccw or cw");
  c.counterclockwise = o == "ccw";
  if (c.type == ComponentSpec::Type::Points && !c.counterclockwise) std::reverse(c.points.begin(), c.points.end());
  return c;
}

Scheme parse_scheme(const std::string& s) {
  try {
    return scheme_from_name(lower(s));
  } catch (const Error& e) {
    config_error(e.what());
  }
}

Profile parse_profile(const std::string& s) { return profile_from_name(lower(s)); }

}  // namespace

RunConfig parse_run_config(const ConfigFile& cfg, const std::string& base_dir) {
  RunConfig rc;
  rc.base_dir = base_dir;
  std::uint64_t h = fnv1a(cfg.canonical());

  const ConfigSection* dom = cfg.find("domain");
  if (!dom) config_error(cfg.source + ": missing [domain] section");
  const std::string kind = lower(dom->get_or("kind", "exterior"));
  if (kind == "exterior") {
    rc.domain.kind = DomainKind::Exterior;
  } else if (kind == "bounded") {
    rc.domain.kind = DomainKind::BoundedWithHoles;
  } else {
    config_error("domain kind must be exterior or bounded, got '" + kind + "'");
  }
  rc.domain.max_speed_ratio = dom->number_or("max_speed_ratio", rc.domain.max_speed_ratio);
  // Domain files hold [component] sections of their own.
  if (dom->has("file")) {
    const std::string file = resolve(base_dir, dom->get("file"));
    const ConfigFile sub = ConfigFile::parse(read_text(file, "domain file"), file);
    const std::string sub_base = std::filesystem::path(file).parent_path().string();
    h = fnv1a(sub.canonical(), h);
    for (const auto* c : sub.all("component")) rc.domain.components.push_back(parse_component(*c, sub_base, h));
  }
  for (const auto* c : cfg.all("component")) rc.domain.components.push_back(parse_component(*c, base_dir, h));
  if (rc.domain.components.empty()) config_error(cfg.source + ": no [component] sections");

  if (const auto* s = cfg.find("solver")) {
    rc.n = int(s->integer_or("n", rc.n));
    if (s->has("cache")) rc.cache = resolve(base_dir, s->get("cache"));
  }

  std::vector<Atom> atoms;
  std::vector<Blob> blobs;
  if (const auto* s = cfg.find("state")) {
    rc.initial.t = s->number_or("t", 0.0);
    if (s->has("gamma")) rc.initial.gamma = parse_numbers(s->get("gamma"));
    for (const auto& a : s->all("atom")) {
      const auto v = parse_numbers(a);
      if (v.size() != 3) config_error("atom needs x, y, strength: '" + a + "'");
      atoms.push_back({{v[0], v[1]}, v[2]});
    }
    for (const auto& b : s->all("blob")) {
      auto w = split_words(b);
      Profile p = Profile::Bump;
      if (w.size() == 5) {
        p = parse_profile(w.back());
        w.pop_back();
      }
      if (w.size() != 4) config_error("blob needs x, y, strength, radius[, profile]: '" + b + "'");
      blobs.push_back({{parse_number(w[0]), parse_number(w[1])}, parse_number(w[2]), parse_number(w[3]), p});
    }
    if (s->has("vorticity")) {
      const std::string file = resolve(base_dir, s->get("vorticity"));
      h = fnv1a(read_text(file, "vorticity file"), h);
      const auto w = read_measure_csv(file);
      atoms.insert(atoms.end(), w.atoms().begin(), w.atoms().end());
      blobs.insert(blobs.end(), w.blobs().begin(), w.blobs().end());
    }
  }
  rc.initial.omega = VorticityMeasure(std::move(atoms), std::move(blobs));

  if (const auto* s = cfg.find("time")) {
    rc.time.T = s->number_or("t", s->number_or("duration", 0.0));
    rc.time.dt = s->number_or("dt", 0.0);
    if (s->has("steps")) {
      const long steps = s->integer_or("steps", 0);
      if (steps <= 0) config_error("[time] steps must be positive");
      if (rc.time.dt > 0.0) config_error("[time] give either dt or steps");
      rc.time.dt = rc.time.T / double(steps);
    }
    rc.time.scheme = parse_scheme(s->get_or("scheme", "rk4"));
    if (rc.time.T < 0.0 || rc.time.dt < 0.0) config_error("[time] T and dt must be nonnegative");
  }

  if (const auto* s = cfg.find("output")) rc.output_dir = resolve(base_dir, s->get_or("dir", "."));
  else rc.output_dir = resolve(base_dir, ".");
  if (const auto* s = cfg.find("run")) rc.seed = std::uint64_t(s->integer_or("seed", 1));

  if (const auto* s = cfg.find("audit")) {
    rc.tests = s->all("test");
    rc.levels = int(s->integer_or("levels", rc.levels));
    if (rc.levels < 1 || rc.levels > 8) config_error("[audit] levels must lie in 1..8");
  }
  if (const auto* s = cfg.find("forces")) {
    for (const auto& c : s->all("component"))
      for (double v : parse_numbers(c)) rc.force_components.push_back(int(v));
    rc.force.tangential_nodes = int(s->integer_or("tangential_nodes", rc.force.tangential_nodes));
    rc.force.gauss_nodes = int(s->integer_or("gauss_nodes", rc.force.gauss_nodes));
    rc.force.audit_fields = int(s->integer_or("audit_fields", rc.force.audit_fields));
  }
  rc.force.seed = rc.seed;
  if (const auto* s = cfg.find("probe"))
    if (s->has("points")) rc.probe_points = resolve(base_dir, s->get("points"));
  if (const auto* s = cfg.find("kernels")) {
    rc.kernels.sources = int(s->integer_or("sources", rc.kernels.sources));
    rc.kernels.targets = int(s->integer_or("targets", rc.kernels.targets));
    rc.kernels.min_separation = s->number_or("min_separation", rc.kernels.min_separation);
    rc.kernels.max_separation = s->number_or("max_separation", rc.kernels.max_separation);
    rc.kernels.boundary_margin = s->number_or("boundary_margin", rc.kernels.boundary_margin);
    rc.kernels.sample_radius = s->number_or("sample_radius", rc.kernels.sample_radius);
  }
  rc.kernels.seed = rc.seed;
  if (rc.n < 1) config_error("[solver] n must be positive");
  rc.hash = h;
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  const ConfigFile cfg = ConfigFile::load(path);
  RunConfig rc = parse_run_config(cfg, std::filesystem::path(path).parent_path().string());
  rc.path = path;
  return rc;
}

TestFunction parse_test_function(const std::string& spec, const Domain& d) {
  const auto w = split_words(spec);
  if (w.empty()) config_error("empty test function spec");
  const std::string kind = lower(w[0]);
  std::vector<double> a;
  for (size_t i = 1; i < w.size(); ++i) a.push_back(parse_number(w[i]));
  auto need = [&](size_t lo, size_t hi) {
    if (a.size() < lo || a.size() > hi) config_error("wrong number of parameters in test function '" + spec + "'");
  };
  if (kind == "constant") {
    need(1, 1);
    return TestFunction::constant(a[0]);
  }
  if (kind == "bump") {
    need(4, 5);
    return TestFunction::flat_bump({a[0], a[1]}, a[2], a[3], a.size() == 5 ? a[4] : 1.0);
  }
  if (kind == "localizer") {
    need(3, 3);
    return TestFunction::boundary_localizer(d, int(a[0]), a[1], a[2]);
  }
  if (kind == "poly") {
    need(8, 8);
    return TestFunction::polynomial_times_bump({a[0], a[1]}, a[2], a[3], Eigen::Vector4d(a[4], a[5], a[6], a[7]));
  }
  if (kind == "ybar") {
    need(1, 2);
    std::mt19937_64 rng{static_cast<std::uint64_t>(a[0])};
    return TestFunction::random_ybar(d, rng, a.size() == 2 ? a[1] : 1.0);
  }
  config_error("unknown test function kind '" + kind + "'");
}

std::vector<Vec2> read_points_csv(const std::string& path) {
  std::istringstream in(read_text(path, "point file"));
  std::vector<Vec2> pts;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto w = split_words(line);
    try {
      if (w.size() != 2) throw Error(ErrorCode::ConfigError, "");
      pts.emplace_back(parse_number(w[0]), parse_number(w[1]));
    } catch (const Error&) {
      if (pts.empty() && lineno == 1) continue;  // header
      config_error(path + ":" + std::to_string(lineno) + ": expected two numbers");
    }
  }
  return pts;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out.precision(17);
  const auto& s0 = traj.states.front();
  const size_t na = s0.omega.atoms().size(), nb = s0.omega.blobs().size();
  out << "t";
  for (size_t k = 0; k < na + nb; ++k) out << ",x" << k << ",y" << k;
  for (size_t j = 0; j < s0.gamma.size(); ++j) out << ",gamma" << j;
  out << "\n";
  for (const auto& s : traj.states) {
    out << s.t;
    for (const auto& a : s.omega.atoms()) out << "," << a.pos(0) << "," << a.pos(1);
    for (const auto& b : s.omega.blobs()) out << "," << b.center(0) << "," << b.center(1);
    for (double g : s.gamma) out << "," << g;
    out << "\n";
  }
}

Trajectory read_trajectory_csv(const std::string& path, const FlowState& initial, Scheme scheme) {
  std::istringstream in(read_text(path, "trajectory"));
  std::string line;
  if (!std::getline(in, line)) config_error(path + ": empty trajectory file");
  const auto header = split_words(line);
  const size_t na = initial.omega.atoms().size(), nb = initial.omega.blobs().size();
  const size_t npos = 2 * (na + nb);
  if (header.empty() || header[0] != "t" || header.size() < 1 + npos)
    config_error(path + ": header does not match the configured vorticity");
  const size_t ng = header.size() - 1 - npos;
  Trajectory tr;
  tr.scheme = scheme;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<double> v;
    try {
      v = parse_numbers(line);
    } catch (const Error&) {
      config_error(path + ":" + std::to_string(lineno) + ": malformed row");
    }
    if (v.size() != header.size()) config_error(path + ":" + std::to_string(lineno) + ": wrong column count");
    std::vector<Atom> atoms = initial.omega.atoms();
    std::vector<Vec2> centers;
    for (size_t k = 0; k < na; ++k) atoms[k].pos = {v[1 + 2 * k], v[2 + 2 * k]};
    for (size_t k = na; k < na + nb; ++k) centers.emplace_back(v[1 + 2 * k], v[2 + 2 * k]);
    FlowState s;
    s.t = v[0];
    s.omega = initial.omega.with_atoms(std::move(atoms)).with_blob_centers(centers);
    s.gamma.assign(v.begin() + long(1 + npos), v.begin() + long(1 + npos + ng));
    tr.states.push_back(std::move(s));
  }
  if (tr.states.size() < 2) config_error(path + ": trajectory needs at least two rows");
  const double dt = (tr.states.back().t - tr.states.front().t) / double(tr.states.size() - 1);
  for (size_t k = 1; k < tr.states.size(); ++k)
    if (std::abs(tr.states[k].t - tr.states[k - 1].t - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
      config_error(path + ": time grid is not uniform");
  tr.dt = dt;
  return tr;
}

}  // namespace vflow
