// Command-line front end: build, simulate, audit, forces, probe, validate-kernels.
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "vortexflow/cache.hpp"
#include "vortexflow/config.hpp"
#include "vortexflow/parallel.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;
using namespace vflow;

namespace {

constexpr int exit_ok = 0, exit_config = 2, exit_numerical = 3;

struct Globals {
  int threads = 1;
  std::string out;  // overrides [output] dir
  bool quiet = false;
};

struct Context {
  RunConfig rc;
  Domain domain;
  SolverPtr solver;
  std::string cache_path;
  std::vector<std::string> outputs;
};

std::string out_path(Context& c, const std::string& name) {
  const std::string p = (fs::path(c.rc.output_dir) / name).string();
  c.outputs.push_back(p);
  return p;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
  f << j.dump(2) << "\n";
}

std::string default_cache(const RunConfig& rc, const Domain& d) {
  return (fs::path(rc.output_dir) / ("solver-" + hex64(d.hash()) + "-" + std::to_string(rc.n) + ".bin")).string();
}

Context open_context(const std::string& config, const Globals& g, bool need_solver = true) {
  Context c;
  c.rc = load_run_config(config);
  if (!g.out.empty()) c.rc.output_dir = g.out;
  c.domain = make_domain(c.rc.domain);
  std::error_code ec;
  fs::create_directories(c.rc.output_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create output directory " + c.rc.output_dir);
  c.cache_path = c.rc.cache.empty() ? default_cache(c.rc, c.domain) : c.rc.cache;
  if (!need_solver) return c;
  c.solver = load_solver(c.cache_path, c.domain, c.rc.n);
  if (!c.solver) {
    c.solver = PotentialSolver::build(c.domain, c.rc.n);
    save_solver(c.cache_path, *c.solver);
  }
  return c;
}

json manifest(const Context& c, const std::string& command, const Globals& g) {
  json m;
  m["tool"] = "vflow";
  m["version"] = version_string;
  m["command"] = command;
  m["config"] = c.rc.path;
  m["config_hash"] = hex64(c.rc.hash);
  m["domain_hash"] = hex64(c.domain.hash());
  m["solver_n"] = c.rc.n;
  m["solver_cache"] = c.cache_path;
  m["seed"] = c.rc.seed;
  m["threads"] = resolve_threads(g.threads);
  m["serial"] = resolve_threads(g.threads) == 1;
  m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  m["cache_format"] = solver_cache_version;
#ifdef __VERSION__
  m["compiler"] = __VERSION__;
#endif
  m["outputs"] = c.outputs;
  return m;
}

void finish(Context& c, const std::string& command, const Globals& g, const json& summary) {
  const std::string mpath = (fs::path(c.rc.output_dir) / (command + ".manifest.json")).string();
  write_json(mpath, manifest(c, command, g));
  if (!g.quiet) std::cout << summary.dump(2) << "\n";
}

FlowState initial_state(const Context& c) {
  FlowState s = c.rc.initial;
  s.gamma = complete_circulations(c.domain, s.omega, s.gamma);
  return s;
}

Trajectory trajectory_for(const Context& c, const std::string& file) {
  if (!file.empty()) return read_trajectory_csv(file, c.rc.initial, c.rc.time.scheme);
  if (!(c.rc.time.T > 0.0) || !(c.rc.time.dt > 0.0))
    throw Error(ErrorCode::ConfigError, "[time] T and dt are required to simulate");
  return simulate(c.solver, initial_state(c), c.rc.time.T, c.rc.time.dt, c.rc.time.scheme);
}

// Closed-form Green function of a single circle (disk or its exterior) after
// moving the circle to the unit circle; other domains check that the harmonic
// measures sum to one.
json self_test(const Context& c) {
  const Domain& d = c.domain;
  const auto& S = *c.solver;
  json j;
  const auto& spec = d.descriptor().components;
  const bool one_circle = spec.size() == 1 && spec[0].type == ComponentSpec::Type::Circle;
  double worst = 0.0;
  int samples = 0;
  if (one_circle) {
    const Vec2 cen = spec[0].center;
    const double R = spec[0].radius;
    const bool ext = d.exterior();
    for (int i = 0; i < 20; ++i) {
      const double a = 0.7 * i + 0.1, b = 1.3 * i + 2.0;
      const double ra = ext ? 1.2 + 0.1 * (i % 7) : 0.2 + 0.03 * (i % 7);
      const double rb = ext ? 1.5 + 0.2 * (i % 5) : 0.5 + 0.05 * (i % 5);
      const Vec2 x = cen + R * ra * Vec2(std::cos(a), std::sin(a));
      const Vec2 y = cen + R * rb * Vec2(std::cos(b), std::sin(b));
      const Vec2 xs = (x - cen) / R, ys = (y - cen) / R;
      const double exact = ext ? green_exterior_disk(xs, ys) : green_disk(xs, ys);
      worst = std::max(worst, std::abs(S.green(x, y) - exact));
      ++samples;
    }
    j["kind"] = ext ? "green_exterior_disk" : "green_disk";
    j["tolerance"] = 1e-8;
  } else {
    const auto idx = S.measure_indices();
    const Vec2 c0 = to_v(d.frame_center());
    const double L = d.length_scale();
    for (int i = 0; i < 20; ++i) {
      const double a = 0.9 * i;
      for (double r : {0.6, 1.1, 2.5, 6.0}) {
        const Vec2 x = c0 + r * L * Vec2(std::cos(a), std::sin(a));
        if (!d.contains(x, 0.05 * L)) continue;
        double s = 0.0;
        for (int k : idx) s += S.harmonic_measure(k, x);
        worst = std::max(worst, std::abs(s - 1.0));
        ++samples;
      }
    }
    j["kind"] = "harmonic_measure_partition";
    j["tolerance"] = 1e-7;
  }
  j["samples"] = samples;
  j["max_error"] = worst;
  j["passed"] = worst <= j["tolerance"].get<double>();
  return j;
}

int cmd_build(const std::string& config, bool force, const Globals& g) {
  Context c = open_context(config, g, false);
  const bool fresh = !force && solver_cache_matches(c.cache_path, c.domain, c.rc.n);
  std::string status;
  if (fresh) {
    c.solver = load_solver(c.cache_path, c.domain, c.rc.n);
    status = "unchanged";
  } else {
    c.solver = PotentialSolver::build(c.domain, c.rc.n);
    save_solver(c.cache_path, *c.solver);
    status = "built";
  }
  c.outputs.push_back(c.cache_path);
  json s;
  s["status"] = status;
  s["cache"] = c.cache_path;
  s["n"] = c.rc.n;
  s["domain_hash"] = hex64(c.domain.hash());
  s["condition_estimate"] = c.solver->condition_estimate();
  s["self_test"] = self_test(c);
  write_json(out_path(c, "build.json"), s);
  finish(c, "build", g, s);
  return s["self_test"]["passed"].get<bool>() ? exit_ok : exit_numerical;
}

int cmd_simulate(const std::string& config, const Globals& g) {
  Context c = open_context(config, g);
  const Trajectory tr = trajectory_for(c, "");
  write_trajectory_csv(out_path(c, "trajectory.csv"), tr);
  const auto rep = conservation_report(c.solver, tr);
  {
    std::ofstream f(out_path(c, "diagnostics.csv"));
    if (!f) throw Error(ErrorCode::IoError, "cannot write diagnostics");
    f.precision(17);
    f << "t,conserved_scalar,hamiltonian";
    for (size_t j = 0; j < rep.gamma.front().size(); ++j) f << ",gamma" << j;
    f << "\n";
    for (size_t k = 0; k < rep.t.size(); ++k) {
      f << rep.t[k] << "," << rep.scalar[k] << "," << rep.hamiltonian[k];
      for (double v : rep.gamma[k]) f << "," << v;
      f << "\n";
    }
  }
  json s;
  s["steps"] = tr.states.size() - 1;
  s["T"] = c.rc.time.T;
  s["dt"] = tr.dt;
  s["scheme"] = scheme_name(tr.scheme);
  s["conserved_scalar"] = rep.scalar.front();
  s["scalar_drift"] = rep.scalar_drift;
  s["hamiltonian_drift"] = rep.hamiltonian_drift;
  s["gamma_drift"] = rep.gamma_drift;
  json fin = json::array();
  const auto& last = tr.states.back();
  for (const auto& a : last.omega.atoms()) fin.push_back({a.pos(0), a.pos(1)});
  for (const auto& b : last.omega.blobs()) fin.push_back({b.center(0), b.center(1)});
  s["final_positions"] = fin;
  s["final_gamma"] = last.gamma;
  write_json(out_path(c, "summary.json"), s);
  finish(c, "simulate", g, s);
  return exit_ok;
}

void write_residual_csv(const std::string& path, const ResidualSeries& r) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
  f.precision(17);
  f << "t,residual,mass_rate,boundary,harmonic,kernel,pairing\n";
  for (size_t k = 0; k < r.t.size(); ++k)
    f << r.t[k] << "," << r.residual[k] << "," << r.mass_rate[k] << "," << r.boundary[k] << "," << r.harmonic[k]
      << "," << r.kernel[k] << "," << r.pairing[k] << "\n";
}

int cmd_audit(const std::string& config, const std::string& traj_file, const Globals& g) {
  Context c = open_context(config, g);
  if (c.rc.tests.empty()) throw Error(ErrorCode::ConfigError, "[audit] needs at least one 'test = ...' entry");
  const Trajectory tr = trajectory_for(c, traj_file);
  json s;
  s["tests"] = json::array();
  for (size_t i = 0; i < c.rc.tests.size(); ++i) {
    const TestFunction th = parse_test_function(c.rc.tests[i], c.domain);
    const ResidualSeries r = weak_residual(c.solver, tr, th);
    write_residual_csv(out_path(c, "residual_" + std::to_string(i) + ".csv"), r);
    json t;
    t["spec"] = c.rc.tests[i];
    t["class"] = boundary_class_name(th.boundary_class());
    t["max_residual"] = r.max_abs;
    t["quadrature_error"] = r.quadrature_error;
    if (traj_file.empty() && c.rc.levels > 1) {
      const auto conv = residual_convergence(c.solver, initial_state(c), c.rc.time.T, c.rc.time.dt, th, c.rc.levels,
                                             c.rc.time.scheme);
      t["dt"] = conv.dt;
      t["max_residual_per_level"] = conv.max_residual;
      t["ratio"] = conv.ratio;
      t["order"] = conv.order;
    }
    s["tests"].push_back(t);
  }
  write_json(out_path(c, "audit.json"), s);
  finish(c, "audit", g, s);
  return exit_ok;
}

int cmd_forces(const std::string& config, const std::string& traj_file, const Globals& g) {
  Context c = open_context(config, g);
  std::vector<int> comps = c.rc.force_components;
  if (comps.empty())
    for (int k = 1; k <= c.domain.genus(); ++k) comps.push_back(k);
  const Trajectory tr = trajectory_for(c, traj_file);
  std::vector<ForceRecord> recs(comps.size());
  parallel_for(long(comps.size()), g.threads,
               [&](long i) { recs[i] = net_force(c.solver, tr, comps[i], c.rc.force); });
  std::ofstream f(out_path(c, "forces.csv"));
  if (!f) throw Error(ErrorCode::IoError, "cannot write forces.csv");
  f.precision(17);
  f << "component,t,fx,fy,torque\n";
  json s;
  s["components"] = json::array();
  for (const auto& r : recs) {
    double fmax = 0.0, tmax = 0.0;
    for (size_t k = 0; k < r.t.size(); ++k) {
      f << r.index << "," << r.t[k] << "," << r.force[k](0) << "," << r.force[k](1) << "," << r.torque[k] << "\n";
      fmax = std::max(fmax, r.force[k].norm());
      tmax = std::max(tmax, std::abs(r.torque[k]));
    }
    json j;
    j["index"] = r.index;
    j["cutoff_band"] = {r.cutoff_inner, r.cutoff_outer};
    j["max_force"] = fmax;
    j["max_torque"] = tmax;
    j["tolerance"] = r.tolerance();
    j["quadrature_tolerance"] = r.quadrature_tolerance;
    j["differencing_tolerance"] = r.differencing_tolerance;
    j["audit"] = r.audit;
    j["audit_tolerance"] = r.audit_tolerance;
    s["components"].push_back(j);
  }
  write_json(out_path(c, "forces.json"), s);
  finish(c, "forces", g, s);
  return exit_ok;
}

int cmd_probe(const std::string& config, std::string points, const std::string& state, const Globals& g) {
  Context c = open_context(config, g);
  if (points.empty()) points = c.rc.probe_points;
  if (points.empty()) throw Error(ErrorCode::ConfigError, "probe needs --points or [probe] points");
  const auto pts = read_points_csv(points);
  FlowState s = c.rc.initial;
  if (!state.empty()) s.omega = read_measure_csv(state);
  const VelocityField u(c.solver, s.omega, s.gamma);
  std::vector<Vec2> v(pts.size());
  parallel_for(long(pts.size()), g.threads, [&](long i) { v[i] = u(pts[i]); });
  std::ofstream f(out_path(c, "velocity.csv"));
  if (!f) throw Error(ErrorCode::IoError, "cannot write velocity.csv");
  f.precision(17);
  f << "x,y,u,v\n";
  for (size_t i = 0; i < pts.size(); ++i) f << pts[i](0) << "," << pts[i](1) << "," << v[i](0) << "," << v[i](1) << "\n";
  json j;
  j["points"] = pts.size();
  j["alpha"] = u.alpha();
  j["gamma"] = u.circulations();
  finish(c, "probe", g, j);
  return exit_ok;
}

int cmd_validate_kernels(const std::string& config, const Globals& g) {
  Context c = open_context(config, g);
  const auto rep = c.solver->verify_kernel_bounds(c.rc.kernels);
  json j;
  j["condition_estimate"] = rep.condition_estimate;
  j["test_norm"] = rep.test_norm;
  j["estimates"] = json::array();
  bool finite = true;
  for (const auto& e : rep.estimates) {
    j["estimates"].push_back(
        {{"name", e.name}, {"supremum", e.supremum}, {"samples", e.samples}, {"min_separation", e.min_separation},
         {"finite", e.finite}});
    finite = finite && e.finite;
  }
  j["all_finite"] = finite;
  write_json(out_path(c, "kernels.json"), j);
  finish(c, "validate-kernels", g, j);
  return finite ? exit_ok : exit_numerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vortex dynamics in multiply connected planar domains"};
  app.set_version_flag("--version", version_string);
  app.require_subcommand(1);
  Globals g;
  app.add_option("--threads", g.threads, "worker threads for batch evaluation (0: all, 1: serial)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--out", g.out, "output directory (overrides [output] dir)");
  app.add_flag("-q,--quiet", g.quiet, "do not print the summary");

  std::string config, traj, points, state;
  bool force = false;
  auto add_config = [&](CLI::App* sub) { sub->add_option("config", config, "run configuration")->required(); };

  auto* build = app.add_subcommand("build", "factor the boundary system and write the solver cache");
  add_config(build);
  build->add_flag("--force", force, "rebuild even when the cache matches");
  auto* sim = app.add_subcommand("simulate", "evolve the configured vorticity");
  add_config(sim);
  auto* audit = app.add_subcommand("audit", "weak vorticity residuals and their convergence");
  add_config(audit);
  audit->add_option("--trajectory", traj, "trajectory CSV written by simulate");
  auto* forces = app.add_subcommand("forces", "net forces and torques on the boundary components");
  add_config(forces);
  forces->add_option("--trajectory", traj, "trajectory CSV written by simulate");
  auto* probe = app.add_subcommand("probe", "velocity at a list of points");
  add_config(probe);
  probe->add_option("--points", points, "CSV with x,y rows");
  probe->add_option("--state", state, "vorticity CSV replacing the configured state");
  auto* kern = app.add_subcommand("validate-kernels", "sampled kernel bound report");
  add_config(kern);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (build->parsed()) return cmd_build(config, force, g);
    if (sim->parsed()) return cmd_simulate(config, g);
    if (audit->parsed()) return cmd_audit(config, traj, g);
    if (forces->parsed()) return cmd_forces(config, traj, g);
    if (probe->parsed()) return cmd_probe(config, points, state, g);
    if (kern->parsed()) return cmd_validate_kernels(config, g);
  } catch (const Error& e) {
    std::cerr << "vflow: " << e.what() << "\n";
    return is_config_error(e.code()) ? exit_config : exit_numerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "vflow: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "vflow: " << e.what() << "\n";
    return exit_numerical;
  }
  return exit_config;
}
