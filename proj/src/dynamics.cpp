#include "vortexflow/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace vflow {

const char* scheme_name(Scheme s) { return s == Scheme::RK4 ? "rk4" : "midpoint"; }

Scheme scheme_from_name(const std::string& s) {
  if (s == "rk4" || s == "RK4") return Scheme::RK4;
  if (s == "midpoint") return Scheme::Midpoint;
  throw Error(ErrorCode::ConfigError, "unknown scheme '" + s + "'");
}

namespace {

std::vector<Vec2> positions(const VorticityMeasure& w) {
  std::vector<Vec2> p;
  for (const auto& a : w.atoms()) p.push_back(a.pos);
  for (const auto& b : w.blobs()) p.push_back(b.center);
  return p;
}

VorticityMeasure moved(const VorticityMeasure& w, const std::vector<Vec2>& p) {
  std::vector<Atom> atoms = w.atoms();
  const size_t na = atoms.size();
  for (size_t i = 0; i < na; ++i) atoms[i].pos = p[i];
  return w.with_atoms(std::move(atoms)).with_blob_centers(std::vector<Vec2>(p.begin() + long(na), p.end()));
}

void check_collisions(const VorticityMeasure& w) {
  const auto& a = w.atoms();
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = i + 1; j < a.size(); ++j)
      if ((a[i].pos - a[j].pos).norm() < collision_distance)
        throw Error(ErrorCode::CollidingVortices,
                    "atoms " + std::to_string(i) + " and " + std::to_string(j) + " collided");
}

void check_inside(const Domain& d, const VorticityMeasure& w) {
  for (size_t i = 0; i < w.atoms().size(); ++i)
    if (!d.contains(w.atoms()[i].pos, exit_margin))
      throw Error(ErrorCode::VortexExitedDomain, "atom " + std::to_string(i) + " left the fluid");
  for (size_t i = 0; i < w.blobs().size(); ++i) {
    const auto& b = w.blobs()[i];
    if (!d.contains(b.center, exit_margin + support_radius(Charge{b.center, b.strength, b.radius, b.profile})))
      throw Error(ErrorCode::VortexExitedDomain, "blob " + std::to_string(i) + " reached the boundary");
  }
}

void reject_grid(const VorticityMeasure& w) {
  if (!w.grid().empty())
    throw Error(ErrorCode::InvalidArgument, "grid densities are not transported; use atoms or blobs");
}

std::vector<Vec2> rates(const SolverPtr& S, const VorticityMeasure& w, const CirculationVector& gamma) {
  reject_grid(w);
  check_collisions(w);
  check_inside(S->domain(), w);
  const VelocityField u(S, w, gamma);
  const int n = int(w.atoms().size() + w.blobs().size());
  std::vector<Vec2> v(n);
  // Charges are ordered atoms first, then blobs, as in VorticityMeasure::charges.
  for (int i = 0; i < n; ++i) {
    const Vec2 x = u.source().charges()[i].pos;
    v[i] = u.source().velocity_at_charge(i) + u.harmonic(x);
  }
  return v;
}

std::vector<Vec2> axpy(const std::vector<Vec2>& x, double a, const std::vector<Vec2>& y) {
  std::vector<Vec2> r(x.size());
  for (size_t i = 0; i < x.size(); ++i) r[i] = x[i] + a * y[i];
  return r;
}

}  // namespace

std::vector<Vec2> vortex_velocities(const SolverPtr& S, const FlowState& state) {
  return rates(S, state.omega, state.gamma);
}

Vec2 vortex_velocity(const SolverPtr& S, const FlowState& state, int i) {
  const auto v = vortex_velocities(S, state);
  if (i < 0 || i >= int(v.size())) throw Error(ErrorCode::InvalidArgument, "vortex index out of range");
  return v[i];
}

FlowState step(const SolverPtr& S, const FlowState& state, double dt, Scheme scheme) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const auto& w = state.omega;
  reject_grid(w);
  const auto gamma = complete_circulations(S->domain(), w, state.gamma);
  const auto x0 = positions(w);
  auto f = [&](const std::vector<Vec2>& x) { return rates(S, moved(w, x), gamma); };
  std::vector<Vec2> x1;
  if (x0.empty()) {
    x1 = x0;
  } else if (scheme == Scheme::Midpoint) {
    const auto k1 = f(x0);
    const auto k2 = f(axpy(x0, 0.5 * dt, k1));
    x1 = axpy(x0, dt, k2);
  } else {
    const auto k1 = f(x0);
    const auto k2 = f(axpy(x0, 0.5 * dt, k1));
    const auto k3 = f(axpy(x0, 0.5 * dt, k2));
    const auto k4 = f(axpy(x0, dt, k3));
    x1 = x0;
    for (size_t i = 0; i < x0.size(); ++i) x1[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  FlowState out{state.t + dt, moved(w, x1), gamma};
  check_inside(S->domain(), out.omega);
  check_collisions(out.omega);
  return out;
}

Trajectory simulate(const SolverPtr& S, const FlowState& initial, double T, double dt, Scheme scheme) {
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "T must be positive");
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const long n = std::max(1L, long(std::ceil(T / dt - 1e-9)));
  Trajectory tr;
  tr.dt = dt;
  tr.scheme = scheme;
  tr.states.reserve(n + 1);
  FlowState s = initial;
  s.gamma = complete_circulations(S->domain(), s.omega, s.gamma);
  tr.states.push_back(s);
  for (long k = 1; k <= n; ++k) {
    s = step(S, s, dt, scheme);
    s.t = initial.t + double(k) * dt;  // uniform grid without accumulated rounding
    tr.states.push_back(s);
  }
  return tr;
}

double suggest_dt(const SolverPtr& S, const FlowState& state, double cfl) {
  const auto p = positions(state.omega);
  if (p.empty()) return 0.1;
  double len = 1e300;
  for (size_t i = 0; i < p.size(); ++i) {
    len = std::min(len, S->domain().distance_to_boundary(p[i]));
    for (size_t j = i + 1; j < p.size(); ++j) len = std::min(len, (p[i] - p[j]).norm());
  }
  double vmax = 0.0;
  for (const auto& v : vortex_velocities(S, state)) vmax = std::max(vmax, v.norm());
  return vmax > 0.0 ? cfl * len / vmax : 0.1;
}

double conserved_scalar(const Domain& d, const FlowState& state) {
  const auto g = complete_circulations(d, state.omega, state.gamma);
  double s = state.omega.total_mass();
  for (size_t k = 0; k < g.size(); ++k) s += (!d.exterior() && k == 0) ? -g[k] : g[k];
  return s;
}

double kirchhoff_routh_hamiltonian(const SolverPtr& S, const FlowState& state) {
  std::vector<Charge> pts;
  for (const auto& a : state.omega.atoms()) pts.push_back({a.pos, a.strength, 0.0, Profile::Point});
  for (const auto& b : state.omega.blobs()) pts.push_back({b.center, b.strength, 0.0, Profile::Point});
  if (pts.empty()) return 0.0;
  const auto src = S->sources(pts);
  const VorticityMeasure as_points(
      [&] {
        std::vector<Atom> a;
        for (const auto& q : pts) a.push_back({q.pos, q.strength});
        return a;
      }(),
      {});
  const auto alpha = alpha_coefficients(*S, as_points, state.gamma);
  double h = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    // Everything except the free log self term: sum_{j != i} G_j G(x_i, x_j) + G_i H(x_i, x_i).
    double psi = src.regular_value(pts[i].pos);
    for (size_t j = 0; j < pts.size(); ++j)
      if (j != i) psi += pts[j].strength * std::log((pts[i].pos - pts[j].pos).norm()) / two_pi;
    h += 0.5 * pts[i].strength * psi;
    for (int l = 1; l <= S->field_count(); ++l)
      h += pts[i].strength * alpha[l - 1] * S->stream_function(l, pts[i].pos);
  }
  return h;
}

ConservationReport conservation_report(const SolverPtr& S, const Trajectory& traj) {
  if (traj.states.empty()) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
  ConservationReport r;
  for (const auto& s : traj.states) {
    r.t.push_back(s.t);
    r.scalar.push_back(conserved_scalar(S->domain(), s));
    r.hamiltonian.push_back(kirchhoff_routh_hamiltonian(S, s));
    r.gamma.push_back(complete_circulations(S->domain(), s.omega, s.gamma));
  }
  const double h0 = r.hamiltonian[0];
  for (size_t k = 0; k < r.t.size(); ++k) {
    r.scalar_drift = std::max(r.scalar_drift, std::abs(r.scalar[k] - r.scalar[0]));
    r.hamiltonian_drift = std::max(r.hamiltonian_drift, std::abs(r.hamiltonian[k] - h0) / std::max(std::abs(h0), 1e-300));
    for (size_t j = 0; j < r.gamma[k].size(); ++j)
      r.gamma_drift = std::max(r.gamma_drift, std::abs(r.gamma[k][j] - r.gamma[0][j]));
  }
  return r;
}

}  // namespace vflow
