#pragma once

#include <string>
#include <vector>

#include "vortexflow/reconstruction.hpp"

namespace vflow {

struct FlowState {
  double t = 0.0;
  VorticityMeasure omega;
  CirculationVector gamma;  // completed (one entry per component)
};

enum class Scheme { RK4, Midpoint };
const char* scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& s);

struct Trajectory {
  std::vector<FlowState> states;  // states[0] is the initial state
  double dt = 0.0;
  Scheme scheme = Scheme::RK4;
};

// Atoms closer than this count as collided.
inline constexpr double collision_distance = 1e-9;
// Atoms must stay this far inside the fluid.
inline constexpr double exit_margin = 1e-3;

// Velocities of all atoms followed by all blob centres: Kirchhoff-Routh for
// atoms (other charges plus own regular part plus harmonic fields), centre
// velocity for blobs (their own free field vanishes there).
std::vector<Vec2> vortex_velocities(const SolverPtr& S, const FlowState& state);
Vec2 vortex_velocity(const SolverPtr& S, const FlowState& state, int i);

// Advances atom positions and blob centres; strengths and circulations are
// untouched. Throws VortexExitedDomain, CollidingVortices, and InvalidArgument
// for grid densities (not transported).
FlowState step(const SolverPtr& S, const FlowState& state, double dt, Scheme scheme = Scheme::RK4);

// ceil(T / dt) uniform steps.
Trajectory simulate(const SolverPtr& S, const FlowState& initial, double T, double dt, Scheme scheme = Scheme::RK4);

// dt = cfl * (smallest pair or boundary distance) / (largest speed).
double suggest_dt(const SolverPtr& S, const FlowState& state, double cfl = 0.05);

// Total mass plus obstacle/hole circulations, minus gamma_0 for bounded domains.
double conserved_scalar(const Domain& d, const FlowState& state);
// sum_{i<j} G_i G_j G(x_i, x_j) + 1/2 sum G_i^2 H(x_i, x_i) + sum_i G_i sum_l alpha_l Psi_l(x_i),
// with blobs entering as points at their centres.
double kirchhoff_routh_hamiltonian(const SolverPtr& S, const FlowState& state);

struct ConservationReport {
  std::vector<double> t, scalar, hamiltonian;
  std::vector<CirculationVector> gamma;
  double scalar_drift = 0.0;       // max |scalar(t) - scalar(0)|
  double hamiltonian_drift = 0.0;  // max relative change
  double gamma_drift = 0.0;
};

ConservationReport conservation_report(const SolverPtr& S, const Trajectory& traj);

}  // namespace vflow
