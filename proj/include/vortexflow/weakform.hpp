#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "vortexflow/dynamics.hpp"
#include "vortexflow/quadrature.hpp"
#include "vortexflow/testfn.hpp"

namespace vflow {

// H_theta(x, y) = 1/2 (grad theta(x) . K(x, y) + grad theta(y) . K(y, x)); on the
// diagonal grad theta(x) . grad_x^perp H(x, y)|_{y = x}.
double symmetrized_kernel(const PotentialSolver& S, const TestFunction& theta, const Vec2& x, const Vec2& y);

// iint H_theta d omega d omega, using the diagonal rule for atoms.
Estimate kernel_double_integral(const VelocityField& u, const TestFunction& theta);
// sum_j alpha_j int X_j . grad theta d omega
Estimate harmonic_term(const VelocityField& u, const TestFunction& theta);

// d/dt of uniformly sampled data: centred inside, one-sided second order at the ends.
std::vector<double> time_derivative(const std::vector<double>& f, double dt);
// log2(coarse / fine) for errors at dt and dt / 2.
double halving_order(double coarse, double fine);

struct ResidualSeries {
  std::vector<double> t;
  std::vector<double> residual;
  std::vector<double> mass_rate;  // d/dt int theta d omega
  std::vector<double> boundary;   // sum gamma_j' theta|_{Gamma_j} (minus the outer term when bounded)
  std::vector<double> harmonic;   // sum alpha_j int X_j . grad theta d omega
  std::vector<double> kernel;     // iint H_theta d omega d omega
  std::vector<double> pairing;    // int theta d omega + sum gamma_j theta|_{Gamma_j} (signed as above)
  double max_abs = 0.0;
  double quadrature_error = 0.0;
};

// Pointwise-in-time residual of the weak vorticity equation. Throws
// IncompatibleDomain for test functions that do not fit the domain's boundary classes.
ResidualSeries weak_residual(const SolverPtr& S, const Trajectory& traj, const TestFunction& theta);

struct ResidualConvergence {
  std::vector<double> dt;
  std::vector<double> max_residual;
  std::vector<double> ratio;  // max_residual[k] / max_residual[k + 1]
  double order = 0.0;         // log2 of the last ratio
};

// Simulates with dt, dt / 2, ... (`levels` runs) and reports how the residual shrinks.
ResidualConvergence residual_convergence(const SolverPtr& S, const FlowState& initial, double T, double dt,
                                         const TestFunction& theta, int levels = 3, Scheme scheme = Scheme::RK4);

// Time-integrated form against a temporal weight rho:
//   int rho r dt  versus  [rho P] - int rho' P dt - int rho (harmonic + kernel) dt,
// with P the pairing. Both by the trapezoidal rule; they agree to differencing error.
struct IntegratedCheck {
  double from_residual = 0.0;
  double weak_form = 0.0;
  double difference() const { return std::abs(from_residual - weak_form); }
};
IntegratedCheck integrated_consistency(const ResidualSeries& r, const std::function<Jet1(double)>& rho);

// gamma_l' = -d/dt int theta_l d omega + sum_j alpha_j int X_j . grad theta_l d omega + iint H_theta_l.
// theta_l must equal 1 near Gamma_l and vanish near the other components (BadLocalizer otherwise).
std::vector<double> circulation_ode_rhs(const SolverPtr& S, const Trajectory& traj, int index,
                                        const TestFunction& theta);

struct IdentityCheck {
  double lhs = 0.0;  // int (u (x) u) : grad grad^perp theta
  double rhs = 0.0;  // -iint H_theta - sum alpha_j int X_j . grad theta
  double lhs_error = 0.0;
  double rhs_error = 0.0;
  double tolerance = 0.0;
  bool agrees() const { return std::abs(lhs - rhs) <= tolerance; }
};

// The left side uses FluidQuadrature at spacing h and 2h, restricted to the
// support of the test functions; h = 0 picks a quarter of the default fluid
// spacing, which resolves the collar plateaus of random Ybar functions.
IdentityCheck check_identity(const VelocityField& u, const TestFunction& theta, const FluidQuadratureOptions& opt = {});
// Same for several test functions, sharing one velocity evaluation per node.
std::vector<IdentityCheck> check_identities(const VelocityField& u, const std::vector<TestFunction>& thetas,
                                            const FluidQuadratureOptions& opt = {});

enum class ForceComponent { Fx, Fy, Torque };

// Divergence-free field Phi = grad^perp psi with analytic gradient.
struct TestField {
  std::function<Jet2(const Vec2&)> stream;
  Vec2 value(const Vec2& x) const { return perp(stream(x).g); }
  // J(a, b) = d Phi_a / d x_b
  Mat2 gradient(const Vec2& x) const;
};

// Phi_i^1 = -grad^perp(x_2 chi_i), Phi_i^2 = grad^perp(x_1 chi_i),
// Psi_i = grad^perp(|x - centroid_i|^2 chi_i / 2), chi_i a collar plateau of Gamma_i
// dropping from 1 to 0 between distances a and b (default 0.3 and 0.9 collar widths).
TestField test_field(const Domain& d, int index, ForceComponent which, double a = -1.0, double b = -1.0);

// ((u . grad) Phi) . u for Phi = grad^perp psi with Hessian h; also (u (x) u) : grad grad^perp psi.
double transport_form(const Mat2& h, const Vec2& u);

struct ForceOptions {
  int tangential_nodes = 128;
  int gauss_nodes = 32;       // per radial panel (the cut-off transition is steep)
  int audit_fields = 3;       // random tangent fields for the F_u audit (0: skip)
  std::uint64_t seed = 7;
  FluidQuadratureOptions audit_quadrature{};
};

struct ForceRecord {
  int index = 0;
  double cutoff_inner = 0.0, cutoff_outer = 0.0;  // chi_i transition band
  std::vector<double> t;
  std::vector<Vec2> force;     // f_i = -(F_u(Phi_i^1), F_u(Phi_i^2))
  std::vector<double> torque;  // -F_u(Psi_i)
  double quadrature_tolerance = 0.0;
  double differencing_tolerance = 0.0;
  std::vector<double> audit;  // |F_u(Phi)| for tangent fields at the middle sample
  double audit_tolerance = 0.0;
  double tolerance() const { return quadrature_tolerance + differencing_tolerance; }
};

// Throws AtomsPresent when any state carries atoms, TrajectoryTooShort below 3 steps.
ForceRecord net_force(const SolverPtr& S, const Trajectory& traj, int index, const ForceOptions& opt = {});
inline ForceRecord torque(const SolverPtr& S, const Trajectory& traj, int index, const ForceOptions& opt = {}) {
  return net_force(S, traj, index, opt);
}

}  // namespace vflow
