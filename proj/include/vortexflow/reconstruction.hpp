#pragma once

#include <functional>
#include <vector>

#include "vortexflow/potential.hpp"
#include "vortexflow/vorticity.hpp"

namespace vflow {

// Boundary circulations indexed like Domain::components(). For bounded domains
// entry 0 is gamma_0 on the outer curve, taken counterclockwise; every other
// entry uses tau = -n^perp (counterclockwise around obstacles and holes).
using CirculationVector = std::vector<double>;

// Accepts either one entry per component or, for bounded domains, the hole
// entries only; gamma_0 = sum_j gamma_j + int d omega is filled in (Stokes) and
// a supplied gamma_0 must agree with it.
CirculationVector complete_circulations(const Domain& d, const VorticityMeasure& w, const CirculationVector& gamma);

// alpha_j = gamma_j + int w_j d omega for the harmonic fields j = 1..k (entry j-1).
std::vector<double> alpha_coefficients(const PotentialSolver& S, const VorticityMeasure& w, const CirculationVector& gamma);

// K[omega](x); throws EvaluationAtAtom at an atom.
Vec2 biot_savart_velocity(const PotentialSolver& S, const VorticityMeasure& w, const Vec2& x);

// u = K[omega] + sum_j alpha_j X_j.
class VelocityField {
 public:
  VelocityField() = default;
  VelocityField(SolverPtr S, VorticityMeasure w, const CirculationVector& gamma);

  Vec2 operator()(const Vec2& x) const { return vortical(x) + harmonic(x); }
  Vec2 vortical(const Vec2& x) const { return src_.velocity(x); }
  Vec2 harmonic(const Vec2& x) const;
  // Velocity at atom i without its own singular part (Kirchhoff-Routh).
  Vec2 at_atom(int i) const;

  const std::vector<double>& alpha() const { return alpha_; }
  const CirculationVector& circulations() const { return gamma_; }
  const VorticityMeasure& vorticity() const { return w_; }
  const SourceField& source() const { return src_; }
  const PotentialSolver& solver() const { return *S_; }
  SolverPtr solver_ptr() const { return S_; }

 private:
  SolverPtr S_;
  VorticityMeasure w_;
  CirculationVector gamma_;
  std::vector<double> alpha_;
  SourceField src_;
};

VelocityField reconstruct_velocity(SolverPtr S, const VorticityMeasure& w, const CirculationVector& gamma);

enum class CirculationMode { LineIntegral, WeakForm, Both };

struct CirculationReport {
  CirculationVector line;   // contour integrals
  CirculationVector weak;   // -int (phi_j omega + u . grad^perp phi_j)
  double disagreement = 0.0;
  CirculationVector value() const { return line.empty() ? weak : line; }
};

// Contour integrals of u around every component. The contour is the boundary
// curve shifted into the fluid by half the gap to the vorticity support, which
// by Stokes carries the same circulation. Both mode throws InconsistentModes
// when the two evaluations differ by more than 1e-4 (1 + |gamma|).
CirculationReport circulations_from_velocity(const Domain& d, const std::function<Vec2(const Vec2&)>& u,
                                             const VorticityMeasure& w, CirculationMode mode = CirculationMode::Both);
CirculationReport circulations_from_velocity(const VelocityField& u, CirculationMode mode = CirculationMode::Both);

}  // namespace vflow
