#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vortexflow/geometry.hpp"
#include "vortexflow/kernels.hpp"
#include "vortexflow/laplace.hpp"
#include "vortexflow/testfn.hpp"

namespace vflow {

// Closed forms on the unit disk and its exterior.
double green_disk(const Vec2& x, const Vec2& y);
double green_exterior_disk(const Vec2& x, const Vec2& y);

class PotentialSolver;

// int G(x, y) d omega(y) for a finite set of radial charges, split as the
// free-space part N plus a harmonic correction.
class SourceField {
 public:
  SourceField() = default;
  double stream(const Vec2& x) const;
  // K[omega](x); throws EvaluationAtAtom at an atom position.
  Vec2 velocity(const Vec2& x) const;
  // Velocity at charge i with its own free-space part removed; for atoms this is
  // the Kirchhoff-Routh velocity (own regular part included).
  Vec2 velocity_at_charge(int i) const;
  // grad_x int H(x, y) d omega(y)
  Vec2 regular_gradient(const Vec2& x) const;
  double regular_value(const Vec2& x) const;
  Vec2 free_gradient_at(const Vec2& x, int skip = -1) const;
  const std::vector<Charge>& charges() const { return q_; }
  double mass() const { return mass_; }

 private:
  friend class PotentialSolver;
  std::shared_ptr<const PotentialSolver> solver_;
  std::vector<Charge> q_;
  double mass_ = 0.0;
  HarmonicFunction v_;
};

// G, K and their y-derivatives for one fixed source point y.
class PointKernel {
 public:
  double green(const Vec2& x) const;
  Vec2 k_xy(const Vec2& x) const;  // K(x, y)
  Vec2 k_yx(const Vec2& x) const;  // K(y, x) = grad_y^perp G(x, y)
  double regular(const Vec2& x) const;
  Vec2 source() const { return y_; }

 private:
  friend class PotentialSolver;
  std::shared_ptr<const PotentialSolver> solver_;
  Vec2 y_;
  HarmonicFunction h_, hx_, hy_;
};

struct KernelSamplePlan {
  int sources = 100;
  int targets = 100;
  double min_separation = 1e-3;
  double max_separation = 0.0;  // 0: a quarter of the length scale
  double boundary_margin = 0.0;  // 0: 0.02 * length scale
  double sample_radius = 0.0;    // exterior: sources within this distance of the frame centre
  std::uint64_t seed = 1;
};

struct BoundEstimate {
  std::string name;
  double supremum = 0.0;
  long samples = 0;
  double min_separation = 0.0;
  bool finite = true;
};

struct KernelBoundReport {
  std::vector<BoundEstimate> estimates;
  double condition_estimate = 0.0;
  double test_norm = 0.0;  // W^{1,inf} norm of f used for the symmetrized estimate
  const BoundEstimate* find(const std::string& name) const;
};

class PotentialSolver : public std::enable_shared_from_this<PotentialSolver> {
 public:
  static std::shared_ptr<const PotentialSolver> build(const Domain& domain, int n);
  // Same as build but reuses stored boundary-system factors.
  static std::shared_ptr<const PotentialSolver> from_factors(const Domain& domain, int n, Eigen::MatrixXd lu,
                                                             Eigen::VectorXi perm, double inverse_rcond);

  const Domain& domain() const { return dom_; }
  int resolution() const { return n_; }
  double condition_estimate() const { return ls_.inverse_rcond(); }
  const LaplaceSolver& boundary_solver() const { return ls_; }

  double green(const Vec2& x, const Vec2& y) const;
  Vec2 biot_savart_kernel(const Vec2& x, const Vec2& y) const;
  double routh_regular_part(const Vec2& x, const Vec2& y) const;
  Vec2 routh_gradient(const Vec2& x, const Vec2& y) const;  // grad_x H(x, y)
  PointKernel point_kernel(const Vec2& y) const;

  // Component indices: exterior 1..k, bounded 0..k (0 = outer).
  double harmonic_measure(int j, const Vec2& x) const;
  Vec2 harmonic_measure_gradient(int j, const Vec2& x) const;
  // j = 1..k
  double stream_function(int j, const Vec2& x) const;
  Vec2 harmonic_field(int j, const Vec2& x) const;
  // sum_j alpha[j - 1] X_j(x), evaluating each boundary density once.
  Vec2 harmonic_combination(const std::vector<double>& alpha, const Vec2& x) const;
  // Row j-1 holds Psi_j on each component, columns in component order.
  const Eigen::MatrixXd& boundary_constants() const { return cjl_; }
  // Indices that carry a harmonic field (1..k).
  int field_count() const { return dom_.genus(); }
  std::vector<int> measure_indices() const;

  SourceField sources(std::vector<Charge> charges) const;

  KernelBoundReport verify_kernel_bounds(const KernelSamplePlan& plan) const;

  // Helpers for the image frame.
  cplx image(const Vec2& x) const { return dom_.to_image(x); }
  cplx image_derivative(const Vec2& x) const;
  void check_point(const Vec2& x) const;

 private:
  PotentialSolver() = default;
  void finish_setup();
  HarmonicFunction solve_regular(const std::vector<Charge>& q, double mass) const;
  std::vector<double> singular_distances(const std::vector<Vec2>& pts) const;

  Domain dom_;
  int n_ = 0;
  LaplaceSolver ls_;
  bool ext_ = true;
  cplx c_{0.0, 0.0};
  double rho_ = 1.0;
  int image_curve_of(int j) const;

  std::vector<HarmonicFunction> wt_;  // one per image curve
  Eigen::MatrixXd period_;            // period_(m, l): circulation of grad^perp w_m around hole l
  HarmonicFunction h0_;               // exterior: regular part of the image Green function at 0
  Eigen::MatrixXd bcoef_;             // exterior: row j-1 = (b_0, b_1..); bounded: P^{-1}
  Eigen::MatrixXd cjl_;
};

using SolverPtr = std::shared_ptr<const PotentialSolver>;

}  // namespace vflow
