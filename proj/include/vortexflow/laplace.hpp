#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "vortexflow/curve.hpp"
#include "vortexflow/types.hpp"

namespace vflow {

// Dirichlet data on the boundary curves. singular_distance[c] is the distance
// from curve c to the nearest singularity of the analytic continuation of the
// data (empty = smooth everywhere).
struct BoundaryData {
  std::function<double(cplx)> value;
  std::vector<double> singular_distance;
};

namespace detail {
struct LaplaceCore;
struct HarmonicState;
}  // namespace detail

// Bounded harmonic function u with prescribed boundary values; u carries the
// representation Re sum_c C_c[sigma_c] + sum_k a_k log|z - p_k|.
class HarmonicFunction {
 public:
  HarmonicFunction() = default;
  double value(cplx z) const;
  // du/dx + i du/dy
  cplx gradient(cplx z) const;
  // Coefficient a_k of the logarithmic source inside hole k (k = 1..curves-1).
  double log_coefficient(int hole) const;
  // Circulation of grad^perp u around hole k, i.e. the flux of grad u out of the hole.
  double hole_flux(int hole) const { return two_pi * log_coefficient(hole); }
  bool split() const;

 private:
  friend class LaplaceSolver;
  std::shared_ptr<const detail::HarmonicState> s_;
};

// Nystrom solver for the Dirichlet problem on a bounded domain whose boundary
// consists of an outer curve (first) and holes, all counterclockwise.
class LaplaceSolver {
 public:
  LaplaceSolver() = default;
  LaplaceSolver(std::vector<Curve> curves, std::vector<cplx> hole_points, int n);

  HarmonicFunction solve(const BoundaryData& data) const;

  int nodes_per_curve() const;
  int curve_count() const;
  double inverse_rcond() const;
  double distance_to_curve(int c, cplx z) const;

  // LU factors with row permutation, for caching.
  const Eigen::MatrixXd& lu() const;
  const Eigen::VectorXi& permutation() const;
  static LaplaceSolver from_factors(std::vector<Curve> curves, std::vector<cplx> hole_points, int n,
                                    Eigen::MatrixXd lu, Eigen::VectorXi perm, double inverse_rcond);

  static constexpr double kIllConditioned = 1e12;
  static constexpr int kMaxFine = 1 << 18;

 private:
  std::shared_ptr<const detail::LaplaceCore> core_;
};

// d f / d t for samples of a periodic function at t_j = 2 pi j / n.
std::vector<double> periodic_derivative(const std::vector<double>& f);

}  // namespace vflow
