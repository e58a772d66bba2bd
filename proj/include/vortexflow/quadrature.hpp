#pragma once

#include <functional>
#include <vector>

#include "vortexflow/geometry.hpp"
#include "vortexflow/kernels.hpp"

namespace vflow {

struct FluidQuadratureOptions {
  double h = 0.0;           // Cartesian spacing; 0: min(length scale / 40, collar width / 20)
  int collar_nodes = 0;     // tangential nodes per collar; 0: from h
  int collar_gauss = 24;    // Gauss points per radial panel (two panels)
  double radius = 0.0;      // exterior: radius of the Cartesian disk around the frame centre; 0: automatic
  bool far_field = true;    // exterior: add the log-polar far field and the decay tail
  double far_ratio = 100.0; // outer radius of the far field relative to `radius`
  int far_radial = 24;
  int far_angular = 64;
  // Optional support hint: Cartesian nodes are kept only in blocks of cells
  // where `active` holds at some probe point of the block or a neighbouring block.
  std::function<bool(const Vec2&)> active;
};

// Weighted nodes integrating smooth functions over the fluid domain. Built
// from a partition of unity: collar patches in (arclength, distance)
// coordinates near each component, a Cartesian midpoint grid elsewhere, and
// for exterior domains a log-polar far field with a 1/r^4 tail ring.
class FluidQuadrature {
 public:
  static FluidQuadrature build(const Domain& domain, const FluidQuadratureOptions& opt = {});
  // Spacing used when FluidQuadratureOptions::h is 0.
  static double default_spacing(const Domain& domain);
  // Band 0 <= s <= width next to one component, with unit weight (no partition).
  static FluidQuadrature collar(const Domain& domain, int slot, double width, int nt, int ng);
  // Band inner <= s <= outer next to one component, with unit weight.
  static FluidQuadrature band(const Domain& domain, int slot, double inner, double outer, int nt, int ng);

  const std::vector<WeightedPoint>& points() const { return pts_; }
  double spacing() const { return h_; }
  // Nodes from tail_begin() on model the region beyond the far field assuming 1/r^4 decay.
  size_t tail_begin() const { return tail_; }

  double integrate(const std::function<double(const Vec2&)>& f) const;
  // Integral and the part carried by the tail ring.
  std::pair<double, double> integrate_with_tail(const std::function<double(const Vec2&)>& f) const;

 private:
  std::vector<WeightedPoint> pts_;
  double h_ = 0.0;
  size_t tail_ = 0;
};

}  // namespace vflow
