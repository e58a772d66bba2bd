#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "vortexflow/geometry.hpp"
#include "vortexflow/kernels.hpp"

namespace vflow::detail {

struct Interval {
  double lo, hi;
  const Charge* q;
};

// Supports of the charges in the distance coordinate of one component.
inline std::vector<Interval> support_intervals(const Domain& d, int slot, const std::vector<Charge>& charges, double reach) {
  std::vector<Interval> out;
  for (const auto& q : charges) {
    const double r = support_radius(q);
    const auto p = d.project_onto(slot, q.pos);
    const double s = p.in_fluid ? p.distance : -p.distance;
    if (s - r > reach) continue;
    out.push_back({s - r, s + r, &q});
  }
  std::sort(out.begin(), out.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  return out;
}

// Widest subinterval of [0, reach] free of support; width 0 when there is none.
inline std::pair<double, double> widest_gap(const std::vector<Interval>& iv, double reach) {
  std::pair<double, double> best{0.0, 0.0};
  double cur = 0.0;
  for (const auto& i : iv) {
    const double top = std::min(i.lo, reach);
    if (top - cur > best.second - best.first) best = {cur, top};
    cur = std::max(cur, i.hi);
    if (cur >= reach) break;
  }
  if (reach - cur > best.second - best.first) best = {cur, reach};
  return best;
}

}  // namespace vflow::detail
