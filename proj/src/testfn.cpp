#include "vortexflow/testfn.hpp"

#include <algorithm>
#include <cmath>

namespace vflow {

const char* boundary_class_name(BoundaryClass c) {
  switch (c) {
    case BoundaryClass::Yinf: return "Yinf";
    case BoundaryClass::Ybar: return "Ybar";
    case BoundaryClass::Free: return "free";
  }
  return "?";
}

TestFunction::TestFunction(Fn f, BoundaryClass cls, std::string name) : f_(std::move(f)), cls_(cls), name_(std::move(name)) {}

double TestFunction::boundary_value(const Domain& d, int index) const {
  return value(to_v(d.component(index).curve.z(0.0)));
}

double TestFunction::class_violation(const Domain& d, double collar, int nodes) const {
  double worst = 0.0;
  for (const auto& bc : d.components()) {
    const auto pts = bc.curve.sample(nodes);
    double lo = 1e300, hi = -1e300;
    for (const auto& p : pts) {
      const cplx tau = p.dz / std::abs(p.dz);
      const cplx nu = bc.side() * cplx(0.0, 1.0) * tau;  // into the fluid
      if (cls_ == BoundaryClass::Yinf) {
        for (double f : {0.0, 0.25, 0.5, 0.75, 1.0}) worst = std::max(worst, gradient(to_v(p.z + f * collar * nu)).norm());
      } else if (cls_ == BoundaryClass::Ybar) {
        const Jet2 j = jet(to_v(p.z));
        lo = std::min(lo, j.v);
        hi = std::max(hi, j.v);
        worst = std::max(worst, std::abs(j.g.dot(to_v(tau))));
      }
    }
    if (cls_ == BoundaryClass::Ybar) worst = std::max(worst, hi - lo);
  }
  return worst;
}

namespace {
BoundaryClass combine(BoundaryClass a, BoundaryClass b) {
  if (a == BoundaryClass::Free || b == BoundaryClass::Free) return BoundaryClass::Free;
  if (a == BoundaryClass::Ybar || b == BoundaryClass::Ybar) return BoundaryClass::Ybar;
  return BoundaryClass::Yinf;
}
}  // namespace

TestFunction TestFunction::operator+(const TestFunction& o) const {
  auto f = f_, g = o.f_;
  return TestFunction([f, g](const Vec2& x) { return f(x) + g(x); }, combine(cls_, o.cls_), name_ + "+" + o.name_);
}

TestFunction TestFunction::scaled(double s) const {
  auto f = f_;
  return TestFunction([f, s](const Vec2& x) { return s * f(x); }, cls_, name_);
}

TestFunction TestFunction::constant(double c) {
  return TestFunction([c](const Vec2&) { return Jet2::constant(c); }, BoundaryClass::Yinf, "constant");
}

TestFunction TestFunction::flat_bump(const Vec2& c, double r0, double r1, double a) {
  return TestFunction([=](const Vec2& x) { return a * radial_plateau(x, c, r0, r1); }, BoundaryClass::Yinf, "flat_bump");
}

Jet2 collar_plateau(const Domain& d, int slot, const Vec2& x, double a, double b) {
  if (d.certainly_beyond(slot, x, b)) return Jet2::constant(0.0);
  const auto p = d.project_onto(slot, x);
  const double s = p.in_fluid ? p.distance : -p.distance;
  if (s <= a) return Jet2::constant(1.0);
  if (s >= b) return Jet2::constant(0.0);
  return compose(plateau(s, a, b), d.distance_jet(slot, x));
}

TestFunction TestFunction::boundary_localizer(const Domain& d, int index, double inner, double outer) {
  const int slot = d.slot(index);
  const Domain* dp = &d;
  return TestFunction([=](const Vec2& x) { return collar_plateau(*dp, slot, x, inner, outer); }, BoundaryClass::Yinf,
                      "localizer" + std::to_string(index));
}

TestFunction TestFunction::random_ybar(const Domain& d, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const int m = int(d.components().size());
  std::vector<double> c(m), e(m), w(m);
  std::vector<Vec2> a(m);
  for (int s = 0; s < m; ++s) {
    c[s] = U(rng);
    e[s] = U(rng);
    a[s] = Vec2(U(rng), U(rng)) * 0.3 / scale;
    w[s] = d.collar_width(s);
  }
  // Interior bump centred at a random fluid point away from the boundary.
  Vec2 x0;
  const Vec2 fc = to_v(d.frame_center());
  const double R = d.exterior() ? 3.0 * d.length_scale() + 2.0 * scale : d.length_scale();
  for (int tries = 0;; ++tries) {
    x0 = fc + Vec2(U(rng), U(rng)) * R;
    if (d.contains(x0, 0.5 * scale) || tries > 1000) break;
  }
  const double r0 = 0.3 * scale, r1 = 1.2 * scale;
  const Vec2 q1(U(rng), U(rng));
  const double q0 = U(rng);
  const Domain* dp = &d;
  auto f = [=](const Vec2& x) {
    Jet2 acc = Jet2::constant(0.0);
    Jet2 outside = Jet2::constant(1.0);
    for (int s = 0; s < m; ++s) {
      const Jet2 P = collar_plateau(*dp, s, x, 0.3 * w[s], 0.9 * w[s]);
      if (P.v == 0.0 && P.g.isZero()) continue;
      const Jet2 sd = dp->distance_jet(s, x);
      Jet2 lin = Jet2::constant(1.0) + a[s].x() * Jet2::coord(0, x) + a[s].y() * Jet2::coord(1, x);
      acc = acc + c[s] * P + e[s] * (sd * P * lin);
      outside = outside * (Jet2::constant(1.0) - P);
    }
    const Jet2 T = radial_plateau(x, x0, r0, r1);
    if (T.v != 0.0 || !T.g.isZero()) {
      const Jet2 q = Jet2::constant(q0) + q1.x() * (Jet2::coord(0, x) - Jet2::constant(x0.x())) +
                     q1.y() * (Jet2::coord(1, x) - Jet2::constant(x0.y()));
      acc = acc + T * q * outside;
    }
    return acc;
  };
  return TestFunction(f, BoundaryClass::Ybar, "random_ybar");
}

TestFunction TestFunction::polynomial_times_bump(const Vec2& c, double r0, double r1, const Eigen::Vector4d& k) {
  auto f = [=](const Vec2& x) {
    const Jet2 X = Jet2::coord(0, x), Y = Jet2::coord(1, x);
    const Jet2 p = Jet2::constant(k(0)) + k(1) * X + k(2) * Y + k(3) * (X * Y);
    return p * radial_plateau(x, c, r0, r1);
  };
  return TestFunction(f, BoundaryClass::Yinf, "poly_bump");
}

}  // namespace vflow
