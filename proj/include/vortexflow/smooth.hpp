#pragma once

#include <cmath>

#include "vortexflow/types.hpp"

namespace vflow {

// Value with first and second derivative of a scalar function of one variable.
struct Jet1 {
  double v = 0.0, d1 = 0.0, d2 = 0.0;
};

// Value, gradient and Hessian of a scalar function on the plane.
struct Jet2 {
  double v = 0.0;
  Vec2 g = Vec2::Zero();
  Mat2 h = Mat2::Zero();

  static Jet2 constant(double c) { return {c, Vec2::Zero(), Mat2::Zero()}; }
  static Jet2 coord(int i, const Vec2& x) {
    Jet2 j;
    j.v = x(i);
    j.g(i) = 1.0;
    return j;
  }
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) { return {a.v + b.v, a.g + b.g, a.h + b.h}; }
inline Jet2 operator-(const Jet2& a, const Jet2& b) { return {a.v - b.v, a.g - b.g, a.h - b.h}; }
inline Jet2 operator*(double s, const Jet2& a) { return {s * a.v, s * a.g, s * a.h}; }
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  return {a.v * b.v, a.v * b.g + b.v * a.g,
          a.v * b.h + b.v * a.h + a.g * b.g.transpose() + b.g * a.g.transpose()};
}
// f(g(x))
inline Jet2 compose(const Jet1& f, const Jet2& g) {
  return {f.v, f.d1 * g.g, f.d1 * g.h + f.d2 * g.g * g.g.transpose()};
}

// C-infinity step: 0 for u <= 0, 1 for u >= 1.
inline Jet1 smooth_step(double u) {
  if (u <= 0.0) return {0.0, 0.0, 0.0};
  if (u >= 1.0) return {1.0, 0.0, 0.0};
  const double w = 1.0 - u;
  const double q = 1.0 / w - 1.0 / u;
  const double q1 = 1.0 / (w * w) + 1.0 / (u * u);
  const double q2 = 2.0 / (w * w * w) - 2.0 / (u * u * u);
  const double L = 1.0 / (1.0 + std::exp(-q));
  const double L1 = L * (1.0 - L);
  const double L2 = L1 * (1.0 - 2.0 * L);
  return {L, L1 * q1, L2 * q1 * q1 + L1 * q2};
}

// 1 on [0, a], 0 on [b, inf), smooth in between.
inline Jet1 plateau(double r, double a, double b) {
  const double s = 1.0 / (b - a);
  const Jet1 st = smooth_step((r - a) * s);
  return {1.0 - st.v, -st.d1 * s, -st.d2 * s * s};
}

// Jet of |x - c|; the Hessian is dropped at the centre where it is singular.
inline Jet2 radius_jet(const Vec2& x, const Vec2& c) {
  const Vec2 d = x - c;
  const double r = d.norm();
  Jet2 j;
  j.v = r;
  if (r == 0.0) return j;
  j.g = d / r;
  j.h = (Mat2::Identity() - j.g * j.g.transpose()) / r;
  return j;
}

// Radial plateau as a planar jet; flat near the centre so the Hessian is exact there.
inline Jet2 radial_plateau(const Vec2& x, const Vec2& c, double a, double b) {
  const double r = (x - c).norm();
  if (r <= a) return Jet2::constant(1.0);
  if (r >= b) return Jet2::constant(0.0);
  return compose(plateau(r, a, b), radius_jet(x, c));
}

}  // namespace vflow
