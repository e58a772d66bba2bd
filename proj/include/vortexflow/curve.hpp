#pragma once

#include <vector>

#include "vortexflow/types.hpp"

namespace vflow {

// Position, first and second parameter derivatives at one parameter value.
struct CurvePoint {
  cplx z;
  cplx dz;
  cplx d2z;
};

// Smooth closed curve t in [0, 2pi): a trigonometric polynomial, optionally
// composed with the Mobius map z -> rho/(z - c) and/or run backwards.
class Curve {
 public:
  Curve() = default;

  static Curve circle(const Vec2& center, double radius);
  static Curve ellipse(const Vec2& center, double a, double b, double angle);
  // Samples taken at equispaced parameter values; the closing point may be repeated.
  static Curve from_points(const std::vector<Vec2>& points);
  static Curve from_coefficients(std::vector<cplx> coef);  // n = -K..K, size 2K+1

  CurvePoint eval(double t) const;
  cplx z(double t) const { return eval(t).z; }

  Curve reversed() const;
  Curve mobius(cplx c, double rho) const;

  // Samples at t_j = 2 pi j / n.
  std::vector<CurvePoint> sample(int n) const;

  double signed_area() const;
  Vec2 centroid() const;
  double length() const;
  double max_speed() const;
  double speed_ratio() const;  // max |z'| / min |z'|
  int bandwidth() const { return kmax_; }
  bool is_transformed() const { return mobius_ || reversed_; }
  const std::vector<cplx>& coefficients() const { return coef_; }

 private:
  std::vector<cplx> coef_;
  int kmax_ = 0;
  bool reversed_ = false;
  bool mobius_ = false;
  cplx mc_{0.0, 0.0};
  double mrho_ = 1.0;
};

// Signed curvature of a parametrized curve (positive where it turns left).
inline double curvature(const CurvePoint& p) {
  const double s = std::abs(p.dz);
  return (std::conj(p.dz) * p.d2z).imag() / (s * s * s);
}

}  // namespace vflow
