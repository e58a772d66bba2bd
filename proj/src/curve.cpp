#include "vortexflow/curve.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>

#include "vortexflow/errors.hpp"

namespace vflow {

Curve Curve::circle(const Vec2& center, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "circle radius must be positive");
  return from_coefficients({cplx(0.0), to_c(center), cplx(radius, 0.0)});
}

Curve Curve::ellipse(const Vec2& center, double a, double b, double angle) {
  if (!(a > 0.0 && b > 0.0)) throw Error(ErrorCode::InvalidArgument, "ellipse semi-axes must be positive");
  const cplx rot = std::polar(1.0, angle);
  return from_coefficients({rot * (0.5 * (a - b)), to_c(center), rot * (0.5 * (a + b))});
}

Curve Curve::from_points(const std::vector<Vec2>& points) {
  std::vector<cplx> z;
  z.reserve(points.size());
  for (const auto& p : points) z.push_back(to_c(p));
  if (z.size() > 1 && std::abs(z.front() - z.back()) <= 1e-12 * (1.0 + std::abs(z.front()))) z.pop_back();
  if (z.size() < 8) throw Error(ErrorCode::TooFewNodes, "point table needs at least 8 distinct points");
  const int n = static_cast<int>(z.size());
  Eigen::FFT<double> fft;
  std::vector<cplx> spec;
  fft.fwd(spec, z);
  // Drop the Nyquist mode so the interpolant stays real-symmetric in n.
  const int kmax = (n - 1) / 2;
  std::vector<cplx> coef(2 * kmax + 1);
  for (int k = -kmax; k <= kmax; ++k) coef[k + kmax] = spec[(k + n) % n] / double(n);
  return from_coefficients(std::move(coef));
}

Curve Curve::from_coefficients(std::vector<cplx> coef) {
  if (coef.size() % 2 == 0) throw Error(ErrorCode::InvalidArgument, "coefficient vector must have odd length");
  Curve c;
  c.kmax_ = static_cast<int>(coef.size() / 2);
  c.coef_ = std::move(coef);
  return c;
}

CurvePoint Curve::eval(double t) const {
  const double tb = reversed_ ? -t : t;
  cplx z = coef_[kmax_], dz = 0.0, d2z = 0.0;
  const cplx e = std::polar(1.0, tb);
  cplx ep = 1.0, em = 1.0;
  for (int k = 1; k <= kmax_; ++k) {
    ep *= e;
    em = std::conj(ep);
    const cplx a = coef_[kmax_ + k] * ep;
    const cplx b = coef_[kmax_ - k] * em;
    const double kk = k;
    z += a + b;
    dz += cplx(0.0, kk) * (a - b);
    d2z += -kk * kk * (a + b);
  }
  if (reversed_) dz = -dz;
  if (!mobius_) return {z, dz, d2z};
  const cplx w = 1.0 / (z - mc_);
  const cplx zm = mrho_ * w;
  const cplx dzm = -mrho_ * w * w * dz;
  const cplx d2zm = 2.0 * mrho_ * w * w * w * dz * dz - mrho_ * w * w * d2z;
  return {zm, dzm, d2zm};
}

Curve Curve::reversed() const {
  Curve c = *this;
  c.reversed_ = !reversed_;
  return c;
}

Curve Curve::mobius(cplx c0, double rho) const {
  if (mobius_) throw Error(ErrorCode::InvalidArgument, "curve already carries a Mobius map");
  Curve c = *this;
  c.mobius_ = true;
  c.mc_ = c0;
  c.mrho_ = rho;
  return c;
}

std::vector<CurvePoint> Curve::sample(int n) const {
  std::vector<CurvePoint> out(n);
  for (int j = 0; j < n; ++j) out[j] = eval(two_pi * j / n);
  return out;
}

namespace {
int area_nodes(int kmax) { return std::max(256, 8 * kmax + 64); }
}  // namespace

double Curve::signed_area() const {
  const int n = area_nodes(kmax_) * (mobius_ ? 4 : 1);
  double a = 0.0;
  for (const auto& p : sample(n)) a += (std::conj(p.z) * p.dz).imag();
  return 0.5 * a * two_pi / n;
}

Vec2 Curve::centroid() const {
  const int n = area_nodes(kmax_) * (mobius_ ? 4 : 1);
  double a = 0.0, mx = 0.0, my = 0.0;
  for (const auto& p : sample(n)) {
    const double x = p.z.real(), y = p.z.imag();
    const double dx = p.dz.real(), dy = p.dz.imag();
    a += 0.5 * (x * dy - y * dx);
    // Green: int x dA = 1/2 oint x^2 dy, int y dA = -1/2 oint y^2 dx
    mx += 0.5 * x * x * dy;
    my += -0.5 * y * y * dx;
  }
  return Vec2(mx / a, my / a);
}

double Curve::length() const {
  const int n = area_nodes(kmax_) * (mobius_ ? 4 : 1);
  double l = 0.0;
  for (const auto& p : sample(n)) l += std::abs(p.dz);
  return l * two_pi / n;
}

double Curve::max_speed() const {
  double s = 0.0;
  for (const auto& p : sample(area_nodes(kmax_))) s = std::max(s, std::abs(p.dz));
  return s;
}

double Curve::speed_ratio() const {
  double lo = 1e300, hi = 0.0;
  for (const auto& p : sample(area_nodes(kmax_))) {
    lo = std::min(lo, std::abs(p.dz));
    hi = std::max(hi, std::abs(p.dz));
  }
  return hi / lo;
}

}  // namespace vflow
