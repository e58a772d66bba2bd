#include "vortexflow/kernels.hpp"

#include <cmath>

#include "vortexflow/errors.hpp"
#include "vortexflow/geometry.hpp"

namespace vflow {

namespace {

constexpr double kEuler = 0.57721566490153286061;
constexpr double kGaussReach = 6.0;

// P(s) with P' = M(s)/s for the bump profile, M(s) = 1 - (1 - s^2)^4.
double bump_p(double s) {
  const double s2 = s * s;
  return s2 * (2.0 + s2 * (-1.5 + s2 * (2.0 / 3.0 - s2 / 8.0)));
}

double bump_self_constant() {
  static const double v = [] {
    std::vector<double> x, w;
    gauss_legendre(16, 0.0, 1.0, x, w);
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i)
      s += w[i] * (bump_p(1.0) - bump_p(x[i])) * 8.0 * x[i] * std::pow(1.0 - x[i] * x[i], 3);
    return s;
  }();
  return v;
}

}  // namespace

double expint_e1(double x) { return -std::expint(-x); }

const char* profile_name(Profile p) {
  switch (p) {
    case Profile::Point: return "point";
    case Profile::Bump: return "bump";
    case Profile::Gaussian: return "gaussian";
    case Profile::TopHat: return "tophat";
  }
  return "?";
}

Profile profile_from_name(const std::string& s) {
  if (s == "bump" || s.empty()) return Profile::Bump;
  if (s == "gaussian") return Profile::Gaussian;
  if (s == "tophat") return Profile::TopHat;
  if (s == "point") return Profile::Point;
  throw Error(ErrorCode::ConfigError, "unknown blob profile '" + s + "'");
}

double support_radius(const Charge& q) {
  switch (q.profile) {
    case Profile::Point: return 0.0;
    case Profile::Gaussian: return kGaussReach * q.radius;
    default: return q.radius;
  }
}

double density(const Charge& q, const Vec2& x) {
  const double d = q.radius;
  const double s2 = (x - q.pos).squaredNorm() / (d * d);
  switch (q.profile) {
    case Profile::Point: return 0.0;
    case Profile::Bump: return s2 < 1.0 ? 4.0 * q.strength / (pi * d * d) * std::pow(1.0 - s2, 3) : 0.0;
    case Profile::Gaussian: return q.strength / (pi * d * d) * std::exp(-s2);
    case Profile::TopHat: return s2 < 1.0 ? q.strength / (pi * d * d) : 0.0;
  }
  return 0.0;
}

double enclosed_fraction(const Charge& q, double r) {
  if (q.profile == Profile::Point) return 1.0;
  const double s = r / q.radius;
  switch (q.profile) {
    case Profile::Bump: return s >= 1.0 ? 1.0 : 1.0 - std::pow(1.0 - s * s, 4);
    case Profile::Gaussian: return -std::expm1(-s * s);
    case Profile::TopHat: return s >= 1.0 ? 1.0 : s * s;
    default: return 1.0;
  }
}

double free_potential(const Charge& q, const Vec2& x) {
  const double r = (x - q.pos).norm();
  const double c = q.strength / two_pi;
  const double d = q.radius;
  switch (q.profile) {
    case Profile::Point: return c * std::log(r);
    case Profile::Bump:
      if (r >= d) return c * std::log(r);
      return c * (std::log(d) - (bump_p(1.0) - bump_p(r / d)));
    case Profile::Gaussian: {
      const double u = r * r / (d * d);
      if (u < 1e-12) return c * (std::log(d) - 0.5 * kEuler + 0.5 * u);
      if (u > 700.0) return c * std::log(r);
      return c * (std::log(r) + 0.5 * expint_e1(u));
    }
    case Profile::TopHat:
      if (r >= d) return c * std::log(r);
      return c * (std::log(d) + 0.5 * (r * r / (d * d) - 1.0));
  }
  return 0.0;
}

Vec2 free_gradient(const Charge& q, const Vec2& x) {
  const Vec2 dx = x - q.pos;
  const double r2 = dx.squaredNorm();
  const double c = q.strength / two_pi;
  if (q.profile == Profile::Point) return c * dx / r2;
  const double d = q.radius;
  const double s2 = r2 / (d * d);
  // M(s)/r^2 written to stay finite at the centre.
  double f;
  switch (q.profile) {
    case Profile::Bump:
      if (s2 >= 1.0) {
        f = 1.0 / r2;
      } else {
        // (1 - (1-s^2)^4)/s^2 = 4 - 6 s^2 + 4 s^4 - s^6
        f = (4.0 - s2 * (6.0 - s2 * (4.0 - s2))) / (d * d);
      }
      break;
    case Profile::Gaussian:
      f = s2 < 1e-8 ? (1.0 - 0.5 * s2) / (d * d) : -std::expm1(-s2) / r2;
      break;
    case Profile::TopHat:
      f = s2 >= 1.0 ? 1.0 / r2 : 1.0 / (d * d);
      break;
    default:
      f = 1.0 / r2;
  }
  return c * f * dx;
}

double self_energy(const Charge& q) {
  const double c = q.strength * q.strength / two_pi;
  const double d = q.radius;
  switch (q.profile) {
    case Profile::Point:
      throw Error(ErrorCode::UnresolvedSingularity, "self energy of a point vortex is infinite");
    case Profile::Bump: return c * (std::log(d) - bump_self_constant());
    case Profile::Gaussian: return c * (std::log(d) + 0.5 * (std::log(2.0) - kEuler));
    case Profile::TopHat: return c * (std::log(d) - 0.25);
  }
  return 0.0;
}

double pair_energy(const Charge& a, const Charge& b) {
  const double D = (a.pos - b.pos).norm();
  if (D >= support_radius(a) + support_radius(b)) return a.strength * b.strength / two_pi * std::log(D);
  if (b.profile == Profile::Point) return b.strength * free_potential(a, b.pos);
  if (a.profile == Profile::Point) return a.strength * free_potential(b, a.pos);
  double s = 0.0;
  const bool rough = a.profile == Profile::TopHat || b.profile == Profile::TopHat;
  for (const auto& p : charge_quadrature(b, rough ? 16 : 0, rough ? 32 : 0)) s += p.w * free_potential(a, p.x);
  return s;
}

std::vector<WeightedPoint> charge_quadrature(const Charge& q, int nr, int nt) {
  if (q.profile == Profile::Point) return {{q.pos, q.strength}};
  if (nr <= 0) nr = q.profile == Profile::Gaussian ? 24 : (q.profile == Profile::TopHat ? 8 : 10);
  if (nt <= 0) nt = q.profile == Profile::Gaussian ? 24 : (q.profile == Profile::TopHat ? 16 : 20);
  const double R = support_radius(q);
  std::vector<double> x, w;
  gauss_legendre(nr, 0.0, R, x, w);
  std::vector<WeightedPoint> pts;
  pts.reserve(nr * nt);
  double total = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double wr = w[i] * density(q, q.pos + Vec2(x[i], 0.0)) * x[i] * two_pi / nt;
    for (int j = 0; j < nt; ++j) {
      const double t = two_pi * (j + 0.5) / nt;
      pts.push_back({q.pos + x[i] * Vec2(std::cos(t), std::sin(t)), wr});
      total += wr;
    }
  }
  if (total != 0.0)
    for (auto& p : pts) p.w *= q.strength / total;
  return pts;
}

}  // namespace vflow
