#include "vortexflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace vflow {

namespace {

std::vector<cplx> polygon(const Curve& c, int n) {
  std::vector<cplx> p(n);
  for (int j = 0; j < n; ++j) p[j] = c.z(two_pi * j / n);
  return p;
}

int probe_count(const Curve& c) { return std::max(512, 16 * c.bandwidth() + 64); }

double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

bool segments_cross(cplx a, cplx b, cplx c, cplx d) {
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

bool self_intersects(const std::vector<cplx>& p) {
  const int n = int(p.size());
  for (int i = 0; i < n; ++i) {
    const cplx a = p[i], b = p[(i + 1) % n];
    for (int j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_cross(a, b, p[j], p[(j + 1) % n])) return true;
    }
  }
  return false;
}

bool polygons_cross(const std::vector<cplx>& p, const std::vector<cplx>& q) {
  for (size_t i = 0; i < p.size(); ++i)
    for (size_t j = 0; j < q.size(); ++j)
      if (segments_cross(p[i], p[(i + 1) % p.size()], q[j], q[(j + 1) % q.size()])) return true;
  return false;
}

double winding(const std::vector<cplx>& p, cplx x) {
  double w = 0.0;
  for (size_t i = 0; i < p.size(); ++i) w += std::arg((p[(i + 1) % p.size()] - x) / (p[i] - x));
  return w / two_pi;
}

bool inside(const std::vector<cplx>& p, cplx x) { return std::abs(winding(p, x)) > 0.5; }

double min_distance(const std::vector<cplx>& p, const std::vector<cplx>& q) {
  double d = std::numeric_limits<double>::infinity();
  for (auto a : p)
    for (auto b : q) d = std::min(d, std::abs(a - b));
  return d;
}

void fnv(std::uint64_t& h, const void* data, size_t n) {
  const auto* b = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= b[i];
    h *= 1099511628211ull;
  }
}

void fnv_d(std::uint64_t& h, double v) { fnv(h, &v, sizeof v); }

Curve build_curve(const ComponentSpec& s) {
  switch (s.type) {
    case ComponentSpec::Type::Circle:
      return Curve::circle(s.center, s.radius);
    case ComponentSpec::Type::Ellipse:
      return Curve::ellipse(s.center, s.a, s.b, s.angle);
    case ComponentSpec::Type::Points:
      return Curve::from_points(s.points);
  }
  throw Error(ErrorCode::ConfigError, "unknown component type");
}

}  // namespace

int Domain::slot(int index) const {
  for (size_t s = 0; s < comps_.size(); ++s)
    if (comps_[s].index == index) return int(s);
  throw Error(ErrorCode::InvalidArgument, "no boundary component with index " + std::to_string(index));
}

bool Domain::certainly_beyond(int s, const Vec2& x, double b) const {
  if (comps_[s].outer) return false;
  return std::abs(to_c(x) - bound_[s].first) - bound_[s].second >= b;
}

BoundaryProjection Domain::project_onto(int s, const Vec2& x) const {
  const auto& bc = comps_[s];
  const auto& pr = probes_[s];
  const int n = int(pr.size());
  const cplx xc = to_c(x);
  // Seeds: the three best local minima of the sampled distance.
  thread_local std::vector<double> d2;
  d2.resize(n);
  for (int j = 0; j < n; ++j) d2[j] = std::norm(pr[j].z - xc);
  std::pair<double, int> mins[3];
  int nm = 0;
  for (int j = 0; j < n; ++j) {
    const double dj = d2[j];
    if (dj > d2[(j + n - 1) % n] || dj > d2[(j + 1) % n]) continue;
    std::pair<double, int> c{dj, j};
    if (nm < 3) mins[nm++] = c;
    else if (c < mins[2]) mins[2] = c;
    else continue;
    std::sort(mins, mins + nm);
  }
  const double dt = two_pi / n;
  BoundaryProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  for (int q = 0; q < nm; ++q) {
    double t = dt * mins[q].second;
    CurvePoint p = bc.curve.eval(t);
    for (int it = 0; it < 60; ++it) {
      const cplx r = p.z - xc;
      const double f = (r * std::conj(p.dz)).real();
      double fp = std::norm(p.dz) + (r * std::conj(p.d2z)).real();
      if (fp <= 0.0) fp = std::norm(p.dz);
      double step = -f / fp;
      step = std::clamp(step, -dt, dt);
      t += step;
      p = bc.curve.eval(t);
      if (std::abs(step) < 1e-14) break;
    }
    const double d = std::abs(p.z - xc);
    if (d < best.distance) {
      best.distance = d;
      best.t = std::fmod(t + 100.0 * two_pi, two_pi);
      best.foot = p;
    }
  }
  best.slot = s;
  const cplx nu = bc.side() * cplx(0.0, 1.0) * best.foot.dz / std::abs(best.foot.dz);
  best.in_fluid = ((xc - best.foot.z) * std::conj(nu)).real() >= 0.0;
  return best;
}

BoundaryProjection Domain::project(const Vec2& x) const {
  BoundaryProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  for (int s = 0; s < int(comps_.size()); ++s) {
    // Lower bound from the enclosing circle of the component.
    if (std::abs(to_c(x) - bound_[s].first) - bound_[s].second > best.distance) continue;
    auto p = project_onto(s, x);
    if (p.distance < best.distance) best = p;
  }
  return best;
}

bool Domain::contains(const Vec2& x, double margin) const {
  if (!x.allFinite()) return false;
  const auto p = project(x);
  return p.in_fluid && p.distance > margin;
}

cplx Domain::to_image(const Vec2& x) const {
  if (!exterior()) return to_c(x);
  return rho_ / (to_c(x) - fc_);
}

Vec2 Domain::from_image(cplx w) const {
  if (!exterior()) return to_v(w);
  return to_v(fc_ + rho_ / w);
}

Vec2 Domain::hole_centroid(int index) const { return component(index).curve.centroid(); }

Jet2 Domain::distance_jet(int s, const Vec2& x) const {
  const auto p = project_onto(s, x);
  const auto& bc = comps_[s];
  const double sg = bc.side();
  const cplx tau = p.foot.dz / std::abs(p.foot.dz);
  const cplx nu = sg * cplx(0.0, 1.0) * tau;
  const double kappa = curvature(p.foot);
  const double d = p.in_fluid ? p.distance : -p.distance;
  Jet2 j;
  j.v = d;
  j.g = to_v(nu);
  const Vec2 tv = to_v(tau);
  j.h = (-sg * kappa / (1.0 - sg * kappa * d)) * tv * tv.transpose();
  return j;
}

Domain make_domain(const DomainDescriptor& desc) {
  if (desc.components.empty()) throw Error(ErrorCode::ConfigError, "domain has no boundary components");
  Domain d;
  d.kind_ = desc.kind;
  d.desc_ = desc;
  const bool ext = desc.kind == DomainKind::Exterior;
  std::vector<std::vector<cplx>> polys;
  for (size_t i = 0; i < desc.components.size(); ++i) {
    BoundaryComponent bc;
    Curve c = build_curve(desc.components[i]);
    const double area = c.signed_area();
    if (std::abs(area) < 1e-14) throw Error(ErrorCode::NonSimpleCurve, "component encloses no area");
    bc.given_counterclockwise = area > 0.0;
    if (area < 0.0) c = c.reversed();
    bc.curve = c;
    bc.outer = !ext && i == 0;
    bc.index = ext ? int(i) + 1 : int(i);
    auto poly = polygon(c, std::max(256, 4 * c.bandwidth() + 16));
    if (self_intersects(poly)) throw Error(ErrorCode::NonSimpleCurve, "component " + std::to_string(bc.index) + " self-intersects");
    if (c.speed_ratio() > desc.max_speed_ratio)
      throw Error(ErrorCode::NonSimpleCurve, "parametrization speed varies by more than the configured ratio");
    polys.push_back(std::move(poly));
    d.comps_.push_back(std::move(bc));
  }
  const int m = int(d.comps_.size());
  const int first_inner = ext ? 0 : 1;
  if (!ext) {
    for (int i = 1; i < m; ++i) {
      bool ok = !polygons_cross(polys[0], polys[i]);
      for (auto z : polys[i]) ok = ok && inside(polys[0], z);
      if (!ok) throw Error(ErrorCode::HoleOutsideOuterBoundary, "hole " + std::to_string(i) + " is not strictly inside the outer boundary");
    }
  }
  for (int i = first_inner; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const bool bad = polygons_cross(polys[i], polys[j]) || inside(polys[i], polys[j][0]) || inside(polys[j], polys[i][0]);
      if (bad) throw Error(ErrorCode::OverlappingObstacles, "components " + std::to_string(d.comps_[i].index) + " and " + std::to_string(d.comps_[j].index) + " overlap");
    }

  for (const auto& bc : d.comps_) d.probes_.push_back(bc.curve.sample(probe_count(bc.curve)));
  for (const auto& pr : d.probes_) {
    cplx c = 0.0;
    for (const auto& p : pr) c += p.z;
    c /= double(pr.size());
    double r = 0.0, gap = 0.0;
    for (size_t j = 0; j < pr.size(); ++j) {
      r = std::max(r, std::abs(pr[j].z - c));
      gap = std::max(gap, std::abs(pr[(j + 1) % pr.size()].z - pr[j].z));
    }
    d.bound_.push_back({c, r + gap});
  }

  d.min_gap_ = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) d.min_gap_ = std::min(d.min_gap_, min_distance(polys[i], polys[j]));

  double scale = 0.0;
  for (const auto& bc : d.comps_) scale = std::max(scale, std::sqrt(std::abs(bc.curve.signed_area()) / pi));
  d.scale_ = scale;

  for (int s = 0; s < m; ++s) {
    const auto& bc = d.comps_[s];
    double kmax = 0.0;  // curvature that makes offsets into the fluid fold
    for (const auto& p : d.probes_[s]) kmax = std::max(kmax, bc.side() * curvature(p));
    double w = std::sqrt(std::abs(bc.curve.signed_area()) / pi) * 0.5;
    if (std::isfinite(d.min_gap_)) w = std::min(w, 0.5 * d.min_gap_);
    if (kmax > 0.0) w = std::min(w, 0.5 / kmax);
    d.collar_.push_back(w);
  }

  if (ext) {
    const auto& c1 = d.comps_[0].curve;
    const Vec2 cen = c1.centroid();
    if (!inside(polys[0], to_c(cen))) throw Error(ErrorCode::NonSimpleCurve, "centroid of obstacle 1 lies outside it");
    d.fc_ = to_c(cen);
    d.rho_ = d.project_onto(0, cen).distance;
    for (int s = 0; s < m; ++s) {
      Curve img = d.comps_[s].curve.mobius(d.fc_, d.rho_);
      if (img.signed_area() < 0.0) img = img.reversed();
      d.img_.push_back(img);
      d.img_src_.push_back(s);
      if (s > 0) {
        const Vec2 ic = img.centroid();
        const auto ip = polygon(img, 512);
        d.img_holes_.push_back(inside(ip, to_c(ic)) ? to_c(ic) : d.to_image(d.comps_[s].curve.centroid()));
      }
    }
  } else {
    for (int s = 0; s < m; ++s) {
      d.img_.push_back(d.comps_[s].curve);
      d.img_src_.push_back(s);
      if (s > 0) d.img_holes_.push_back(to_c(d.comps_[s].curve.centroid()));
    }
  }

  std::uint64_t h = 1469598103934665603ull;
  const int kind = ext ? 1 : 2;
  fnv(h, &kind, sizeof kind);
  for (const auto& s : desc.components) {
    const int t = int(s.type);
    fnv(h, &t, sizeof t);
    fnv_d(h, s.center.x());
    fnv_d(h, s.center.y());
    fnv_d(h, s.radius);
    fnv_d(h, s.a);
    fnv_d(h, s.b);
    fnv_d(h, s.angle);
    for (const auto& p : s.points) {
      fnv_d(h, p.x());
      fnv_d(h, p.y());
    }
  }
  d.hash_ = h;
  return d;
}

CutoffFamily::CutoffFamily(const Domain& domain, double n) : domain_(&domain), n_(n) {
  if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "cutoff index must be positive");
}

Jet2 CutoffFamily::jet(const Vec2& x) const {
  const auto p = domain_->project(x);
  if (!p.in_fluid) return Jet2::constant(0.0);
  const double d = p.distance;
  Jet2 a;
  if (d <= 1.0 / n_) {
    a = Jet2::constant(0.0);
  } else if (d >= 2.0 / n_) {
    a = Jet2::constant(1.0);
  } else {
    Jet1 s = smooth_step(n_ * d - 1.0);
    s.d1 *= n_;
    s.d2 *= n_ * n_;
    a = compose(s, domain_->distance_jet(p.slot, x));
  }
  if (!domain_->exterior()) return a;
  return a * radial_plateau(x, Vec2::Zero(), n_, 2.0 * n_);
}

double CutoffFamily::gradient_constant() {
  static const double c = [] {
    double m = 0.0;
    for (int i = 1; i < 20000; ++i) m = std::max(m, smooth_step(i / 20000.0).d1);
    return m;
  }();
  return c;
}

double cutoff_chi(const Domain& domain, double n, const Vec2& x) { return CutoffFamily(domain, n)(x); }

namespace {
constexpr int eta_power = 6;
double eta_raw(double r) {
  if (r >= 0.5) return 0.0;
  return std::pow(1.0 - 4.0 * r * r, eta_power);
}
}  // namespace

double mollifier_normalization() {
  static const double c = [] {
    std::vector<double> x, w;
    gauss_legendre(24, 0.0, 0.5, x, w);
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += w[i] * eta_raw(x[i]) * two_pi * x[i];
    return 1.0 / s;
  }();
  return c;
}

double mollifier_profile(double r) { return mollifier_normalization() * eta_raw(r); }

double mollifier_eta(double n, const Vec2& x) { return n * n * mollifier_profile(n * x.norm()); }

BoundaryQuadrature boundary_quadrature(const Domain& domain, int index, int n) {
  if (n < 16 || n % 2 != 0) throw Error(ErrorCode::TooFewNodes, "boundary quadrature needs an even node count >= 16");
  const auto& bc = domain.component(index);
  BoundaryQuadrature q;
  const double h = two_pi / n;
  for (const auto& p : bc.curve.sample(n)) {
    const double sp = std::abs(p.dz);
    const cplx tau_ccw = p.dz / sp;
    const cplx nhat = -bc.side() * cplx(0.0, 1.0) * tau_ccw;
    q.nodes.push_back(to_v(p.z));
    q.normals.push_back(to_v(nhat));
    q.tangents.push_back(-perp(to_v(nhat)));
    q.weights.push_back(sp * h);
  }
  return q;
}

void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * k - 1.0) * z * p2 - (k - 1.0) * p3) / k;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = 0.5 * (a + b) - 0.5 * (b - a) * z;
    w[i] = (b - a) / ((1.0 - z * z) * pp * pp);
  }
}

}  // namespace vflow
