#include "vortexflow/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace vflow {

namespace {

// Partition weight carried by the collar of one component, as a function of the signed distance.
double collar_weight(double s, double W) { return plateau(s, 0.3 * W, 0.9 * W).v; }

void add_band(std::vector<WeightedPoint>& out, const BoundaryComponent& bc, double width, int nt, int ng,
              const std::function<double(double)>& weight, const std::vector<double>& breaks) {
  std::vector<double> sx, sw;
  for (size_t p = 0; p + 1 < breaks.size(); ++p) {
    std::vector<double> x, w;
    gauss_legendre(ng, breaks[p] * width, breaks[p + 1] * width, x, w);
    sx.insert(sx.end(), x.begin(), x.end());
    sw.insert(sw.end(), w.begin(), w.end());
  }
  const double sg = bc.side();
  for (const auto& p : bc.curve.sample(nt)) {
    const double sp = std::abs(p.dz);
    const cplx tau = p.dz / sp;
    const cplx nu = sg * cplx(0.0, 1.0) * tau;
    const double kappa = curvature(p);
    for (size_t i = 0; i < sx.size(); ++i) {
      const double s = sx[i];
      const double w = weight(s);
      if (w == 0.0) continue;
      const double jac = sp * (1.0 - sg * kappa * s);
      out.push_back({to_v(p.z + s * nu), (two_pi / nt) * sw[i] * jac * w});
    }
  }
}

int even_at_least(double v, int lo) {
  int n = std::max(lo, int(std::ceil(v)));
  return n + (n & 1);
}

}  // namespace

FluidQuadrature FluidQuadrature::collar(const Domain& domain, int slot, double width, int nt, int ng) {
  return band(domain, slot, 0.0, width, nt, ng);
}

FluidQuadrature FluidQuadrature::band(const Domain& domain, int slot, double inner, double outer, int nt, int ng) {
  if (!(outer > inner) || inner < 0.0) throw Error(ErrorCode::InvalidArgument, "band needs 0 <= inner < outer");
  FluidQuadrature q;
  const double r = inner / outer;
  add_band(q.pts_, domain.components().at(slot), outer, nt, ng, [](double) { return 1.0; },
           {r, 0.5 * (1.0 + r), 1.0});
  q.h_ = (outer - inner) / ng;
  q.tail_ = q.pts_.size();
  return q;
}

double FluidQuadrature::default_spacing(const Domain& d) {
  double wmin = 1e300;
  for (size_t s = 0; s < d.components().size(); ++s) wmin = std::min(wmin, d.collar_width(int(s)));
  // The partition transition spans 0.6 W and needs about a dozen cells.
  return std::min(d.length_scale() / 40.0, 0.05 * wmin);
}

FluidQuadrature FluidQuadrature::build(const Domain& d, const FluidQuadratureOptions& opt) {
  FluidQuadrature q;
  const double L = d.length_scale();
  const int m = int(d.components().size());
  const double h = opt.h > 0.0 ? opt.h : default_spacing(d);
  q.h_ = h;

  double wmax = 0.0;
  for (int s = 0; s < m; ++s) {
    const auto& bc = d.components()[s];
    const double W = d.collar_width(s);
    wmax = std::max(wmax, W);
    const int nt = opt.collar_nodes > 0 ? opt.collar_nodes : even_at_least(bc.curve.length() / h, 64);
    add_band(q.pts_, bc, 0.9 * W, nt, opt.collar_gauss, [W](double s) { return collar_weight(s, W); },
             {0.0, 1.0 / 3.0, 1.0});
  }

  // Cartesian part weighted by 1 - sum of collar weights (and the far-field plateau).
  const Vec2 c = to_v(d.frame_center());
  Vec2 lo, hi;
  double R0 = 0.0, R1 = 0.0;
  if (d.exterior()) {
    double extent = 0.0;
    for (const auto& bc : d.components())
      for (const auto& p : bc.curve.sample(256)) extent = std::max(extent, (to_v(p.z) - c).norm());
    R0 = opt.radius > 0.0 ? opt.radius : extent + wmax + L;
    R1 = 2.0 * R0;
    lo = c - Vec2(R1, R1);
    hi = c + Vec2(R1, R1);
  } else {
    lo = Vec2(1e300, 1e300);
    hi = -lo;
    for (const auto& p : d.components()[0].curve.sample(256)) {
      lo = lo.cwiseMin(to_v(p.z));
      hi = hi.cwiseMax(to_v(p.z));
    }
  }
  // Enclosing and inscribed circles about each component's centroid to skip projections.
  std::vector<Vec2> cc(m);
  std::vector<double> rin(m), rout(m);
  for (int s = 0; s < m; ++s) {
    const auto pts = d.components()[s].curve.sample(512);
    Vec2 g = Vec2::Zero();
    for (const auto& p : pts) g += to_v(p.z);
    g /= double(pts.size());
    double a = 1e300, b = 0.0, gap = 0.0;
    for (size_t j = 0; j < pts.size(); ++j) {
      const double r = (to_v(pts[j].z) - g).norm();
      a = std::min(a, r);
      b = std::max(b, r);
      gap = std::max(gap, std::abs(pts[(j + 1) % pts.size()].z - pts[j].z));
    }
    cc[s] = g;
    rin[s] = a - gap;
    rout[s] = b + gap;
  }
  auto far_from_all = [&](const Vec2& x) {
    for (int s = 0; s < m; ++s) {
      const double r = (x - cc[s]).norm();
      const double W = 0.9 * d.collar_width(s);
      const bool outer = d.components()[s].outer;
      if (outer ? r > rin[s] - W : r < rout[s] + W) return false;
    }
    return true;
  };
  const int nx = int(std::ceil((hi - lo).x() / h)), ny = int(std::ceil((hi - lo).y() / h));
  const Vec2 org = 0.5 * (lo + hi) - 0.5 * h * Vec2(nx, ny);
  // Blocks of bs x bs cells, probed on a 4 x 4 sub-lattice and dilated by one block.
  constexpr int bs = 8;
  const int bx = (nx + bs - 1) / bs, by = (ny + bs - 1) / bs;
  std::vector<char> keep;
  if (opt.active) {
    std::vector<char> hit(size_t(bx) * by, 0);
    for (int I = 0; I < bx; ++I)
      for (int J = 0; J < by; ++J)
        for (int a = 0; a < 4 && !hit[size_t(I) * by + J]; ++a)
          for (int b = 0; b < 4; ++b)
            if (opt.active(org + h * bs * Vec2(I + (a + 0.5) / 4.0, J + (b + 0.5) / 4.0))) {
              hit[size_t(I) * by + J] = 1;
              break;
            }
    keep.assign(hit.size(), 0);
    for (int I = 0; I < bx; ++I)
      for (int J = 0; J < by; ++J) {
        if (!hit[size_t(I) * by + J]) continue;
        for (int a = std::max(0, I - 1); a <= std::min(bx - 1, I + 1); ++a)
          for (int b = std::max(0, J - 1); b <= std::min(by - 1, J + 1); ++b) keep[size_t(a) * by + b] = 1;
      }
  }
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      if (!keep.empty() && !keep[size_t(i / bs) * by + j / bs]) continue;
      const Vec2 x = org + h * Vec2(i + 0.5, j + 0.5);
      double w = 1.0;
      if (d.exterior()) {
        w = radial_plateau(x, c, R0, R1).v;
        if (w == 0.0) continue;
      }
      if (far_from_all(x)) {
        q.pts_.push_back({x, w * h * h});
        continue;
      }
      const auto p = d.project(x);
      if (!p.in_fluid) continue;
      const double W = d.collar_width(p.slot);
      if (p.distance < 0.9 * W) w *= 1.0 - collar_weight(p.distance, W);
      if (w > 0.0) q.pts_.push_back({x, w * h * h});
    }

  q.tail_ = q.pts_.size();
  if (d.exterior() && opt.far_field) {
    const double Rf = opt.far_ratio * R0;
    const int na = opt.far_angular;
    auto ring = [&](double u0, double u1, bool plateau_part) {
      std::vector<double> x, w;
      gauss_legendre(opt.far_radial, u0, u1, x, w);
      for (size_t i = 0; i < x.size(); ++i) {
        const double r = std::exp(x[i]);
        const double pw = plateau_part ? 1.0 - plateau(r, R0, R1).v : 1.0;
        for (int k = 0; k < na; ++k) {
          const double t = two_pi * (k + 0.5) / na;
          q.pts_.push_back({c + r * Vec2(std::cos(t), std::sin(t)), w[i] * r * r * pw * two_pi / na});
        }
      }
    };
    ring(std::log(R0), std::log(R1), true);
    const double um = 0.5 * (std::log(R1) + std::log(Rf));
    ring(std::log(R1), um, false);
    ring(um, std::log(Rf), false);
    q.tail_ = q.pts_.size();
    for (int k = 0; k < na; ++k) {
      const double t = two_pi * (k + 0.5) / na;
      q.pts_.push_back({c + Rf * Vec2(std::cos(t), std::sin(t)), 0.5 * Rf * Rf * two_pi / na});
    }
  }
  return q;
}

double FluidQuadrature::integrate(const std::function<double(const Vec2&)>& f) const {
  return integrate_with_tail(f).first;
}

std::pair<double, double> FluidQuadrature::integrate_with_tail(const std::function<double(const Vec2&)>& f) const {
  double s = 0.0, t = 0.0;
  for (size_t i = 0; i < pts_.size(); ++i) {
    const double v = pts_[i].w * f(pts_[i].x);
    if (i < tail_) s += v;
    else t += v;
  }
  return {s + t, t};
}

}  // namespace vflow
