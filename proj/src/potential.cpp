#include "vortexflow/potential.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "vortexflow/errors.hpp"

namespace vflow {

namespace {

double log_abs(cplx z) { return std::log(std::abs(z)); }

// grad of log|x - p| as a plane vector
Vec2 log_grad(const Vec2& x, const Vec2& p) {
  const Vec2 d = x - p;
  return d / d.squaredNorm();
}

}  // namespace

double green_disk(const Vec2& x, const Vec2& y) {
  if (!(x.norm() < 1.0 && y.norm() < 1.0)) throw Error(ErrorCode::PointOutsideDomain, "green_disk needs |x|, |y| < 1");
  if ((x - y).norm() == 0.0) throw Error(ErrorCode::CoincidentPoints, "green_disk at x = y");
  const double ny = y.norm();
  if (ny == 0.0) return std::log(x.norm()) / two_pi;
  const Vec2 ystar = y / (ny * ny);
  return std::log((x - y).norm() / ((x - ystar).norm() * ny)) / two_pi;
}

double green_exterior_disk(const Vec2& x, const Vec2& y) {
  if (!(x.norm() > 1.0 && y.norm() > 1.0)) throw Error(ErrorCode::PointOutsideDomain, "green_exterior_disk needs |x|, |y| > 1");
  if ((x - y).norm() == 0.0) throw Error(ErrorCode::CoincidentPoints, "green_exterior_disk at x = y");
  return green_disk(x / x.squaredNorm(), y / y.squaredNorm());
}

const BoundEstimate* KernelBoundReport::find(const std::string& name) const {
  for (const auto& e : estimates)
    if (e.name == name) return &e;
  return nullptr;
}

std::shared_ptr<const PotentialSolver> PotentialSolver::build(const Domain& domain, int n) {
  std::shared_ptr<PotentialSolver> s(new PotentialSolver());
  s->dom_ = domain;
  s->n_ = n;
  s->ls_ = LaplaceSolver(domain.image_curves(), domain.image_hole_points(), n);
  s->finish_setup();
  return s;
}

std::shared_ptr<const PotentialSolver> PotentialSolver::from_factors(const Domain& domain, int n, Eigen::MatrixXd lu,
                                                                     Eigen::VectorXi perm, double inverse_rcond) {
  std::shared_ptr<PotentialSolver> s(new PotentialSolver());
  s->dom_ = domain;
  s->n_ = n;
  s->ls_ = LaplaceSolver::from_factors(domain.image_curves(), domain.image_hole_points(), n, std::move(lu),
                                       std::move(perm), inverse_rcond);
  s->finish_setup();
  return s;
}

std::vector<double> PotentialSolver::singular_distances(const std::vector<Vec2>& pts) const {
  const int m = ls_.curve_count();
  std::vector<double> d(m, std::numeric_limits<double>::infinity());
  for (const auto& p : pts) {
    const cplx w = image(p);
    for (int c = 0; c < m; ++c) d[c] = std::min(d[c], ls_.distance_to_curve(c, w));
  }
  return d;
}

void PotentialSolver::finish_setup() {
  ext_ = dom_.exterior();
  c_ = dom_.frame_center();
  rho_ = dom_.frame_scale();
  const int m = ls_.curve_count();
  const int holes = m - 1;
  const LaplaceSolver* ls = &ls_;
  auto nearest_curve = [ls, m](cplx z) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (int c = 0; c < m; ++c) {
      const double d = ls->distance_to_curve(c, z);
      if (d < bd) {
        bd = d;
        best = c;
      }
    }
    return best;
  };
  // One independent solve per curve, the outer one included, so that sum_j w_j = 1 is a check.
  wt_.clear();
  for (int h = 0; h < m; ++h)
    wt_.push_back(ls_.solve({[nearest_curve, h](cplx z) { return nearest_curve(z) == h ? 1.0 : 0.0; }, {}}));
  period_ = Eigen::MatrixXd::Zero(holes, holes);
  for (int a = 0; a < holes; ++a)
    for (int l = 0; l < holes; ++l) period_(a, l) = wt_[a + 1].hole_flux(l + 1);

  const int k = dom_.genus();
  if (ext_) {
    std::vector<double> d0(m);
    for (int c = 0; c < m; ++c) d0[c] = ls_.distance_to_curve(c, cplx(0.0, 0.0));
    h0_ = ls_.solve({[](cplx z) { return -log_abs(z) / two_pi; }, d0});
    bcoef_ = Eigen::MatrixXd::Zero(k, holes + 1);
    cjl_ = Eigen::MatrixXd::Zero(k, k);
    for (int j = 1; j <= k; ++j) {
      Eigen::VectorXd rhs(holes), b = Eigen::VectorXd::Zero(holes);
      for (int l = 1; l <= holes; ++l) rhs(l - 1) = (j - 1 == l ? 1.0 : 0.0) + h0_.hole_flux(l);
      if (holes > 0) b = period_.transpose().partialPivLu().solve(rhs);
      double b0 = std::log(rho_) / two_pi + h0_.value(0.0);
      for (int a = 0; a < holes; ++a) b0 -= b(a) * wt_[a + 1].value(0.0);
      bcoef_(j - 1, 0) = b0;
      for (int a = 0; a < holes; ++a) bcoef_(j - 1, a + 1) = b(a);
      cjl_(j - 1, 0) = b0;
      for (int a = 0; a < holes; ++a) cjl_(j - 1, a + 1) = b0 + b(a);
    }
  } else {
    bcoef_ = holes > 0 ? Eigen::MatrixXd(period_.inverse()) : Eigen::MatrixXd(0, 0);
    cjl_ = Eigen::MatrixXd::Zero(k, k + 1);
    for (int j = 0; j < k; ++j)
      for (int l = 0; l < k; ++l) cjl_(j, l + 1) = bcoef_(j, l);
  }
}

cplx PotentialSolver::image_derivative(const Vec2& x) const {
  if (!ext_) return 1.0;
  const cplx z = to_c(x) - c_;
  return -rho_ / (z * z);
}

void PotentialSolver::check_point(const Vec2& x) const {
  const auto p = dom_.project(x);
  if (!p.in_fluid && p.distance > 1e-10 * dom_.length_scale())
    throw Error(ErrorCode::PointOutsideDomain, "point lies outside the fluid domain");
}

std::vector<int> PotentialSolver::measure_indices() const {
  std::vector<int> out;
  for (const auto& bc : dom_.components()) out.push_back(bc.index);
  return out;
}

int PotentialSolver::image_curve_of(int j) const {
  const int c = ext_ ? j - 1 : j;
  if (c < 0 || c >= int(wt_.size())) throw Error(ErrorCode::InvalidArgument, "no boundary component with index " + std::to_string(j));
  return c;
}

double PotentialSolver::harmonic_measure(int j, const Vec2& x) const { return wt_[image_curve_of(j)].value(image(x)); }

Vec2 PotentialSolver::harmonic_measure_gradient(int j, const Vec2& x) const {
  return to_v(std::conj(image_derivative(x)) * wt_[image_curve_of(j)].gradient(image(x)));
}

double PotentialSolver::stream_function(int j, const Vec2& x) const {
  if (j < 1 || j > field_count()) throw Error(ErrorCode::InvalidArgument, "no harmonic field for index " + std::to_string(j));
  const cplx w = image(x);
  if (ext_) {
    double v = (std::log(std::abs(to_c(x) - c_)) - std::log(rho_)) / two_pi - h0_.value(w) + bcoef_(j - 1, 0);
    for (size_t a = 1; a < wt_.size(); ++a) v += bcoef_(j - 1, a) * wt_[a].value(w);
    return v;
  }
  double v = 0.0;
  for (size_t a = 1; a < wt_.size(); ++a) v += bcoef_(j - 1, a - 1) * wt_[a].value(w);
  return v;
}

Vec2 PotentialSolver::harmonic_field(int j, const Vec2& x) const {
  if (j < 1 || j > field_count()) throw Error(ErrorCode::InvalidArgument, "no harmonic field for index " + std::to_string(j));
  const cplx w = image(x);
  const cplx dphi = image_derivative(x);
  if (ext_) {
    cplx g = -h0_.gradient(w);
    for (size_t a = 1; a < wt_.size(); ++a) g += bcoef_(j - 1, a) * wt_[a].gradient(w);
    const Vec2 grad = log_grad(x, to_v(c_)) / two_pi + to_v(std::conj(dphi) * g);
    return perp(grad);
  }
  cplx g = 0.0;
  for (size_t a = 1; a < wt_.size(); ++a) g += bcoef_(j - 1, a - 1) * wt_[a].gradient(w);
  return perp(to_v(g));
}

Vec2 PotentialSolver::harmonic_combination(const std::vector<double>& alpha, const Vec2& x) const {
  if (int(alpha.size()) != field_count()) throw Error(ErrorCode::InvalidArgument, "one coefficient per harmonic field");
  const int k = field_count();
  if (k == 0) return Vec2::Zero();
  const cplx w = image(x);
  if (ext_) {
    double total = 0.0;
    for (double a : alpha) total += a;
    cplx g = total != 0.0 ? -total * h0_.gradient(w) : cplx(0.0);
    for (size_t a = 1; a < wt_.size(); ++a) {
      double c = 0.0;
      for (int j = 0; j < k; ++j) c += alpha[j] * bcoef_(j, a);
      if (c != 0.0) g += c * wt_[a].gradient(w);
    }
    return perp(Vec2(total * log_grad(x, to_v(c_)) / two_pi + to_v(std::conj(image_derivative(x)) * g)));
  }
  cplx g = 0.0;
  for (size_t a = 1; a < wt_.size(); ++a) {
    double c = 0.0;
    for (int j = 0; j < k; ++j) c += alpha[j] * bcoef_(j, a - 1);
    if (c != 0.0) g += c * wt_[a].gradient(w);
  }
  return perp(to_v(g));
}

HarmonicFunction PotentialSolver::solve_regular(const std::vector<Charge>& q, double mass) const {
  std::vector<Vec2> centers;
  centers.reserve(q.size());
  for (const auto& c : q) centers.push_back(c.pos);
  const bool ext = ext_;
  const cplx c0 = c_;
  const Domain* dom = &dom_;
  auto data = [q, mass, ext, c0, dom](cplx zi) {
    const Vec2 z = dom->from_image(zi);
    double g = 0.0;
    for (const auto& c : q) g -= free_potential(c, z);
    if (ext) g += mass / two_pi * std::log(std::abs(to_c(z) - c0));
    return g;
  };
  return ls_.solve({data, singular_distances(centers)});
}

SourceField PotentialSolver::sources(std::vector<Charge> charges) const {
  SourceField f;
  f.solver_ = shared_from_this();
  f.q_ = std::move(charges);
  for (const auto& c : f.q_) f.mass_ += c.strength;
  f.v_ = solve_regular(f.q_, f.mass_);
  return f;
}

namespace {

// Non-singular part of H in the exterior frame: -(m / 2pi) log|x - c|.
double frame_log(const PotentialSolver& S, const Vec2& x, double m) {
  if (!S.domain().exterior()) return 0.0;
  return -m / two_pi * std::log(std::abs(to_c(x) - S.domain().frame_center()));
}

Vec2 frame_log_grad(const PotentialSolver& S, const Vec2& x, double m) {
  if (!S.domain().exterior()) return Vec2::Zero();
  return -m / two_pi * log_grad(x, to_v(S.domain().frame_center()));
}

}  // namespace

double SourceField::regular_value(const Vec2& x) const {
  return frame_log(*solver_, x, mass_) + v_.value(solver_->image(x));
}

Vec2 SourceField::regular_gradient(const Vec2& x) const {
  const auto& S = *solver_;
  return frame_log_grad(S, x, mass_) + to_v(std::conj(S.image_derivative(x)) * v_.gradient(S.image(x)));
}

Vec2 SourceField::free_gradient_at(const Vec2& x, int skip) const {
  Vec2 g = Vec2::Zero();
  for (int i = 0; i < int(q_.size()); ++i)
    if (i != skip) g += free_gradient(q_[i], x);
  return g;
}

double SourceField::stream(const Vec2& x) const {
  double v = regular_value(x);
  for (const auto& c : q_) v += free_potential(c, x);
  return v;
}

Vec2 SourceField::velocity(const Vec2& x) const {
  for (const auto& c : q_)
    if (c.profile == Profile::Point && (x - c.pos).norm() <= 1e-14 * (1.0 + x.norm()))
      throw Error(ErrorCode::EvaluationAtAtom, "velocity requested at an atom position");
  return perp(free_gradient_at(x) + regular_gradient(x));
}

Vec2 SourceField::velocity_at_charge(int i) const {
  const Vec2 x = q_.at(i).pos;
  return perp(free_gradient_at(x, i) + regular_gradient(x));
}

PointKernel PotentialSolver::point_kernel(const Vec2& y) const {
  check_point(y);
  PointKernel k;
  k.solver_ = shared_from_this();
  k.y_ = y;
  k.h_ = solve_regular({Charge{y, 1.0, 0.0, Profile::Point}}, 1.0);
  const auto sd = singular_distances({y});
  const Domain* dom = &dom_;
  for (int i = 0; i < 2; ++i) {
    auto data = [dom, y, i](cplx zi) {
      const Vec2 d = dom->from_image(zi) - y;
      return d(i) / (two_pi * d.squaredNorm());
    };
    (i == 0 ? k.hx_ : k.hy_) = ls_.solve({data, sd});
  }
  return k;
}

double PointKernel::regular(const Vec2& x) const { return frame_log(*solver_, x, 1.0) + h_.value(solver_->image(x)); }

double PointKernel::green(const Vec2& x) const {
  if ((x - y_).norm() == 0.0) throw Error(ErrorCode::CoincidentPoints, "green at x = y");
  return std::log((x - y_).norm()) / two_pi + regular(x);
}

Vec2 PointKernel::k_xy(const Vec2& x) const {
  if ((x - y_).norm() == 0.0) throw Error(ErrorCode::CoincidentPoints, "kernel at x = y");
  const auto& S = *solver_;
  const Vec2 g = log_grad(x, y_) / two_pi + frame_log_grad(S, x, 1.0) +
                 to_v(std::conj(S.image_derivative(x)) * h_.gradient(S.image(x)));
  return perp(g);
}

Vec2 PointKernel::k_yx(const Vec2& x) const {
  if ((x - y_).norm() == 0.0) throw Error(ErrorCode::CoincidentPoints, "kernel at x = y");
  const cplx w = solver_->image(x);
  const Vec2 g = log_grad(y_, x) / two_pi + Vec2(hx_.value(w), hy_.value(w));
  return perp(g);
}

double PotentialSolver::routh_regular_part(const Vec2& x, const Vec2& y) const {
  check_point(x);
  check_point(y);
  // H is symmetric; solve with the source farther from the boundary.
  const bool swap = dom_.distance_to_boundary(x) > dom_.distance_to_boundary(y);
  const Vec2& src = swap ? x : y;
  const Vec2& tgt = swap ? y : x;
  const auto v = solve_regular({Charge{src, 1.0, 0.0, Profile::Point}}, 1.0);
  return frame_log(*this, tgt, 1.0) + v.value(image(tgt));
}

double PotentialSolver::green(const Vec2& x, const Vec2& y) const {
  if ((x - y).norm() == 0.0) throw Error(ErrorCode::CoincidentPoints, "green at x = y");
  return std::log((x - y).norm()) / two_pi + routh_regular_part(x, y);
}

Vec2 PotentialSolver::routh_gradient(const Vec2& x, const Vec2& y) const {
  check_point(x);
  check_point(y);
  const auto v = solve_regular({Charge{y, 1.0, 0.0, Profile::Point}}, 1.0);
  return frame_log_grad(*this, x, 1.0) + to_v(std::conj(image_derivative(x)) * v.gradient(image(x)));
}

Vec2 PotentialSolver::biot_savart_kernel(const Vec2& x, const Vec2& y) const {
  if ((x - y).norm() == 0.0) throw Error(ErrorCode::CoincidentPoints, "kernel at x = y");
  // G(., y) vanishes identically when the source sits on the boundary.
  if (dom_.distance_to_boundary(y) <= 1e-12 * dom_.length_scale()) {
    check_point(x);
    return Vec2::Zero();
  }
  return perp(log_grad(x, y) / two_pi + routh_gradient(x, y));
}

KernelBoundReport PotentialSolver::verify_kernel_bounds(const KernelSamplePlan& plan) const {
  const double L = dom_.length_scale();
  const double margin = plan.boundary_margin > 0.0 ? plan.boundary_margin : 0.02 * L;
  const double maxsep = plan.max_separation > 0.0 ? plan.max_separation : 0.25 * L;
  const double minsep = plan.min_separation;
  if (!(minsep > 0.0 && minsep < maxsep)) throw Error(ErrorCode::InvalidArgument, "need 0 < min_separation < max_separation");
  std::mt19937_64 rng(plan.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);

  // Source region: annulus around the frame centre (exterior) or the outer curve's box.
  Vec2 lo, hi;
  if (ext_) {
    const double gap = std::isfinite(dom_.min_gap()) ? dom_.min_gap() : 0.0;
    const double R = plan.sample_radius > 0.0 ? plan.sample_radius : 4.0 * L + 2.0 * gap;
    lo = to_v(c_) - Vec2(R, R);
    hi = to_v(c_) + Vec2(R, R);
  } else {
    lo = Vec2(1e300, 1e300);
    hi = -lo;
    for (const auto& p : dom_.components()[0].curve.sample(256)) {
      lo = lo.cwiseMin(to_v(p.z));
      hi = hi.cwiseMax(to_v(p.z));
    }
  }
  std::mt19937_64 frng(plan.seed + 17);
  const TestFunction phi = TestFunction::random_ybar(dom_, frng, 0.5 * L);

  KernelBoundReport rep;
  rep.condition_estimate = condition_estimate();
  double s_estk = 0, s_estg = 0, s_estK = 0, s_appG = 0, s_appBS = 0, fnorm = 0;
  long count = 0;
  auto note_norm = [&](const Vec2& x) {
    const Jet2 j = phi.jet(x);
    fnorm = std::max(fnorm, j.g.norm() + j.h.norm());
  };
  for (int s = 0; s < plan.sources; ++s) {
    Vec2 y;
    for (int tries = 0;; ++tries) {
      y = lo + Vec2(U(rng) * (hi - lo).x(), U(rng) * (hi - lo).y());
      if (dom_.contains(y, margin)) break;
      if (tries > 100000) throw Error(ErrorCode::InvalidArgument, "could not sample source points in the domain");
    }
    const PointKernel pk = point_kernel(y);
    note_norm(y);
    const Jet2 jy = phi.jet(y);
    for (int t = 0; t < plan.targets; ++t) {
      const double u = U(rng), th = two_pi * U(rng);
      const double r = minsep * std::pow(maxsep / minsep, u);
      Vec2 x = y + r * Vec2(std::cos(th), std::sin(th));
      if (!dom_.contains(x, margin)) x = y - r * Vec2(std::cos(th), std::sin(th));
      if (!dom_.contains(x, margin)) continue;
      ++count;
      note_norm(x);
      const double G = pk.green(x);
      const Vec2 Kxy = pk.k_xy(x);
      const Vec2 Kyx = pk.k_yx(x);
      const double dxy = (x - y).norm();
      s_estK = std::max(s_estK, std::abs(phi.gradient(x).dot(Kxy) + jy.g.dot(Kyx)));
      if (ext_) {
        const double ax = std::abs(to_c(x) - c_), ay = std::abs(to_c(y) - c_);
        s_estk = std::max(s_estk, Kxy.norm() * ax * dxy / ay);
        s_estg = std::max(s_estg, std::abs(G) / (1.0 + std::abs(std::log(ax * ay / dxy))));
        const double dimg = std::abs(image(x) - image(y));
        s_appG = std::max(s_appG, std::abs(G) / (1.0 + std::abs(std::log(dimg))));
        s_appBS = std::max(s_appBS, Kxy.norm() / std::abs(image_derivative(x)) * dimg);
      } else {
        s_appG = std::max(s_appG, std::abs(G) / (1.0 + std::abs(std::log(dxy))));
        s_appBS = std::max(s_appBS, Kxy.norm() * dxy);
      }
    }
  }
  rep.test_norm = fnorm;
  auto add = [&](const char* name, double v) { rep.estimates.push_back({name, v, count, minsep, std::isfinite(v)}); };
  if (ext_) {
    add("estk", s_estk);
    add("estg", s_estg);
  }
  add("estK", fnorm > 0.0 ? s_estK / fnorm : s_estK);
  add("appGreen", s_appG);
  add("appBS", s_appBS);
  return rep;
}

}  // namespace vflow
