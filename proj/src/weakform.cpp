#include "vortexflow/weakform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "detail/support_gap.hpp"

namespace vflow {

namespace {

constexpr double class_tolerance = 1e-8;

double min_collar(const Domain& d) {
  double w = 1e300;
  for (size_t s = 0; s < d.components().size(); ++s) w = std::min(w, d.collar_width(int(s)));
  return w;
}

void require_class(const Domain& d, const TestFunction& th, ErrorCode code) {
  if (th.boundary_class() == BoundaryClass::Free)
    throw Error(code, "test function '" + th.name() + "' is not constant on the boundary");
  const double v = th.class_violation(d, 0.05 * min_collar(d));
  if (v > class_tolerance)
    throw Error(code, "test function '" + th.name() + "' violates its boundary class by " + std::to_string(v));
}

// +1 for obstacles and holes, -1 for the outer curve of a bounded domain.
double boundary_sign(const Domain& d, int slot) { return (!d.exterior() && d.components()[slot].outer) ? -1.0 : 1.0; }

void require_uniform(const Trajectory& traj) {
  if (traj.states.size() < 2) throw Error(ErrorCode::TrajectoryTooShort, "need at least two samples");
  if (!(traj.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "trajectory has no time step");
}

std::vector<double> column(const std::vector<std::vector<double>>& rows, size_t j) {
  std::vector<double> c;
  for (const auto& r : rows) c.push_back(r[j]);
  return c;
}

// Richardson-style estimate of the error of the centred difference at sample k.
double differencing_error(const std::vector<double>& f, double dt, size_t k) {
  const size_t n = f.size();
  const double c1 = (f[k + 1] - f[k - 1]) / (2.0 * dt);
  if (k >= 2 && k + 2 < n) return std::abs(c1 - (f[k + 2] - f[k - 2]) / (4.0 * dt));
  if (k + 2 < n) return std::abs(c1 - (-3.0 * f[k] + 4.0 * f[k + 1] - f[k + 2]) / (2.0 * dt));
  return std::abs(c1 - (3.0 * f[k] - 4.0 * f[k - 1] + f[k - 2]) / (2.0 * dt));
}

Jet2 stream_jet(const Domain& d, int slot, int index, ForceComponent which, double a, double b, const Vec2& x) {
  const Jet2 chi = collar_plateau(d, slot, x, a, b);
  if (chi.v == 0.0 && chi.g.isZero()) return Jet2::constant(0.0);
  const Jet2 X = Jet2::coord(0, x), Y = Jet2::coord(1, x);
  switch (which) {
    case ForceComponent::Fx:
      return -1.0 * (Y * chi);
    case ForceComponent::Fy:
      return X * chi;
    case ForceComponent::Torque: {
      const Vec2 c = d.hole_centroid(index);
      const Jet2 dx = X - Jet2::constant(c.x()), dy = Y - Jet2::constant(c.y());
      return 0.5 * ((dx * dx + dy * dy) * chi);
    }
  }
  return Jet2::constant(0.0);
}

// Point values of u . Phi and ((u . grad) Phi) . u summed over a quadrature.
struct Pairing {
  double linear = 0.0, transport = 0.0, scale = 0.0;
};

Pairing pair_with(const std::vector<WeightedPoint>& pts, const std::vector<Vec2>& u, const std::vector<Jet2>& psi) {
  Pairing p;
  for (size_t i = 0; i < pts.size(); ++i) {
    const double lin = u[i].dot(perp(psi[i].g)), tr = transport_form(psi[i].h, u[i]);
    p.linear += pts[i].w * lin;
    p.transport += pts[i].w * tr;
    p.scale += std::abs(pts[i].w) * (std::abs(lin) + std::abs(tr));
  }
  return p;
}

std::vector<Vec2> sample(const VelocityField& u, const std::vector<WeightedPoint>& pts) {
  std::vector<Vec2> v(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) v[i] = u(pts[i].x);
  return v;
}

std::vector<Jet2> jets(const std::vector<WeightedPoint>& pts, const std::function<Jet2(const Vec2&)>& f) {
  std::vector<Jet2> j(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) j[i] = f(pts[i].x);
  return j;
}

bool flat(const Jet2& j) { return j.g.isZero() && j.h.isZero(); }

// Keeps the nodes where at least one of the stream functions is not locally constant.
std::vector<WeightedPoint> restrict_to_support(const FluidQuadrature& q, const std::vector<TestFunction>& th) {
  std::vector<WeightedPoint> out;
  for (const auto& p : q.points())
    for (const auto& t : th)
      if (!flat(t.jet(p.x))) {
        out.push_back(p);
        break;
      }
  return out;
}

FluidQuadratureOptions doubled(const FluidQuadrature& fine, FluidQuadratureOptions o) {
  o.h = 2.0 * fine.spacing();
  o.collar_nodes = o.collar_nodes > 0 ? std::max(32, (3 * o.collar_nodes) / 4) : 0;
  o.collar_gauss = std::max(4, (3 * o.collar_gauss) / 4);
  return o;
}

}  // namespace

double symmetrized_kernel(const PotentialSolver& S, const TestFunction& theta, const Vec2& x, const Vec2& y) {
  if (x == y) return theta.gradient(x).dot(perp(S.routh_gradient(x, x)));
  return 0.5 * (theta.gradient(x).dot(S.biot_savart_kernel(x, y)) + theta.gradient(y).dot(S.biot_savart_kernel(y, x)));
}

Estimate kernel_double_integral(const VelocityField& u, const TestFunction& theta) {
  // By symmetry iint H_theta = int grad theta . K[omega] d omega; for atoms the
  // velocity at the charge carries the diagonal rule.
  const auto& w = u.vorticity();
  const auto& src = u.source();
  Estimate e;
  for (size_t i = 0; i < w.atoms().size(); ++i) {
    const Vec2 g = theta.gradient(w.atoms()[i].pos);
    if (!g.isZero()) e.value += w.atoms()[i].strength * g.dot(src.velocity_at_charge(int(i)));
  }
  const VorticityMeasure cont({}, w.blobs(), w.grid());
  if (!cont.empty()) {
    const auto r = cont.integrate([&](const Vec2& x) {
      const Vec2 g = theta.gradient(x);
      return g.isZero() ? 0.0 : g.dot(src.velocity(x));
    });
    e.value += r.value;
    e.error += r.error;
  }
  return e;
}

Estimate harmonic_term(const VelocityField& u, const TestFunction& theta) {
  if (u.solver().field_count() == 0 || u.vorticity().empty()) return {};
  return u.vorticity().integrate([&](const Vec2& x) {
    const Vec2 g = theta.gradient(x);
    return g.isZero() ? 0.0 : g.dot(u.harmonic(x));
  });
}

std::vector<double> time_derivative(const std::vector<double>& f, double dt) {
  const size_t n = f.size();
  if (n < 2) throw Error(ErrorCode::TrajectoryTooShort, "need at least two samples to differentiate");
  std::vector<double> d(n);
  if (n == 2) {
    d[0] = d[1] = (f[1] - f[0]) / dt;
    return d;
  }
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt);
  for (size_t k = 1; k + 1 < n; ++k) d[k] = (f[k + 1] - f[k - 1]) / (2.0 * dt);
  return d;
}

double halving_order(double coarse, double fine) {
  if (!(coarse > 0.0) || !(fine > 0.0)) return std::numeric_limits<double>::infinity();
  return std::log2(coarse / fine);
}

ResidualSeries weak_residual(const SolverPtr& S, const Trajectory& traj, const TestFunction& theta) {
  const Domain& d = S->domain();
  require_class(d, theta, ErrorCode::IncompatibleDomain);
  require_uniform(traj);
  const size_t m = d.components().size();
  std::vector<double> theta_b(m);
  for (size_t s = 0; s < m; ++s) theta_b[s] = theta.boundary_value(d, d.components()[s].index);

  ResidualSeries r;
  std::vector<double> mass;
  std::vector<std::vector<double>> gamma;
  for (const auto& st : traj.states) {
    const VelocityField u(S, st.omega, st.gamma);
    r.t.push_back(st.t);
    mass.push_back(st.omega.integrate([&](const Vec2& x) { return theta.value(x); }).value);
    gamma.push_back(u.circulations());
    const auto h = harmonic_term(u, theta), k = kernel_double_integral(u, theta);
    r.harmonic.push_back(h.value);
    r.kernel.push_back(k.value);
    r.quadrature_error = std::max(r.quadrature_error, h.error + k.error);
    double pb = mass.back();
    for (size_t s = 0; s < m; ++s) pb += boundary_sign(d, int(s)) * gamma.back()[s] * theta_b[s];
    r.pairing.push_back(pb);
  }
  r.mass_rate = time_derivative(mass, traj.dt);
  r.boundary.assign(r.t.size(), 0.0);
  for (size_t s = 0; s < m; ++s) {
    if (theta_b[s] == 0.0) continue;
    const auto rate = time_derivative(column(gamma, s), traj.dt);
    for (size_t k = 0; k < r.t.size(); ++k) r.boundary[k] += boundary_sign(d, int(s)) * rate[k] * theta_b[s];
  }
  for (size_t k = 0; k < r.t.size(); ++k) {
    r.residual.push_back(r.mass_rate[k] + r.boundary[k] - r.harmonic[k] - r.kernel[k]);
    r.max_abs = std::max(r.max_abs, std::abs(r.residual.back()));
  }
  return r;
}

ResidualConvergence residual_convergence(const SolverPtr& S, const FlowState& initial, double T, double dt,
                                         const TestFunction& theta, int levels, Scheme scheme) {
  if (levels < 2) throw Error(ErrorCode::InvalidArgument, "need at least two step sizes");
  ResidualConvergence c;
  for (int l = 0; l < levels; ++l) {
    const double h = dt / std::pow(2.0, l);
    c.dt.push_back(h);
    c.max_residual.push_back(weak_residual(S, simulate(S, initial, T, h, scheme), theta).max_abs);
  }
  for (int l = 0; l + 1 < levels; ++l) c.ratio.push_back(c.max_residual[l] / c.max_residual[l + 1]);
  c.order = halving_order(c.max_residual[levels - 2], c.max_residual[levels - 1]);
  return c;
}

IntegratedCheck integrated_consistency(const ResidualSeries& r, const std::function<Jet1(double)>& rho) {
  const size_t n = r.t.size();
  if (n < 2) throw Error(ErrorCode::TrajectoryTooShort, "need at least two samples");
  IntegratedCheck c;
  const auto trap = [&](const std::function<double(size_t)>& f) {
    double s = 0.0;
    for (size_t k = 0; k + 1 < n; ++k) s += 0.5 * (r.t[k + 1] - r.t[k]) * (f(k) + f(k + 1));
    return s;
  };
  c.from_residual = trap([&](size_t k) { return rho(r.t[k]).v * r.residual[k]; });
  c.weak_form = rho(r.t[n - 1]).v * r.pairing[n - 1] - rho(r.t[0]).v * r.pairing[0] -
                trap([&](size_t k) { return rho(r.t[k]).d1 * r.pairing[k]; }) -
                trap([&](size_t k) { return rho(r.t[k]).v * (r.harmonic[k] + r.kernel[k]); });
  return c;
}

std::vector<double> circulation_ode_rhs(const SolverPtr& S, const Trajectory& traj, int index,
                                        const TestFunction& theta) {
  const Domain& d = S->domain();
  const int slot = d.slot(index);
  if (theta.boundary_class() == BoundaryClass::Free)
    throw Error(ErrorCode::BadLocalizer, "localizer must be constant on the boundary");
  require_class(d, theta, ErrorCode::BadLocalizer);
  for (size_t s = 0; s < d.components().size(); ++s) {
    const double want = int(s) == slot ? 1.0 : 0.0;
    if (std::abs(theta.boundary_value(d, d.components()[s].index) - want) > class_tolerance)
      throw Error(ErrorCode::BadLocalizer, "localizer must be 1 on the chosen component and 0 on the others");
  }
  require_uniform(traj);
  std::vector<double> mass, rest;
  for (const auto& st : traj.states) {
    const VelocityField u(S, st.omega, st.gamma);
    mass.push_back(st.omega.integrate([&](const Vec2& x) { return theta.value(x); }).value);
    rest.push_back(harmonic_term(u, theta).value + kernel_double_integral(u, theta).value);
  }
  const auto dm = time_derivative(mass, traj.dt);
  const double sg = boundary_sign(d, slot);
  std::vector<double> out(mass.size());
  for (size_t k = 0; k < out.size(); ++k) out[k] = sg * (rest[k] - dm[k]);
  return out;
}

std::vector<IdentityCheck> check_identities(const VelocityField& u, const std::vector<TestFunction>& thetas,
                                            const FluidQuadratureOptions& opt) {
  const Domain& d = u.solver().domain();
  if (!u.vorticity().atoms().empty())
    throw Error(ErrorCode::AtomsPresent, "the identity needs a velocity that is square integrable");
  for (const auto& th : thetas) require_class(d, th, ErrorCode::IncompatibleDomain);
  const size_t M = thetas.size();
  FluidQuadratureOptions fo = opt;
  if (fo.h <= 0.0) fo.h = 0.25 * FluidQuadrature::default_spacing(d);
  if (!fo.active)
    fo.active = [&](const Vec2& x) {
      for (const auto& th : thetas)
        if (!th.jet(x).h.isZero()) return true;
      return false;
    };
  // Sum and absolute sum of (u (x) u) : grad grad^perp theta per test function.
  const auto lhs_on = [&](const FluidQuadrature& q) {
    std::vector<double> s(M, 0.0), scale(M, 0.0);
    std::vector<Mat2> h(M);
    for (const auto& p : q.points()) {
      bool any = false;
      for (size_t m = 0; m < M; ++m) {
        h[m] = thetas[m].jet(p.x).h;
        any = any || !h[m].isZero();
      }
      if (!any) continue;
      const Vec2 v = u(p.x);
      for (size_t m = 0; m < M; ++m) {
        if (h[m].isZero()) continue;
        const double c = p.w * transport_form(h[m], v);
        s[m] += c;
        scale[m] += std::abs(c);
      }
    }
    return std::pair{s, scale};
  };
  const auto fine = FluidQuadrature::build(d, fo);
  const auto [lf, scale] = lhs_on(fine);
  const auto [lc, unused] = lhs_on(FluidQuadrature::build(d, doubled(fine, fo)));
  (void)unused;
  std::vector<IdentityCheck> out(M);
  for (size_t m = 0; m < M; ++m) {
    const auto k = kernel_double_integral(u, thetas[m]), h = harmonic_term(u, thetas[m]);
    auto& c = out[m];
    c.lhs = lf[m];
    c.lhs_error = std::abs(lf[m] - lc[m]) + 64.0 * std::numeric_limits<double>::epsilon() * scale[m];
    c.rhs = -k.value - h.value;
    c.rhs_error = k.error + h.error;
    c.tolerance = c.lhs_error + c.rhs_error + 1e-12;
  }
  return out;
}

IdentityCheck check_identity(const VelocityField& u, const TestFunction& theta, const FluidQuadratureOptions& opt) {
  return check_identities(u, {theta}, opt).front();
}

Mat2 TestField::gradient(const Vec2& x) const {
  const Mat2 h = stream(x).h;
  Mat2 j;
  j.row(0) = -h.row(1);
  j.row(1) = h.row(0);
  return j;
}

double transport_form(const Mat2& h, const Vec2& u) {
  const double p = u(0), q = u(1);
  return p * q * (h(0, 0) - h(1, 1)) + (q * q - p * p) * h(0, 1);
}

TestField test_field(const Domain& d, int index, ForceComponent which, double a, double b) {
  const int slot = d.slot(index);
  const double w = d.collar_width(slot);
  if (a < 0.0) a = 0.3 * w;
  if (b < 0.0) b = 0.9 * w;
  if (!(0.0 < a && a < b && b <= w))
    throw Error(ErrorCode::InvalidArgument, "cut-off band must satisfy 0 < a < b <= collar width");
  const Domain* dp = &d;
  return TestField{[=](const Vec2& x) { return stream_jet(*dp, slot, index, which, a, b, x); }};
}

ForceRecord net_force(const SolverPtr& S, const Trajectory& traj, int index, const ForceOptions& opt) {
  const Domain& d = S->domain();
  const int slot = d.slot(index);
  const size_t n = traj.states.size();
  if (n < 4) throw Error(ErrorCode::TrajectoryTooShort, "forces need at least three uniform steps");
  if (!(traj.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "trajectory has no time step");
  std::vector<Charge> all;
  for (const auto& st : traj.states) {
    if (!st.omega.atoms().empty()) throw Error(ErrorCode::AtomsPresent, "forces need blobs or grid vorticity");
    for (const auto& q : st.omega.charges()) all.push_back(q);
  }

  // Put the cut-off transition where no vorticity passes during the run.
  ForceRecord rec;
  rec.index = index;
  const double w = d.collar_width(slot), reach = 0.9 * w;
  const auto iv = detail::support_intervals(d, slot, all, reach);
  rec.cutoff_inner = 0.3 * w;
  rec.cutoff_outer = reach;
  if (!iv.empty()) {
    const auto [lo, hi] = detail::widest_gap(iv, reach);
    if (hi - lo >= 0.05 * w) {
      rec.cutoff_inner = lo + 0.2 * (hi - lo);
      rec.cutoff_outer = hi - 0.2 * (hi - lo);
    }
  }

  const auto fine = FluidQuadrature::collar(d, slot, rec.cutoff_outer, opt.tangential_nodes, opt.gauss_nodes);
  const auto coarse = FluidQuadrature::collar(d, slot, rec.cutoff_outer, std::max(16, opt.tangential_nodes / 2),
                                              std::max(4, (3 * opt.gauss_nodes) / 4));
  const ForceComponent comps[3] = {ForceComponent::Fx, ForceComponent::Fy, ForceComponent::Torque};
  std::vector<std::vector<Jet2>> psi_f, psi_c;
  for (auto c : comps) {
    const auto tf = test_field(d, index, c, rec.cutoff_inner, rec.cutoff_outer);
    psi_f.push_back(jets(fine.points(), tf.stream));
    psi_c.push_back(jets(coarse.points(), tf.stream));
  }

  // lin[c][k], tr[c][k] on both quadratures.
  std::vector<std::vector<double>> lin_f(3), tr_f(3), lin_c(3), tr_c(3);
  double scale = 0.0;
  for (const auto& st : traj.states) {
    const VelocityField u(S, st.omega, st.gamma);
    rec.t.push_back(st.t);
    const auto uf = sample(u, fine.points()), uc = sample(u, coarse.points());
    for (int c = 0; c < 3; ++c) {
      const auto pf = pair_with(fine.points(), uf, psi_f[c]), pc = pair_with(coarse.points(), uc, psi_c[c]);
      lin_f[c].push_back(pf.linear);
      tr_f[c].push_back(pf.transport);
      lin_c[c].push_back(pc.linear);
      tr_c[c].push_back(pc.transport);
      scale = std::max(scale, pf.scale);
    }
  }
  std::vector<std::vector<double>> F(3);
  for (int c = 0; c < 3; ++c) {
    const auto df = time_derivative(lin_f[c], traj.dt), dc = time_derivative(lin_c[c], traj.dt);
    for (size_t k = 0; k < n; ++k) {
      F[c].push_back(df[k] - tr_f[c][k]);
      rec.quadrature_tolerance = std::max(rec.quadrature_tolerance, std::abs(F[c][k] - (dc[k] - tr_c[c][k])));
    }
    for (size_t k = 1; k + 1 < n; ++k)
      rec.differencing_tolerance = std::max(rec.differencing_tolerance, differencing_error(lin_f[c], traj.dt, k));
  }
  rec.quadrature_tolerance =
      std::max(rec.quadrature_tolerance, 64.0 * std::numeric_limits<double>::epsilon() * scale / traj.dt);
  for (size_t k = 0; k < n; ++k) {
    rec.force.emplace_back(-F[0][k], -F[1][k]);
    rec.torque.push_back(-F[2][k]);
  }

  if (opt.audit_fields > 0) {
    // Tangent fields Phi = grad^perp theta with theta constant on every component.
    std::mt19937_64 rng(opt.seed);
    std::vector<TestFunction> th;
    for (int m = 0; m < opt.audit_fields; ++m) th.push_back(TestFunction::random_ybar(d, rng));
    const auto qf = FluidQuadrature::build(d, opt.audit_quadrature);
    const auto qc = FluidQuadrature::build(d, doubled(qf, opt.audit_quadrature));
    const auto pf = restrict_to_support(qf, th), pc = restrict_to_support(qc, th);
    const size_t mid = n / 2;
    const size_t k0 = mid >= 2 ? mid - 2 : mid - 1, k1 = std::min(n - 1, mid + 2);
    std::vector<std::vector<Jet2>> jf, jc;
    for (const auto& t : th) {
      jf.push_back(jets(pf, [&](const Vec2& x) { return t.jet(x); }));
      jc.push_back(jets(pc, [&](const Vec2& x) { return t.jet(x); }));
    }
    const size_t M = th.size();
    std::vector<std::vector<double>> lf(M), lc(M);
    std::vector<double> trf(M), trc(M);
    double ascale = 0.0;
    for (size_t k = k0; k <= k1; ++k) {
      const VelocityField u(S, traj.states[k].omega, traj.states[k].gamma);
      const auto uf = sample(u, pf);
      const bool centre = k + 1 >= mid && k <= mid + 1;
      const auto uc = centre ? sample(u, pc) : std::vector<Vec2>{};
      for (size_t m = 0; m < M; ++m) {
        const auto a = pair_with(pf, uf, jf[m]);
        lf[m].push_back(a.linear);
        if (k == mid) trf[m] = a.transport, ascale = std::max(ascale, a.scale);
        if (centre) {
          const auto b = pair_with(pc, uc, jc[m]);
          lc[m].push_back(b.linear);
          if (k == mid) trc[m] = b.transport;
        }
      }
    }
    const size_t at = mid - k0;
    for (size_t m = 0; m < M; ++m) {
      const double Ff = (lf[m][at + 1] - lf[m][at - 1]) / (2.0 * traj.dt) - trf[m];
      const double Fc = (lc[m][2] - lc[m][0]) / (2.0 * traj.dt) - trc[m];
      rec.audit.push_back(std::abs(Ff));
      const double tol = std::abs(Ff - Fc) + differencing_error(lf[m], traj.dt, at) +
                         64.0 * std::numeric_limits<double>::epsilon() * ascale / traj.dt;
      rec.audit_tolerance = std::max(rec.audit_tolerance, tol);
    }
  }
  return rec;
}

}  // namespace vflow
