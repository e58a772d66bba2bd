#include <cmath>
#include <random>

#include "doctest.h"
#include "vortexflow/weakform.hpp"

using namespace vflow;

namespace {
Domain unit_exterior() { return make_domain({DomainKind::Exterior, {ComponentSpec::circle({0, 0}, 1)}}); }
Domain two_disks() {
  return make_domain({DomainKind::Exterior, {ComponentSpec::circle({0, 0}, 1), ComponentSpec::circle({4, 0}, 1)}});
}
Domain annulus() {
  return make_domain({DomainKind::BoundedWithHoles, {ComponentSpec::circle({0, 0}, 2), ComponentSpec::circle({0, 0}, 0.5)}});
}

// Force on the unit disk from a point-like vortex of strength 1 at (2, 0) with
// gamma_1 = -1 (no net circulation at infinity): f = (1 / (4 pi), 0).
// Derived from the impulse of the vortex and its image, cross-checked by
// integrating the unsteady Bernoulli pressure over the circle.
const Vec2 tight_blob_force(0.0795774715459477, 0.0);

// Period of the vortex of strength 2 pi at radius 2 with gamma_1 = -2 pi.
constexpr double orbit_period = 6.0 * pi;

FlowState blob_state(const std::vector<Blob>& blobs, CirculationVector gamma) {
  return {0.0, VorticityMeasure({}, blobs), std::move(gamma)};
}
}  // namespace

TEST_CASE("symmetrized kernel: constant test functions, symmetry, bounded near the diagonal") {
  const auto S = PotentialSolver::build(two_disks(), 128);
  const auto one = TestFunction::constant(1.0);
  const auto th = TestFunction::flat_bump({2, 0.5}, 0.2, 1.5);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double sup = 0.0;
  int checked = 0;
  while (checked < 400) {
    const Vec2 x(2 + 1.5 * U(rng), 0.5 + 1.5 * U(rng));
    const double r = std::pow(10.0, -6.0 + 4.0 * (0.5 + 0.5 * U(rng)));
    const double a = pi * U(rng);
    const Vec2 y = x + r * Vec2(std::cos(a), std::sin(a));
    if (!S->domain().contains(x, 0.05) || !S->domain().contains(y, 0.05)) continue;
    ++checked;
    CHECK(symmetrized_kernel(*S, one, x, y) == 0.0);
    const double hxy = symmetrized_kernel(*S, th, x, y), hyx = symmetrized_kernel(*S, th, y, x);
    CHECK(std::abs(hxy - hyx) <= 1e-12 * (1.0 + std::abs(hxy)));
    sup = std::max(sup, std::abs(hxy));
  }
  // The bump has |grad| + |hess| of order 10, so a bounded kernel stays far below the 1/r scale 1e6.
  CHECK(std::isfinite(sup));
  CHECK(sup < 1e2);
  CHECK(std::isfinite(symmetrized_kernel(*S, th, {2, 0.5}, {2, 0.5})));
}

TEST_CASE("test fields are divergence free and constant where the cut-off is 1") {
  const Domain d = two_disks();
  const auto fx = test_field(d, 1, ForceComponent::Fx);
  const auto fy = test_field(d, 1, ForceComponent::Fy);
  const auto tq = test_field(d, 1, ForceComponent::Torque);
  CHECK((d.hole_centroid(1) - Vec2(0, 0)).norm() < 1e-12);
  const double w = d.collar_width(d.slot(1));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double h = 1e-5;
  for (int k = 0; k < 1000; ++k) {
    const double ang = two_pi * U(rng), s = w * U(rng);
    const Vec2 x = (1.0 + s) * Vec2(std::cos(ang), std::sin(ang));
    for (const auto* f : {&fx, &fy, &tq}) {
      const double div = (f->value(x + Vec2(h, 0))(0) - f->value(x - Vec2(h, 0))(0) +
                          f->value(x + Vec2(0, h))(1) - f->value(x - Vec2(0, h))(1)) /
                         (2 * h);
      CHECK(std::abs(div) < 1e-5);  // limited by the projection solve inside the distance jet
      CHECK(std::abs(f->gradient(x).trace()) < 1e-12);
    }
    if (s < 0.3 * w) {
      CHECK((fx.value(x) - Vec2(1, 0)).norm() < 1e-14);
      CHECK((fy.value(x) - Vec2(0, 1)).norm() < 1e-14);
      CHECK((tq.value(x) - perp(x)).norm() < 1e-14);
    }
  }
  // Zero near the other obstacle.
  CHECK(fx.value({4, 1.1}).norm() == 0.0);
  CHECK_THROWS_AS(test_field(d, 1, ForceComponent::Fx, 0.2, 0.1), Error);
}

TEST_CASE("time derivative is exact on quadratics") {
  std::vector<double> f;
  for (int k = 0; k < 6; ++k) f.push_back(1.0 + 2.0 * k * 0.1 + 3.0 * (k * 0.1) * (k * 0.1));
  const auto d = time_derivative(f, 0.1);
  for (int k = 0; k < 6; ++k) CHECK(d[k] == doctest::Approx(2.0 + 6.0 * k * 0.1).epsilon(1e-12));
  CHECK(halving_order(4.0, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("weak residual vanishes for locally constant test functions") {
  const auto S = PotentialSolver::build(unit_exterior(), 128);
  const FlowState s{0.0, VorticityMeasure({{{2, 0}, two_pi}}, {}), {-two_pi}};
  const auto tr = simulate(S, s, 1.0, 0.1);
  for (const auto& th : {TestFunction::constant(1.0), TestFunction::flat_bump({0, 0}, 3.0, 4.0)}) {
    const auto r = weak_residual(S, tr, th);
    CHECK(r.max_abs < 1e-12);
    CHECK(r.residual.size() == tr.states.size());
  }

  // theta = 1 on an annulus: d/dt [mass + gamma_1 - gamma_0] = 0.
  const auto A = PotentialSolver::build(annulus(), 128);
  const FlowState sa{0.0, VorticityMeasure({{{1.2, 0}, 0.7}, {{-0.9, 0.3}, -0.4}}, {}), {0.5}};
  const auto ra = weak_residual(A, simulate(A, sa, 0.5, 0.05), TestFunction::constant(1.0));
  CHECK(ra.max_abs < 1e-12);
}

TEST_CASE("weak residual on the exact single-vortex orbit converges at second order") {
  const auto S = PotentialSolver::build(unit_exterior(), 128);
  const FlowState s{0.0, VorticityMeasure({{{2, 0}, two_pi}}, {}), {-two_pi}};
  // The vortex turns clockwise at angular speed 1/3; the bump sits on the orbit near t = 3.
  const auto th = TestFunction::flat_bump({2 * std::cos(-1.0), 2 * std::sin(-1.0)}, 0.1, 0.9);
  const auto c = residual_convergence(S, s, orbit_period, 0.05, th, 3);
  REQUIRE(c.ratio.size() == 2);
  CHECK(c.max_residual[0] > 0.0);
  CHECK(c.ratio[0] >= 3.5);
  CHECK(c.ratio[1] >= 3.5);
  CHECK(c.order >= 1.9);

  // Time-integrated form against a smooth temporal weight.
  const auto r = weak_residual(S, simulate(S, s, 6.0, 0.05), th);
  const auto rho = [](double t) {
    const double a = std::sin(pi * t / 6.0);
    return Jet1{a * a, 2.0 * a * std::cos(pi * t / 6.0) * pi / 6.0, 0.0};
  };
  const auto ic = integrated_consistency(r, rho);
  CHECK(ic.difference() < 1e-4);
}

TEST_CASE("weak residual with a boundary-coupled test function in the two-disk exterior") {
  const Domain d = two_disks();
  const auto S = PotentialSolver::build(d, 128);
  // Two vortices start inside the collar transition bands, where grad theta is not normal.
  const FlowState s{0.0, VorticityMeasure({{{1.3, 0.2}, 0.3}, {{2.7, -0.3}, -0.2}, {{-1.8, 0.4}, 0.5}}, {}), {0.3, -0.2}};
  std::mt19937_64 rng(11);
  const auto th = TestFunction::random_ybar(d, rng);
  CHECK(th.boundary_class() == BoundaryClass::Ybar);
  const auto r1 = weak_residual(S, simulate(S, s, 1.0, 0.1), th);
  const auto r2 = weak_residual(S, simulate(S, s, 1.0, 0.05), th);
  CHECK(r1.max_abs > 1e-8);
  CHECK(r1.max_abs / r2.max_abs >= 3.5);
}

TEST_CASE("weak residual rejects test functions outside the boundary classes") {
  const Domain d = unit_exterior();
  const auto S = PotentialSolver::build(d, 64);
  const FlowState s{0.0, VorticityMeasure({{{2, 0}, 1.0}}, {}), {0.0}};
  const auto tr = simulate(S, s, 0.2, 0.1);
  const TestFunction free([](const Vec2& x) { return Jet2::coord(0, x); }, BoundaryClass::Free, "x");
  const auto on_boundary = TestFunction::flat_bump({1, 0}, 0.1, 0.4);  // declared Yinf, not constant near Gamma
  for (const auto* th : {&free, &on_boundary}) {
    try {
      weak_residual(S, tr, *th);
      FAIL("expected IncompatibleDomain");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::IncompatibleDomain);
    }
  }
}

TEST_CASE("circulation ODE: zero without vorticity, symmetric pairs, bad localizers") {
  const Domain d = two_disks();
  const auto S = PotentialSolver::build(d, 128);
  const double w = d.collar_width(0);
  const auto th1 = TestFunction::boundary_localizer(d, 1, 0.3 * w, 0.9 * w);
  const auto th2 = TestFunction::boundary_localizer(d, 2, 0.3 * w, 0.9 * w);

  const auto empty = simulate(S, {0.0, VorticityMeasure(), {0.4, -0.1}}, 0.3, 0.1);
  for (double v : circulation_ode_rhs(S, empty, 1, th1)) CHECK(v == 0.0);

  // Point symmetry about (2, 0) swaps the disks.
  const FlowState s = blob_state({{{2, 1.3}, 1.0, 0.5, Profile::Bump}, {{2, -1.3}, 1.0, 0.5, Profile::Bump}}, {0.3, 0.3});
  const auto tr = simulate(S, s, 0.4, 0.1);
  const auto g1 = circulation_ode_rhs(S, tr, 1, th1), g2 = circulation_ode_rhs(S, tr, 2, th2);
  for (size_t k = 0; k < g1.size(); ++k) {
    CHECK(std::abs(g1[k] - g2[k]) < 1e-9);
    CHECK(std::abs(g1[k]) < 1e-6);  // Kelvin: circulations are constant along the flow
  }
  for (const auto& [idx, th] : {std::pair{1, th2}, std::pair{1, TestFunction::constant(1.0)}}) {
    try {
      circulation_ode_rhs(S, tr, idx, th);
      FAIL("expected BadLocalizer");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadLocalizer);
    }
  }
}

TEST_CASE("identity: transport integral equals minus kernel and harmonic terms for random Ybar functions") {
  const Domain d = two_disks();
  const auto S = PotentialSolver::build(d, 128);
  // One blob sits in the collar transition of obstacle 1, one in the open fluid.
  const Vec2 b2(-2.0, -1.5);
  const VelocityField u(
      S, VorticityMeasure({}, {{{1.3, 0.1}, 1.0, 0.1, Profile::Bump}, {b2, -0.5, 0.15, Profile::Gaussian}}), {0.2, -0.1});
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<TestFunction> th;
  for (int m = 0; m < 5; ++m)
    th.push_back(TestFunction::random_ybar(d, rng, 0.5) +
                 TestFunction::polynomial_times_bump(b2, 0.2, 0.9, Eigen::Vector4d(U(rng), U(rng), U(rng), U(rng))));
  const auto checks = check_identities(u, th);
  REQUIRE(checks.size() == 5);
  for (int m = 0; m < 5; ++m) {
    const auto& c = checks[m];
    CAPTURE(m);
    CAPTURE(c.lhs);
    CAPTURE(c.rhs);
    CAPTURE(c.tolerance);
    CHECK(std::abs(c.rhs) > 1e-3);  // both sides are genuinely nonzero
    CHECK(c.tolerance < 1e-4);
    CHECK(c.agrees());
  }
  const VelocityField withatom(S, VorticityMeasure({{{2, 0.8}, 1.0}}, {}), {0.0, 0.0});
  CHECK_THROWS_AS(check_identity(withatom, TestFunction::constant(1.0)), Error);
}

TEST_CASE("forces: steady circulation exerts none") {
  const auto S = PotentialSolver::build(unit_exterior(), 128);
  const auto tr = simulate(S, {0.0, VorticityMeasure(), {1.5}}, 0.4, 0.1);
  ForceOptions o;
  o.audit_fields = 0;
  const auto f = net_force(S, tr, 1, o);
  REQUIRE(f.force.size() == tr.states.size());
  CHECK(f.quadrature_tolerance > 0.0);
  for (size_t k = 0; k < f.force.size(); ++k) {
    CHECK(f.force[k].norm() < 10.0 * f.tolerance());
    CHECK(std::abs(f.torque[k]) < 10.0 * f.tolerance());
  }
}

TEST_CASE("forces: mirror-symmetric blob pair has no vertical force") {
  const auto S = PotentialSolver::build(unit_exterior(), 128);
  const auto tr = simulate(
      S, blob_state({{{2, 0.8}, 1.0, 0.3, Profile::Bump}, {{2, -0.8}, -1.0, 0.3, Profile::Bump}}, {0.0}), 0.2, 0.05);
  ForceOptions o;
  o.audit_fields = 0;
  const auto f = net_force(S, tr, 1, o);
  CHECK(std::abs(f.force[0](1)) <= f.tolerance());
  CHECK(std::abs(f.force[0](0)) > 10.0 * f.tolerance());  // the horizontal part is genuinely nonzero
}

TEST_CASE("forces: tight blob matches the image-system oracle") {
  const auto S = PotentialSolver::build(unit_exterior(), 128);
  const auto tr = simulate(S, blob_state({{{2, 0}, 1.0, 0.02, Profile::Bump}}, {-1.0}), 0.06, 0.02);
  ForceOptions o;
  o.audit_fields = 0;
  const auto f = net_force(S, tr, 1, o);
  CAPTURE(f.force[0]);
  CHECK((f.force[0] - tight_blob_force).norm() < 0.02 * tight_blob_force.norm());
  CHECK(std::abs(f.torque[0]) < 10.0 * f.tolerance() + 1e-9);
  CHECK(f.cutoff_outer <= S->domain().collar_width(0));

  ForceRecord g;
  const auto with_atom = simulate(S, {0.0, VorticityMeasure({{{2, 0}, 1.0}}, {}), {0.0}}, 0.3, 0.1);
  try {
    net_force(S, with_atom, 1, o);
    FAIL("expected AtomsPresent");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AtomsPresent);
  }
  try {
    net_force(S, simulate(S, blob_state({{{2, 0}, 1.0, 0.1, Profile::Bump}}, {0.0}), 0.2, 0.1), 1, o);
    FAIL("expected TrajectoryTooShort");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TrajectoryTooShort);
  }
}

TEST_CASE("forces: F_u vanishes on tangent fields for a smooth blob trajectory") {
  const auto S = PotentialSolver::build(unit_exterior(), 128);
  const auto tr = simulate(S, blob_state({{{2, 0.5}, 1.0, 0.3, Profile::Bump}}, {-0.5}), 0.2, 0.05);
  ForceOptions o;
  o.audit_fields = 3;
  const auto f = net_force(S, tr, 1, o);
  REQUIRE(f.audit.size() == 3);
  CHECK(f.audit_tolerance > 0.0);
  for (double a : f.audit) {
    CAPTURE(a);
    CAPTURE(f.audit_tolerance);
    CHECK(a < 10.0 * f.audit_tolerance);
  }
}
