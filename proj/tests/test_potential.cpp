#include <chrono>
#include <random>

#include "doctest.h"
#include "vortexflow/potential.hpp"

using namespace vflow;

namespace {
Domain disk() { return make_domain({DomainKind::BoundedWithHoles, {ComponentSpec::circle({0, 0}, 1)}}); }
Domain unit_exterior() { return make_domain({DomainKind::Exterior, {ComponentSpec::circle({0, 0}, 1)}}); }
Domain two_disks() {
  return make_domain({DomainKind::Exterior, {ComponentSpec::circle({0, 0}, 1), ComponentSpec::circle({4, 0}, 1)}});
}
Domain annulus() {
  return make_domain({DomainKind::BoundedWithHoles, {ComponentSpec::circle({0, 0}, 2), ComponentSpec::circle({0, 0}, 0.5)}});
}

Vec2 polar(double r, double t) { return {r * std::cos(t), r * std::sin(t)}; }

// Random pair in the unit disk with |x - y| > sep and boundary distance > margin.
std::pair<Vec2, Vec2> disk_pair(std::mt19937_64& rng, double sep, double margin) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (;;) {
    const double rmax = 1.0 - margin;
    const Vec2 x = polar(rmax * std::sqrt(U(rng)), two_pi * U(rng));
    const Vec2 y = polar(rmax * std::sqrt(U(rng)), two_pi * U(rng));
    if ((x - y).norm() > sep) return {x, y};
  }
}

// Pair outside the unit disk with radii in (1 + margin, 1 + margin + span).
std::pair<Vec2, Vec2> exterior_pair(std::mt19937_64& rng, double sep, double margin, double span) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (;;) {
    const Vec2 x = polar(1.0 + margin + span * U(rng), two_pi * U(rng));
    const Vec2 y = polar(1.0 + margin + span * U(rng), two_pi * U(rng));
    if ((x - y).norm() > sep) return {x, y};
  }
}

Vec2 exterior_disk_kernel(const Vec2& x, const Vec2& y) {
  const Vec2 ys = y / y.squaredNorm();
  const Vec2 a = (x - y) / (x - y).squaredNorm(), b = (x - ys) / (x - ys).squaredNorm();
  return perp(Vec2((a - b) / two_pi));
}
}  // namespace

TEST_CASE("closed forms on the disk and its exterior") {
  CHECK(green_disk({0.5, 0}, {0, 0}) == doctest::Approx(-0.1103178).epsilon(1e-6));
  CHECK(green_disk({0.3, 0.1}, {-0.2, 0.4}) == doctest::Approx(green_disk({-0.2, 0.4}, {0.3, 0.1})).epsilon(1e-14));
  CHECK(std::abs(green_disk({0, 0}, {0.999, 0})) < 1e-3);
  CHECK(green_exterior_disk({2, 0}, {-2, 0}) == doctest::Approx(-0.0355138).epsilon(1e-6));
  CHECK(green_exterior_disk({3, 1}, {2, -2}) == doctest::Approx(green_exterior_disk({2, -2}, {3, 1})).epsilon(1e-14));
  CHECK(std::abs(green_exterior_disk({1 + 1e-6, 0}, {2, 0})) < 1e-4);
  CHECK_THROWS_AS(green_disk({0.2, 0}, {0.2, 0}), Error);
  CHECK_THROWS_AS(green_disk({1.2, 0}, {0.2, 0}), Error);
}

TEST_CASE("disk Green function matches the closed form on 200 pairs") {
  const auto t0 = std::chrono::steady_clock::now();
  auto S = PotentialSolver::build(disk(), 256);
  std::mt19937_64 rng(11);
  double err = 0.0;
  for (int i = 0; i < 200; ++i) {
    auto [x, y] = disk_pair(rng, 0.05, 0.02);
    err = std::max(err, std::abs(S->green(x, y) - green_disk(x, y)));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  MESSAGE("disk max error " << err << " in " << secs << " s");
  CHECK(err < 1e-8);
  CHECK(secs < 10.0);
}

TEST_CASE("exterior Green function matches the inverted closed form") {
  auto S = PotentialSolver::build(unit_exterior(), 128);
  std::mt19937_64 rng(12);
  double err = 0.0, kerr = 0.0;
  for (int i = 0; i < 200; ++i) {
    auto [x, y] = exterior_pair(rng, 0.05, 0.02, 4.0);
    err = std::max(err, std::abs(S->green(x, y) - green_exterior_disk(x, y)));
    if (i < 40) kerr = std::max(kerr, (S->biot_savart_kernel(x, y) - exterior_disk_kernel(x, y)).norm());
  }
  MESSAGE("exterior max error " << err << ", kernel " << kerr);
  CHECK(err < 1e-9);
  CHECK(kerr < 1e-9);
  CHECK(S->routh_regular_part({2, 0}, {2, 0}) == doctest::Approx(-std::log(3.0) / two_pi).epsilon(1e-10));
  const Vec2 K = S->biot_savart_kernel({2, 0}, {3, 0});
  CHECK((K - exterior_disk_kernel({2, 0}, {3, 0})).norm() < 1e-10);
  // w_1 is identically one.
  for (int i = 0; i < 50; ++i) {
    auto [x, y] = exterior_pair(rng, 0.0, 1e-3, 20.0);
    (void)y;
    CHECK(std::abs(S->harmonic_measure(1, x) - 1.0) < 1e-9);
  }
  const Vec2 X = S->harmonic_field(1, {2, 0});
  CHECK(std::abs(X.x()) < 1e-12);
  CHECK(X.y() == doctest::Approx(1.0 / (4.0 * pi)).epsilon(1e-10));
}

TEST_CASE("annulus: symmetry, sign and radial harmonic measure") {
  auto S = PotentialSolver::build(annulus(), 256);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double asym = 0.0, maxg = -1.0, werr = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec2 x = polar(0.52 + 1.46 * U(rng), two_pi * U(rng));
    const Vec2 y = polar(0.52 + 1.46 * U(rng), two_pi * U(rng));
    if ((x - y).norm() < 1e-3) continue;
    const double g = S->green(x, y);
    asym = std::max(asym, std::abs(g - S->green(y, x)));
    maxg = std::max(maxg, g);
    werr = std::max(werr, std::abs(S->harmonic_measure(1, x) - std::log(2.0 / x.norm()) / std::log(4.0)));
  }
  CHECK(asym < 1e-9);
  CHECK(maxg <= 1e-10);
  CHECK(werr < 1e-7);
  CHECK(S->harmonic_measure(1, polar(1.0, 0.4)) == doctest::Approx(0.5).epsilon(1e-9));
  // The boundary trace is delta_jl.
  CHECK(std::abs(S->harmonic_measure(1, polar(0.5, 1.0)) - 1.0) < 1e-10);
  CHECK(std::abs(S->harmonic_measure(0, polar(0.5, 1.0))) < 1e-10);
  CHECK(std::abs(S->harmonic_measure(0, polar(2.0, 1.0)) - 1.0) < 1e-10);
  // Psi_1 = c w_1 with unit circulation around the hole: X_1 = -x^perp / (2 pi |x|^2) (clockwise flux).
  const Vec2 x(1.2, 0.3);
  const Vec2 X = S->harmonic_field(1, x);
  const Vec2 expect = perp(Vec2(x / x.squaredNorm())) / two_pi;
  CHECK((X - expect).norm() < 1e-9);
}

TEST_CASE("two-disk exterior: harmonic measures and Kikuchi fields") {
  auto S = PotentialSolver::build(two_disks(), 128);
  MESSAGE("two-disk condition estimate " << S->condition_estimate());
  CHECK(S->condition_estimate() < 1e12);
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> U(-6.0, 10.0);
  int n = 0;
  double sum_err = 0.0, lo = 1.0, hi = 0.0;
  while (n < 100) {
    const Vec2 x(U(rng), 0.6 * U(rng));
    if (!S->domain().contains(x, 1e-3)) continue;
    ++n;
    const double w1 = S->harmonic_measure(1, x), w2 = S->harmonic_measure(2, x);
    sum_err = std::max(sum_err, std::abs(w1 + w2 - 1.0));
    lo = std::min({lo, w1, w2});
    hi = std::max({hi, w1, w2});
  }
  CHECK(sum_err < 1e-7);
  CHECK(lo >= -1e-10);
  CHECK(hi <= 1.0 + 1e-10);

  // Circulations of X_j around each boundary component.
  double circ_err = 0.0;
  for (int j = 1; j <= 2; ++j)
    for (int l = 1; l <= 2; ++l) {
      const auto q = boundary_quadrature(S->domain(), l, 256);
      double c = 0.0;
      for (size_t i = 0; i < q.nodes.size(); ++i) c += S->harmonic_field(j, q.nodes[i]).dot(q.tangents[i]) * q.weights[i];
      circ_err = std::max(circ_err, std::abs(c - (j == l ? 1.0 : 0.0)));
    }
  MESSAGE("circulation error " << circ_err);
  CHECK(circ_err < 1e-8);

  // Psi_j is constant on each component and tangency of X_j.
  const auto& C = S->boundary_constants();
  double cerr = 0.0, tang = 0.0;
  for (int j = 1; j <= 2; ++j)
    for (int l = 1; l <= 2; ++l) {
      const auto q = boundary_quadrature(S->domain(), l, 64);
      for (size_t i = 0; i < q.nodes.size(); i += 5) {
        cerr = std::max(cerr, std::abs(S->stream_function(j, q.nodes[i]) - C(j - 1, l - 1)));
        tang = std::max(tang, std::abs(S->harmonic_field(j, q.nodes[i]).dot(q.normals[i])));
      }
    }
  CHECK(cerr < 1e-8);
  CHECK(tang < 1e-8);

  // Decay: |X_j - x^perp/(2 pi |x|^2)| = O(1/|x|^2).
  for (int j = 1; j <= 2; ++j) {
    std::vector<double> r{50, 100, 200}, e;
    for (double R : r) {
      const Vec2 x = polar(R, 0.7);
      e.push_back((S->harmonic_field(j, x) - perp(Vec2(x / x.squaredNorm())) / two_pi).norm());
    }
    const double p = -std::log(e[2] / e[0]) / std::log(r[2] / r[0]);
    MESSAGE("decay exponent X_" << j << " = " << p);
    CHECK(p >= 1.9);
  }
}

TEST_CASE("kernel properties: finite differences, tangency, boundary sources") {
  auto S = PotentialSolver::build(two_disks(), 128);
  const Vec2 y(1.7, 0.9);
  const auto pk = S->point_kernel(y);
  for (const Vec2& x : {Vec2(2.1, -1.3), Vec2(-1.5, 0.2), Vec2(6.0, 2.0)}) {
    const double h = 1e-3;
    const auto g = [&](const Vec2& p) { return pk.green(p); };
    const auto d4 = [&](const Vec2& e) {
      return (-g(x + 2 * h * e) + 8 * g(x + h * e) - 8 * g(x - h * e) + g(x - 2 * h * e)) / (12 * h);
    };
    const Vec2 fd = perp(Vec2(d4({1, 0}), d4({0, 1})));
    CHECK((S->biot_savart_kernel(x, y) - fd).norm() < 1e-9);
    CHECK((pk.k_xy(x) - S->biot_savart_kernel(x, y)).norm() < 1e-11);
    // K(y, x) from the y-derivative solves.
    CHECK((pk.k_yx(x) - S->biot_savart_kernel(y, x)).norm() < 1e-9);
    // Laplacian of H in x.
    const double hh = 1e-2;
    const auto H = [&](const Vec2& p) { return pk.regular(p); };
    const double lap = (H(x + Vec2(hh, 0)) + H(x - Vec2(hh, 0)) + H(x + Vec2(0, hh)) + H(x - Vec2(0, hh)) - 4 * H(x)) / (hh * hh);
    CHECK(std::abs(lap) < 1e-5);
  }
  // Tangency at the boundary and vanishing for boundary sources.
  for (int l = 1; l <= 2; ++l) {
    const auto q = boundary_quadrature(S->domain(), l, 32);
    for (size_t i = 0; i < q.nodes.size(); i += 3) {
      CHECK(std::abs(pk.k_xy(q.nodes[i]).dot(q.normals[i])) < 1e-8);
      CHECK(S->biot_savart_kernel({2.0, 2.0}, q.nodes[i]).norm() < 1e-8);
    }
  }
  CHECK(S->routh_regular_part({-2, 1}, {5, 3}) == doctest::Approx(S->routh_regular_part({5, 3}, {-2, 1})).epsilon(1e-10));
  CHECK_THROWS_AS(S->green({2, 2}, {2, 2}), Error);
  CHECK_THROWS_AS(S->green({0.2, 0}, {2, 2}), Error);
}

TEST_CASE("kernel bound report on the disk and the exterior disk") {
  auto D = PotentialSolver::build(disk(), 128);
  KernelSamplePlan plan;
  plan.sources = 20;
  plan.targets = 50;
  auto rep = D->verify_kernel_bounds(plan);
  REQUIRE(rep.find("appBS"));
  CHECK(rep.find("appBS")->finite);
  CHECK(rep.find("appBS")->supremum < 1.0);
  CHECK(rep.find("estk") == nullptr);
  auto E = PotentialSolver::build(unit_exterior(), 128);
  auto r2 = E->verify_kernel_bounds(plan);
  for (const char* name : {"estk", "estg", "estK", "appGreen", "appBS"}) {
    REQUIRE(r2.find(name));
    CHECK(r2.find(name)->finite);
    CHECK(r2.find(name)->samples > 500);
  }
}
