#include <cstdio>
#include <random>

#include "doctest.h"
#include "vortexflow/quadrature.hpp"
#include "vortexflow/vorticity.hpp"

using namespace vflow;

namespace {
Domain unit_exterior() { return make_domain({DomainKind::Exterior, {ComponentSpec::circle({0, 0}, 1)}}); }
Domain two_disks() {
  return make_domain({DomainKind::Exterior, {ComponentSpec::circle({0, 0}, 1), ComponentSpec::circle({4, 0}, 1)}});
}
Domain annulus() {
  return make_domain({DomainKind::BoundedWithHoles, {ComponentSpec::circle({0, 0}, 2), ComponentSpec::circle({0, 0}, 0.5)}});
}

// Random measure in the exterior of the unit disk, support within |x| < 3.5.
VorticityMeasure random_measure(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto point = [&] {
    const double r = 1.6 + 1.6 * U(rng), t = two_pi * U(rng);
    return Vec2(r * std::cos(t), r * std::sin(t));
  };
  std::vector<Atom> atoms;
  std::vector<Blob> blobs;
  const int na = 1 + int(3 * U(rng)), nb = int(3 * U(rng));
  for (int i = 0; i < na; ++i) atoms.push_back({point(), 4 * U(rng) - 2});
  for (int i = 0; i < nb; ++i) blobs.push_back({point(), 4 * U(rng) - 2, 0.1 + 0.2 * U(rng), Profile::Bump});
  return VorticityMeasure(atoms, blobs);
}
}  // namespace

TEST_CASE("fluid quadrature integrates areas and decaying functions") {
  const auto A = FluidQuadrature::build(annulus());
  CHECK(A.integrate([](const Vec2&) { return 1.0; }) == doctest::Approx(pi * (4.0 - 0.25)).epsilon(1e-7));
  CHECK(A.integrate([](const Vec2& x) { return x.squaredNorm(); }) ==
        doctest::Approx(pi / 2 * (16.0 - 0.0625)).epsilon(1e-7));
  FluidQuadratureOptions fine;
  fine.h = 0.005;
  const auto Af = FluidQuadrature::build(annulus(), fine);
  CHECK(Af.integrate([](const Vec2&) { return 1.0; }) == doctest::Approx(pi * (4.0 - 0.25)).epsilon(1e-9));
  auto inv4 = [](const Vec2& x) { return 1.0 / std::pow(x.squaredNorm(), 2); };
  CHECK(FluidQuadrature::build(unit_exterior()).integrate(inv4) == doctest::Approx(pi).epsilon(1e-6));
  fine.h = 0.0125;
  CHECK(FluidQuadrature::build(unit_exterior(), fine).integrate(inv4) == doctest::Approx(pi).epsilon(1e-9));
  const auto T = FluidQuadrature::build(two_disks());
  const double g = T.integrate([](const Vec2& x) { return std::exp(-(x - Vec2(2, 1.5)).squaredNorm() / 0.1); });
  CHECK(g == doctest::Approx(pi * 0.1).epsilon(1e-8));
  // Collar band of width 0.3 around the unit circle.
  const auto C = FluidQuadrature::collar(unit_exterior(), 0, 0.3, 64, 8);
  CHECK(C.integrate([](const Vec2&) { return 1.0; }) == doctest::Approx(pi * (1.69 - 1.0)).epsilon(1e-12));
}

TEST_CASE("total mass and integration against test functions") {
  VorticityMeasure two({{{2, 0}, 1.0}, {{0, 3}, -0.5}}, {});
  CHECK(two.total_mass() == doctest::Approx(0.5));
  CHECK(two.total_variation() == doctest::Approx(1.5));
  VorticityMeasure blob({}, {{{2, 1}, 1.0, 0.3, Profile::Bump}});
  CHECK(std::abs(blob.total_mass() - 1.0) < 1e-12);
  CHECK(std::abs(blob.integrate([](const Vec2&) { return 1.0; }).value - 1.0) < 1e-12);
  const auto d = unit_exterior();
  auto grid = sample_grid(d, [](const Vec2&) { return 2.0; }, {2, 2}, {2.5, 2.5}, 0.05);
  VorticityMeasure g({}, {}, grid);
  CHECK(std::abs(g.total_mass() - 0.5) < 1e-12);
  // Cut cells carry the fluid fraction: uniform density on the box [-2, 2]^2 outside the disk.
  auto cut = sample_grid(d, [](const Vec2&) { return 1.0; }, {-2, -2}, {2, 2}, 0.05);
  CHECK(VorticityMeasure({}, {}, cut).total_mass() == doctest::Approx(16.0 - pi).epsilon(2e-4));

  auto S = PotentialSolver::build(d, 64);
  const VorticityMeasure mixed({{{1.5, 0.5}, 0.8}}, {{{-2, 1}, 0.6, 0.2, Profile::Gaussian}}, grid);
  const auto e = mixed.integrate([&](const Vec2& x) { return S->harmonic_measure(1, x); });
  CHECK(e.value == doctest::Approx(mixed.total_mass()).epsilon(1e-9));
  VorticityMeasure atom({{{2, 1}, 2.0}}, {});
  auto theta = [](const Vec2& x) { return std::sin(x.x()) * x.y(); };
  CHECK(atom.integrate(theta).value == doctest::Approx(2.0 * std::sin(2.0)).epsilon(1e-15));
  CHECK(atom.integrate(theta).error == 0.0);
}

TEST_CASE("integration is linear in the measure and the integrand") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    const auto a = random_measure(rng).with_atoms({{{2, 2}, 0.3}, {{-1.5, 1}, -0.7}});
    const auto b = random_measure(rng);
    auto f = [](const Vec2& x) { return x.x() * x.y(); };
    auto g = [](const Vec2& x) { return std::cos(x.y()); };
    const double lhs = (a + b.scaled(2.0)).integrate(f).value;
    CHECK(lhs == doctest::Approx(a.integrate(f).value + 2.0 * b.integrate(f).value).epsilon(1e-13));
    const double lf = a.integrate([&](const Vec2& x) { return 3.0 * f(x) - g(x); }).value;
    CHECK(lf == doctest::Approx(3.0 * a.integrate(f).value - a.integrate(g).value).epsilon(1e-13));
  }
}

TEST_CASE("validate rejects support near or across the boundary") {
  const auto d = unit_exterior();
  CHECK_THROWS_AS(VorticityMeasure({{{1.0005, 0}, 1.0}}, {}).validate(d), Error);
  CHECK_THROWS_AS(VorticityMeasure({}, {{{1.2, 0}, 1.0, 0.3}}).validate(d), Error);
  CHECK_NOTHROW(VorticityMeasure({{{1.01, 0}, 1.0}}, {{{2, 0}, 1.0, 0.3}}).validate(d));
  CHECK_THROWS_AS(VorticityMeasure({}, {{{2, 0}, 1.0, 0.0}}), Error);
}

TEST_CASE("mollification: mass, cut-off, contraction and positivity") {
  const auto d = unit_exterior();
  for (double n : {4.0, 8.0}) {
    const auto wn = mollify(d, VorticityMeasure({{{2.5, 0.5}, 1.0}}, {}), n);
    CHECK(std::abs(wn.total_mass() - 1.0) < 1e-10);
    // Support away from the boundary by 1/(2n).
    for (const auto& c : wn.grid().cells) CHECK(d.distance_to_boundary(wn.grid().center(c)) > 0.5 / n);
  }
  const auto near = mollify(d, VorticityMeasure({{{1.0 + 0.4 / 8, 0}, 1.0}}, {}), 8);
  CHECK(near.total_variation() == 0.0);
  CHECK_THROWS_AS(mollify(d, VorticityMeasure({{{2, 0}, 1.0}}, {}), 8, 3), Error);

  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const auto w = random_measure(rng);
    for (double n : {4.0, 8.0, 16.0, 32.0}) {
      const auto wn = mollify(d, w, n);
      CHECK(wn.total_variation() <= w.total_variation() * (1 + 1e-12));
    }
  }
  VorticityMeasure pos({{{2, 0}, 1.0}, {{1.05, 0.2}, 0.5}}, {{{-2, 1}, 0.7, 0.3}});
  for (const auto& c : mollify(d, pos, 8).grid().cells) CHECK(c.value >= 0.0);
}

TEST_CASE("mollified integrals converge to the measure integral") {
  const auto d = unit_exterior();
  const VorticityMeasure w({{{2.1, 0.3}, 1.0}, {{-1.7, 1.2}, -0.6}, {{0.4, -2.5}, 0.8}}, {});
  const std::vector<std::function<double(const Vec2&)>> phis{
      [](const Vec2& x) { return x.x(); },
      [](const Vec2& x) { return std::sin(x.x()) * x.y(); },
      [](const Vec2& x) { return std::exp(-x.squaredNorm() / 8.0); }};
  for (const auto& phi : phis) {
    const double exact = w.integrate(phi).value;
    std::vector<double> err;
    for (double n : {4.0, 8.0, 16.0, 32.0}) err.push_back(std::abs(mollify(d, w, n).integrate(phi).value - exact));
    MESSAGE("errors " << err[0] << " " << err[1] << " " << err[2] << " " << err[3]);
    for (size_t i = 1; i < err.size(); ++i) CHECK(err[i] <= 0.5 * err[i - 1] + 1e-13);
  }
}

TEST_CASE("H^-1 norm: zero, linearity, atoms and the grid oracle") {
  const auto d = unit_exterior();
  auto S = PotentialSolver::build(d, 128);
  CHECK(h_minus_one_norm(*S, VorticityMeasure()).value == 0.0);
  CHECK_THROWS_AS(h_minus_one_norm(*S, VorticityMeasure({{{2, 0}, 1.0}}, {})), Error);
  const VorticityMeasure g({}, {{{2.0, 0.5}, 1.0, 0.25, Profile::Gaussian}});
  const auto e1 = h_minus_one_norm(*S, g);
  const auto e2 = h_minus_one_norm(*S, g.scaled(2.0));
  CHECK(e2.value == doctest::Approx(2.0 * e1.value).epsilon(1e-12));
  const auto grid = h_minus_one_norm(*S, g, NormMode::GridQuadrature, 0.025 / 2);
  MESSAGE("energy " << e1.value << " grid " << grid.value << " +- " << grid.tolerance << " tail " << grid.tail);
  CHECK(std::abs(grid.value - e1.value) < 0.01 * e1.value);
  // A blob pair of opposite sign has finite far field and the same answer both ways.
  const VorticityMeasure dip({}, {{{2.0, 0.5}, 1.0, 0.3}, {{-1.0, 2.0}, -0.5, 0.2}});
  const auto a = h_minus_one_norm(*S, dip);
  const auto b = h_minus_one_norm(*S, dip, NormMode::GridQuadrature);
  MESSAGE("dipole energy " << a.value << " grid " << b.value << " +- " << b.tolerance);
  CHECK(std::abs(a.value - b.value) < 0.01 * a.value);
}

TEST_CASE("K[omega^n] approaches K[omega_blob] in L2") {
  const auto d = unit_exterior();
  auto S = PotentialSolver::build(d, 128);
  const VorticityMeasure blob({}, {{{2.2, 0.4}, 1.0, 0.12, Profile::Bump}});
  double prev = 1e300;
  for (double n : {4.0, 8.0, 16.0, 32.0}) {
    const auto diff = mollify(d, blob, n) + blob.scaled(-1.0);
    const double v = h_minus_one_norm(*S, diff).value;
    MESSAGE("n=" << n << " ||K[w^n - w]|| = " << v);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("measure and grid files round trip") {
  const VorticityMeasure w({{{2, 0.5}, 1.25}}, {{{-2, 1}, 0.5, 0.2, Profile::Gaussian}, {{0, 3}, -0.5, 0.3, Profile::Bump}});
  const std::string path = "test_vorticity_roundtrip.csv";
  write_measure_csv(path, w);
  const auto r = read_measure_csv(path);
  std::remove(path.c_str());
  REQUIRE(r.atoms().size() == 1);
  REQUIRE(r.blobs().size() == 2);
  CHECK(r.atoms()[0].strength == 1.25);
  CHECK(r.blobs()[0].profile == Profile::Gaussian);
  CHECK(r.blobs()[1].radius == 0.3);
  const auto g = mollify(unit_exterior(), w, 4).grid();
  write_grid_binary("test_grid.bin", g);
  const auto g2 = read_grid_binary("test_grid.bin");
  std::remove("test_grid.bin");
  REQUIRE(g2.cells.size() == g.cells.size());
  CHECK(g2.h == g.h);
  double m1 = 0, m2 = 0;
  for (const auto& c : g.cells) m1 += c.value * c.area;
  for (const auto& c : g2.cells) m2 += c.value * c.area;
  CHECK(m1 == doctest::Approx(m2).epsilon(1e-14));
  CHECK_THROWS_AS(read_measure_csv("/nonexistent/file.csv"), Error);
}
