#pragma once

#include <string>
#include <vector>

#include "vortexflow/types.hpp"

namespace vflow {

// Radial vorticity profiles. Bump: (4m/(pi d^2))(1 - r^2/d^2)^3 on r < d.
// Gaussian: m/(pi d^2) exp(-r^2/d^2). TopHat: uniform disk (grid cells).
enum class Profile { Point, Bump, Gaussian, TopHat };

const char* profile_name(Profile p);
Profile profile_from_name(const std::string& s);

// A radially symmetric piece of vorticity.
struct Charge {
  Vec2 pos = Vec2::Zero();
  double strength = 0.0;
  double radius = 0.0;
  Profile profile = Profile::Point;
};

// Radius beyond which the profile carries no mass (to double precision).
double support_radius(const Charge& q);
double density(const Charge& q, const Vec2& x);
// Fraction of the mass inside radius r.
double enclosed_fraction(const Charge& q, double r);
// Free-space stream function N = (1/2pi) log|.| * omega and its gradient.
double free_potential(const Charge& q, const Vec2& x);
Vec2 free_gradient(const Charge& q, const Vec2& x);
// int N_q d q; throws UnresolvedSingularity for atoms.
double self_energy(const Charge& q);
// int N_a d b.
double pair_energy(const Charge& a, const Charge& b);

struct WeightedPoint {
  Vec2 x;
  double w;
};
// Polar product rule reproducing the mass of q exactly.
std::vector<WeightedPoint> charge_quadrature(const Charge& q, int nr = 0, int nt = 0);

double expint_e1(double x);

}  // namespace vflow
