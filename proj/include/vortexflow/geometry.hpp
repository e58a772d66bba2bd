#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vortexflow/curve.hpp"
#include "vortexflow/errors.hpp"
#include "vortexflow/smooth.hpp"
#include "vortexflow/types.hpp"

namespace vflow {

enum class DomainKind { Exterior, BoundedWithHoles };

struct ComponentSpec {
  enum class Type { Circle, Ellipse, Points };
  Type type = Type::Circle;
  Vec2 center = Vec2::Zero();
  double radius = 1.0;
  double a = 1.0, b = 1.0, angle = 0.0;
  std::vector<Vec2> points;
  bool counterclockwise = true;

  static ComponentSpec circle(const Vec2& c, double r) {
    ComponentSpec s;
    s.center = c;
    s.radius = r;
    return s;
  }
  static ComponentSpec ellipse(const Vec2& c, double a, double b, double angle = 0.0) {
    ComponentSpec s;
    s.type = Type::Ellipse;
    s.center = c;
    s.a = a;
    s.b = b;
    s.angle = angle;
    return s;
  }
  static ComponentSpec table(std::vector<Vec2> pts, bool ccw = true) {
    ComponentSpec s;
    s.type = Type::Points;
    s.points = std::move(pts);
    s.counterclockwise = ccw;
    return s;
  }
};

// For BoundedWithHoles the first component is the outer boundary.
struct DomainDescriptor {
  DomainKind kind = DomainKind::Exterior;
  std::vector<ComponentSpec> components;
  double max_speed_ratio = 10.0;
};

struct BoundaryComponent {
  Curve curve;  // counterclockwise
  bool given_counterclockwise = true;
  int index = 0;         // 0 = outer boundary, 1..k obstacles or holes
  bool outer = false;    // fluid lies to the left of the counterclockwise curve
  double side() const { return outer ? 1.0 : -1.0; }
};

struct BoundaryProjection {
  int slot = -1;  // position in Domain::components()
  double t = 0.0;
  double distance = 0.0;  // unsigned distance to the curve
  bool in_fluid = true;   // which side of that curve x lies on
  CurvePoint foot;
};

class Domain {
 public:
  DomainKind kind() const { return kind_; }
  bool exterior() const { return kind_ == DomainKind::Exterior; }
  int genus() const { return exterior() ? int(comps_.size()) : int(comps_.size()) - 1; }
  const std::vector<BoundaryComponent>& components() const { return comps_; }
  int slot(int index) const;
  const BoundaryComponent& component(int index) const { return comps_[slot(index)]; }
  const DomainDescriptor& descriptor() const { return desc_; }

  BoundaryProjection project(const Vec2& x) const;
  BoundaryProjection project_onto(int slot, const Vec2& x) const;
  // Cheap conservative test: true only if x is in the fluid at distance >= b from an obstacle or hole.
  bool certainly_beyond(int slot, const Vec2& x, double b) const;
  double distance_to_boundary(const Vec2& x) const { return project(x).distance; }
  bool contains(const Vec2& x, double margin = 0.0) const;

  // Normalizing frame used by the inversion: x -> rho / (x - c).
  cplx frame_center() const { return fc_; }
  double frame_scale() const { return rho_; }
  cplx to_image(const Vec2& x) const;
  Vec2 from_image(cplx w) const;

  // Curves of the bounded computational domain (outer first, all counterclockwise)
  // and one interior point per hole of that domain.
  const std::vector<Curve>& image_curves() const { return img_; }
  const std::vector<cplx>& image_hole_points() const { return img_holes_; }
  // slot of the physical component that produced image curve i
  int image_source_slot(int i) const { return img_src_[i]; }

  double min_gap() const { return min_gap_; }
  // Offset width usable for distance-based constructions around one component.
  double collar_width(int slot) const { return collar_[slot]; }
  Vec2 hole_centroid(int index) const;
  std::uint64_t hash() const { return hash_; }
  double length_scale() const { return scale_; }

  // Signed distance jet to component `slot` (positive in the fluid); valid
  // within collar_width(slot) of the curve.
  Jet2 distance_jet(int slot, const Vec2& x) const;

 private:
  friend Domain make_domain(const DomainDescriptor&);
  DomainKind kind_ = DomainKind::Exterior;
  DomainDescriptor desc_;
  std::vector<BoundaryComponent> comps_;
  std::vector<std::vector<CurvePoint>> probes_;  // dense samples for projection seeds
  std::vector<std::pair<cplx, double>> bound_;   // enclosing circle per component
  std::vector<Curve> img_;
  std::vector<cplx> img_holes_;
  std::vector<int> img_src_;
  std::vector<double> collar_;
  cplx fc_{0.0, 0.0};
  double rho_ = 1.0;
  double min_gap_ = 0.0;
  double scale_ = 1.0;
  std::uint64_t hash_ = 0;
};

Domain make_domain(const DomainDescriptor& desc);

// Paper inversion (x1, -x2)/|x|^2, i.e. z -> 1/z.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> inversion(const Eigen::Matrix<Scalar, 2, 1>& x) {
  const Scalar r2 = x.squaredNorm();
  if (!(r2 > Scalar(0))) throw Error(ErrorCode::OriginNotInvertible, "inversion at the origin");
  return Eigen::Matrix<Scalar, 2, 1>(x(0) / r2, -x(1) / r2);
}

// chi_n: 1 on {d >= 2/n} inside B_n, 0 on {d <= 1/n} or outside B_2n.
class CutoffFamily {
 public:
  CutoffFamily(const Domain& domain, double n);
  double operator()(const Vec2& x) const { return jet(x).v; }
  Jet2 jet(const Vec2& x) const;
  double n() const { return n_; }
  // Bound C with |grad chi_n| <= C n in the collar and <= C/n in the far annulus.
  static double gradient_constant();

 private:
  const Domain* domain_;
  double n_;
};

double cutoff_chi(const Domain& domain, double n, const Vec2& x);

// eta_n(x) = n^2 eta(n x), eta a normalized polynomial bump supported in B_{1/2}.
double mollifier_eta(double n, const Vec2& x);
double mollifier_profile(double r);  // eta as a function of |x|
double mollifier_normalization();

struct BoundaryQuadrature {
  std::vector<Vec2> nodes;
  std::vector<Vec2> tangents;  // tau = -n^perp
  std::vector<Vec2> normals;   // exterior to the fluid
  std::vector<double> weights;
};

BoundaryQuadrature boundary_quadrature(const Domain& domain, int index, int n);

// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w);

}  // namespace vflow
