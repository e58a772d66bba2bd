#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "vortexflow/geometry.hpp"
#include "vortexflow/smooth.hpp"

namespace vflow {

// Y^inf: constant in a collar of every component. Ybar: constant on every
// component with gradient normal there. Free: no boundary pattern.
enum class BoundaryClass { Yinf, Ybar, Free };

const char* boundary_class_name(BoundaryClass c);

// Spatial test function theta with analytic gradient and Hessian.
class TestFunction {
 public:
  using Fn = std::function<Jet2(const Vec2&)>;
  TestFunction() = default;
  TestFunction(Fn f, BoundaryClass cls, std::string name = {});

  Jet2 jet(const Vec2& x) const { return f_(x); }
  double value(const Vec2& x) const { return f_(x).v; }
  Vec2 gradient(const Vec2& x) const { return f_(x).g; }
  BoundaryClass boundary_class() const { return cls_; }
  const std::string& name() const { return name_; }
  // theta on component `index` (sampled at the first quadrature node).
  double boundary_value(const Domain& d, int index) const;

  // Sampled class check: largest violation of the declared boundary pattern.
  // Yinf: max |grad theta| within `collar` of the boundary; Ybar: max spread of theta
  // on each component plus max tangential derivative.
  double class_violation(const Domain& d, double collar, int nodes = 128) const;

  TestFunction operator+(const TestFunction& o) const;
  TestFunction scaled(double s) const;

  static TestFunction constant(double c);
  // a * (1 on |x - c| <= r0, 0 beyond r1), smooth in between.
  static TestFunction flat_bump(const Vec2& c, double r0, double r1, double a = 1.0);
  // 1 within `inner` of component `index`, 0 beyond `outer`; 0 near the others.
  static TestFunction boundary_localizer(const Domain& d, int index, double inner, double outer);
  // Random member of Ybar: sum c_j P_j + e_j s_j P_j (1 + a.x) + bump(x0) q(x) prod(1 - P_j).
  static TestFunction random_ybar(const Domain& d, std::mt19937_64& rng, double scale = 1.0);
  // Polynomial p(x) = c0 + c1 x + c2 y + c3 x y times a flat bump (support away from the boundary).
  static TestFunction polynomial_times_bump(const Vec2& c, double r0, double r1, const Eigen::Vector4d& coef);

 private:
  Fn f_;
  BoundaryClass cls_ = BoundaryClass::Free;
  std::string name_;
};

// Plateau of the signed distance to component `slot`: 1 for s <= a, 0 for s >= b.
Jet2 collar_plateau(const Domain& d, int slot, const Vec2& x, double a, double b);

}  // namespace vflow
