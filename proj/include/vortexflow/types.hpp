#pragma once

#include <Eigen/Dense>
#include <complex>
#include <numbers>

namespace vflow {

using cplx = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline cplx to_c(const Vec2& v) { return {v.x(), v.y()}; }
inline Vec2 to_v(cplx z) { return {z.real(), z.imag()}; }

// (a,b)^perp = (-b,a)
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 2, 1> perp(const Eigen::MatrixBase<Derived>& v) {
  return {-v(1), v(0)};
}

inline cplx perp(cplx z) { return {-z.imag(), z.real()}; }

}  // namespace vflow
