#pragma once

#include <Eigen/Dense>
#include <functional>

namespace helipatch {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// Physical and geometric parameters of a concentrated helical vortex:
// a filament of pitch 2*pi*pitch and circulation `circulation` at distance
// `target_radius` from the axis, reduced to a planar problem on the disc of
// radius `domain_radius`.  `eps` controls the vorticity concentration: the
// planar patch has mass `circulation` and support area circulation*eps^2.
struct HelixParams {
  double pitch = 1.0;          // k > 0
  double circulation = 1.0;    // d > 0
  double target_radius = 0.5;  // r*, where the cross-section concentrates
  double domain_radius = 1.0;  // R* > r*
  double eps = 0.1;            // 0 < eps, with circulation*eps^2 < pi*R*^2

  // Derived quantities, filled in by make():
  double alpha = 0.0;   // angular rate scale: pattern rotates at alpha*log(1/eps)
  double a1 = 0.0;      // filament angular drift coefficient
  double b1 = 0.0;      // filament axial drift coefficient
  double c_star = 0.0;  // limiting core radius: pi*c*^2 = d*sqrt(k^2+r*^2)/k

  static HelixParams make(double pitch, double circulation, double target_radius,
                          double domain_radius, double eps);

  double log_inv_eps() const;
};

// Coefficient matrix of a divergence-form elliptic operator together with
// numerically derived uniform ellipticity bounds over the disc of interest.
struct CoefficientField {
  std::function<Mat2(const Vec2&)> eval;
  double lambda_min = 1.0;  // lower ellipticity bound
  double lambda_max = 1.0;  // upper ellipticity bound
  bool is_identity = false;

  static CoefficientField identity();
  // Coefficient of the helical reduction on the disc |x| <= domain_radius.
  static CoefficientField helical(double pitch, double domain_radius);
};

// Coefficient matrix of the helical reduction,
//   K(x) = (pitch^2 * I + x_perp x_perp^T) / (pitch^2 + |x|^2),
// with x_perp = (x2, -x1).  Symmetric positive definite for pitch > 0.
Mat2 helical_matrix(const Vec2& x, double pitch);

// sqrt(det K(x)) = pitch / sqrt(pitch^2 + |x|^2), evaluated directly.
double helical_det_sqrt(const Vec2& x, double pitch);

// Upper-triangular factor T with positive diagonal and T^T T = K^{-1}.
// The map z -> T z turns the anisotropic quadratic form of K into the
// Euclidean one; throws NonSPDInput if K is not symmetric positive definite.
Mat2 inverse_cholesky_factor(const Mat2& K);

// Radial potential whose unique interior maximum selects the concentration
// radius: Y(x) = d*sqrt(k^2+|x|^2)/(2 pi k) - alpha*|x|^2.
double radial_potential(const Vec2& x, const HelixParams& p);

}  // namespace helipatch
