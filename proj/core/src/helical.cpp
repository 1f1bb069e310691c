#include "helipatch/helical.hpp"

#include <cmath>
#include <numbers>

#include "helipatch/errors.hpp"

namespace helipatch {

namespace {
constexpr double kPi = std::numbers::pi;
}

HelixParams HelixParams::make(double pitch, double circulation, double target_radius,
                              double domain_radius, double eps) {
  if (!(pitch > 0.0)) fail(ErrorCode::InvalidArgument, "pitch must be positive");
  if (!(circulation > 0.0)) fail(ErrorCode::InvalidArgument, "circulation must be positive");
  if (!(target_radius > 0.0) || !(target_radius < domain_radius))
    fail(ErrorCode::InvalidArgument, "target_radius must lie in (0, domain_radius)");
  if (!(eps > 0.0) || !(eps < 1.0))
    fail(ErrorCode::InvalidArgument, "eps must lie in (0, 1)");
  if (!(circulation * eps * eps < kPi * domain_radius * domain_radius))
    fail(ErrorCode::InfeasibleMass,
         "support area circulation*eps^2 does not fit inside the disc");

  HelixParams p;
  p.pitch = pitch;
  p.circulation = circulation;
  p.target_radius = target_radius;
  p.domain_radius = domain_radius;
  p.eps = eps;

  const double k = pitch, d = circulation, r = target_radius;
  const double s2 = k * k + r * r;
  const double s = std::sqrt(s2);
  p.alpha = d / (4.0 * kPi * k * s);
  p.a1 = d * k / (4.0 * kPi * s2);
  p.b1 = d * r * r / (4.0 * kPi * s2);
  p.c_star = std::sqrt(d * s / (kPi * k));
  return p;
}

double HelixParams::log_inv_eps() const { return -std::log(eps); }

Mat2 helical_matrix(const Vec2& x, double pitch) {
  if (!(pitch > 0.0)) fail(ErrorCode::InvalidArgument, "pitch must be positive");
  const double k2 = pitch * pitch;
  const double w = k2 + x.squaredNorm();
  Mat2 K;
  K(0, 0) = (k2 + x[1] * x[1]) / w;
  K(0, 1) = -x[0] * x[1] / w;
  K(1, 0) = K(0, 1);
  K(1, 1) = (k2 + x[0] * x[0]) / w;
  return K;
}

double helical_det_sqrt(const Vec2& x, double pitch) {
  if (!(pitch > 0.0)) fail(ErrorCode::InvalidArgument, "pitch must be positive");
  return pitch / std::sqrt(pitch * pitch + x.squaredNorm());
}

Mat2 inverse_cholesky_factor(const Mat2& K) {
  const double asym = std::abs(K(0, 1) - K(1, 0));
  const double scale = K.cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, scale))
    fail(ErrorCode::NonSPDInput, "coefficient matrix is not symmetric");
  const double det = K(0, 0) * K(1, 1) - K(0, 1) * K(1, 0);
  if (!(K(0, 0) > 0.0) || !(det > 0.0))
    fail(ErrorCode::NonSPDInput, "coefficient matrix is not positive definite");

  Mat2 Kinv;
  Kinv(0, 0) = K(1, 1) / det;
  Kinv(0, 1) = -K(0, 1) / det;
  Kinv(1, 0) = Kinv(0, 1);
  Kinv(1, 1) = K(0, 0) / det;

  // T = L^T where L L^T is the Cholesky factorization of K^{-1}.
  const double a = std::sqrt(Kinv(0, 0));
  const double b = Kinv(1, 0) / a;
  const double c2 = Kinv(1, 1) - b * b;
  if (!(c2 > 0.0)) fail(ErrorCode::NonSPDInput, "coefficient matrix is not positive definite");
  Mat2 T;
  T << a, b, 0.0, std::sqrt(c2);
  return T;
}

double radial_potential(const Vec2& x, const HelixParams& p) {
  const double k = p.pitch;
  const double r2 = x.squaredNorm();
  return p.circulation * std::sqrt(k * k + r2) / (2.0 * kPi * k) - p.alpha * r2;
}

CoefficientField CoefficientField::identity() {
  CoefficientField f;
  f.eval = [](const Vec2&) { return Mat2::Identity().eval(); };
  f.lambda_min = 1.0;
  f.lambda_max = 1.0;
  f.is_identity = true;
  return f;
}

CoefficientField CoefficientField::helical(double pitch, double domain_radius) {
  if (!(pitch > 0.0)) fail(ErrorCode::InvalidArgument, "pitch must be positive");
  CoefficientField f;
  f.eval = [pitch](const Vec2& x) { return helical_matrix(x, pitch); };

  // Ellipticity bounds are derived numerically from a dense radial sample;
  // the matrix is rotation-equivariant so sampling along one ray suffices,
  // but a small angular sweep is kept as a guard.
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  const int nr = 256, na = 8;
  for (int i = 0; i <= nr; ++i) {
    const double r = domain_radius * static_cast<double>(i) / nr;
    for (int j = 0; j < na; ++j) {
      const double t = 2.0 * kPi * j / na;
      const Mat2 K = f.eval(Vec2(r * std::cos(t), r * std::sin(t)));
      Eigen::SelfAdjointEigenSolver<Mat2> es(K);
      lo = std::min(lo, es.eigenvalues()[0]);
      hi = std::max(hi, es.eigenvalues()[1]);
    }
  }
  f.lambda_min = lo;
  f.lambda_max = hi;
  f.is_identity = false;
  return f;
}

}  // namespace helipatch
