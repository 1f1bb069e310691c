#include "helipatch/helix.hpp"

#include <cmath>
#include <numbers>

#include "helipatch/errors.hpp"

namespace helipatch {

namespace {
constexpr double kPi = std::numbers::pi;
}

Vec3 helix_point(const HelixParams& p, double s, double tau) {
  const double root = std::sqrt(p.pitch * p.pitch + p.target_radius * p.target_radius);
  const double phi = (-s - p.a1 * tau) / root;
  return Vec3(p.target_radius * std::cos(phi), p.target_radius * std::sin(phi),
              (p.pitch * s - p.b1 * tau) / root);
}

double HelixCurve::curvature() const {
  const double r = params.target_radius, k = params.pitch;
  return r / (k * k + r * r);
}

double HelixCurve::torsion() const {
  const double r = params.target_radius, k = params.pitch;
  return k / (k * k + r * r);
}

double HelixCurve::curvature_fd(double s, double step) const {
  const Vec3 m = point(s - step), c = point(s), p = point(s + step);
  return ((p - 2.0 * c + m) / (step * step)).norm();
}

double HelixCurve::torsion_fd(double s, double step) const {
  // tau = (gamma' x gamma'') . gamma''' / |gamma' x gamma''|^2 with a
  // five-point stencil for the third derivative.
  const Vec3 m2 = point(s - 2.0 * step), m1 = point(s - step), c = point(s),
             p1 = point(s + step), p2 = point(s + 2.0 * step);
  const Vec3 d1 = (p1 - m1) / (2.0 * step);
  const Vec3 d2 = (p1 - 2.0 * c + m1) / (step * step);
  const Vec3 d3 = (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * step * step * step);
  const Vec3 cr = d1.cross(d2);
  // The filament is left-handed, so the signed Frenet torsion is negative;
  // report the magnitude, matching torsion().  Handedness itself is pinned
  // by the binormal law, whose residual is direction-sensitive.
  return std::fabs(cr.dot(d3)) / cr.squaredNorm();
}

double binormal_residual(const HelixParams& p, double s, double tau, double step) {
  const Vec3 dtau = (helix_point(p, s, tau + step) - helix_point(p, s, tau - step)) / (2.0 * step);
  const Vec3 ds = (helix_point(p, s + step, tau) - helix_point(p, s - step, tau)) / (2.0 * step);
  const Vec3 dss = (helix_point(p, s + step, tau) - 2.0 * helix_point(p, s, tau) +
                    helix_point(p, s - step, tau)) /
                   (step * step);
  return (dtau - p.circulation / (4.0 * kPi) * ds.cross(dss)).norm();
}

std::pair<double, double> rotation_consistency(const HelixParams& p) {
  const double root = std::sqrt(p.pitch * p.pitch + p.target_radius * p.target_radius);
  const double reconstructed = (p.a1 + p.b1 / p.pitch) / root;
  return {reconstructed, p.alpha};
}

double distance_to_helix(const HelixParams& p, const Vec3& x, double phase) {
  const double r = p.target_radius, k = p.pitch;
  auto at = [&](double sigma) {
    return Vec3(r * std::cos(phase - sigma), r * std::sin(phase - sigma), k * sigma);
  };
  auto dist2 = [&](double sigma) { return (x - at(sigma)).squaredNorm(); };

  // Coarse scan over two turns around the matching height, then golden
  // section refinement on the best bracket.
  const double center = x[2] / k;
  const int n = 512;
  double best_sigma = center, best = dist2(center);
  for (int i = 0; i <= n; ++i) {
    const double sigma = center + (2.0 * static_cast<double>(i) / n - 1.0) * 2.0 * kPi;
    const double d = dist2(sigma);
    if (d < best) {
      best = d;
      best_sigma = sigma;
    }
  }
  const double span = 4.0 * kPi / n;
  double a = best_sigma - span, b = best_sigma + span;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
  double f1 = dist2(c1), f2 = dist2(c2);
  for (int i = 0; i < 60; ++i) {
    if (f1 < f2) {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - gr * (b - a);
      f1 = dist2(c1);
    } else {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + gr * (b - a);
      f2 = dist2(c2);
    }
  }
  return std::sqrt(dist2(0.5 * (a + b)));
}

std::vector<TubeSample> lift_patch(const DiscMesh& mesh, const std::vector<double>& omega,
                                   const HelixParams& p, int levels) {
  if (levels < 1) fail(ErrorCode::InvalidArgument, "levels must be positive");
  std::vector<int> active;
  for (int t = 0; t < mesh.num_cells(); ++t)
    if (omega[t] > 0.0) active.push_back(t);
  if (active.empty()) fail(ErrorCode::EmptySupport, "profile has no active cells");

  double mass = 0.0;
  Vec2 first = Vec2::Zero();
  for (int t : active) {
    mass += omega[t] * mesh.area[t];
    first += omega[t] * mesh.area[t] * mesh.cell_center(t);
  }
  const Vec2 centroid = first / mass;
  const double phase = std::atan2(centroid[1], centroid[0]);

  std::vector<TubeSample> out;
  out.reserve(active.size() * levels);
  for (int l = 0; l < levels; ++l) {
    const double rho = 2.0 * kPi * static_cast<double>(l) / levels;
    const double c = std::cos(rho), s = std::sin(rho);
    for (int t : active) {
      const Vec2 x = mesh.cell_center(t);
      TubeSample smp;
      // Helical screw: rotate clockwise by rho while climbing k * rho.
      smp.x = Vec3(c * x[0] + s * x[1], -s * x[0] + c * x[1], p.pitch * rho);
      smp.w = omega[t];
      const Vec3 zeta(smp.x[1], -smp.x[0], p.pitch);
      smp.v = smp.w / p.pitch * zeta;
      smp.dist_to_helix = distance_to_helix(p, smp.x, phase);
      out.push_back(smp);
    }
  }
  return out;
}

}  // namespace helipatch
