#pragma once

#include <Eigen/Dense>

#include "helipatch/mesh.hpp"

namespace helipatch {

using Vec3 = Eigen::Vector3d;

// Arclength parametrization of the moving filament: a left-handed helix of
// radius target_radius and pitch 2*pi*pitch that screws clockwise while
// drifting axially, the drift rates set by the a1/b1 coefficients.
//   point(s, tau) = (r cos(phi), r sin(phi), (k s - b1 tau) / sqrt(k^2+r^2)),
//   phi = (-s - a1 tau) / sqrt(k^2 + r^2).
Vec3 helix_point(const HelixParams& p, double s, double tau);

struct HelixCurve {
  HelixParams params;

  Vec3 point(double s, double tau = 0.0) const { return helix_point(params, s, tau); }

  // Closed forms for an arclength helix.  Torsion is reported as a
  // magnitude; the signed Frenet value is its negative (left-handed screw).
  double curvature() const;
  double torsion() const;

  // The same quantities recovered by central differences at the given step;
  // used to validate the parametrization.
  double curvature_fd(double s, double step = 1e-4) const;
  double torsion_fd(double s, double step = 1e-4) const;
};

// Deviation of the filament motion from the binormal law
//   d(gamma)/d(tau) = (d / 4 pi) (gamma_s x gamma_ss),
// measured by central differences at (s, tau) with the given step.
double binormal_residual(const HelixParams& p, double s, double tau, double step = 1e-4);

// The angular rate of the filament's screw motion, reconstructed from the
// drift coefficients as (a1 + b1/k)/sqrt(k^2 + r*^2), together with the
// planar rotation coefficient alpha.  The two agree identically.
std::pair<double, double> rotation_consistency(const HelixParams& p);

// Distance from a spatial point to the filament through phase angle `phase`
// at height zero (minimized over the arclength parameter).
double distance_to_helix(const HelixParams& p, const Vec3& x, double phase);

struct TubeSample {
  Vec3 x = Vec3::Zero();
  double w = 0.0;       // helical vorticity magnitude
  Vec3 v = Vec3::Zero();  // vorticity vector, (w / k) * zeta
  double dist_to_helix = 0.0;
};

// Sweeps the active cells of a planar profile through one full turn of the
// helical symmetry group (`levels` equally spaced group angles), attaching
// the vorticity vector field (w/k) * zeta with zeta = (x2, -x1, k).  The
// reported helix distance is measured against the filament phased through
// the planar centroid.  Throws EmptySupport when the profile vanishes.
std::vector<TubeSample> lift_patch(const DiscMesh& mesh, const std::vector<double>& omega,
                                   const HelixParams& p, int levels);

}  // namespace helipatch
