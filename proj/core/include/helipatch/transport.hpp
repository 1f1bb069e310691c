#pragma once

#include <cstdint>

#include "helipatch/patch.hpp"

namespace helipatch {

struct TransportMonitors {
  std::vector<double> t;
  std::vector<double> energy;     // kinetic part only, 1/2 \int omega G omega
  std::vector<double> inertia;    // 1/2 \int |x|^2 omega
  std::vector<double> mass;
  std::vector<double> min_omega;
  std::vector<double> max_omega;
  std::vector<double> centroid_x;
  std::vector<double> centroid_y;
  std::vector<double> orbital_dist;
  std::vector<double> level_area;  // area of {omega > cap/2}, rearrangement proxy
};

struct TransportOptions {
  double dt = 0.0;          // explicit step; 0 selects the automatic rule
  double cfl_fraction = 0.45;  // auto rule: dt = cfl_fraction * h / |u|_inf
  bool sharpen = true;      // re-threshold into the patch class while stepping
  int sharpen_stride = 1;   // apply the re-threshold every k-th step
  int monitor_stride = 25;  // monitor row cadence, in steps
  double p_norm = 2.0;
  int rotation_grid = 720;
};

struct TransportRunResult {
  TransportMonitors monitors;
  std::vector<double> final_omega;
  double angular_rate = 0.0;  // least squares d(angle)/dt of the centroid
  int steps = 0;
  double dt_min = 0.0, dt_max = 0.0;
};

// L^p distance to the nearest rotation of a reference profile: minimizes
// || omega - R_theta reference ||_p over a uniform grid of n_theta angles,
// resampling the reference at rotated cell centers.
double orbital_distance(const DiscMesh& mesh, const std::vector<double>& omega,
                        const std::vector<double>& reference, double p = 2.0,
                        int n_theta = 720);

// Transport of the planar vorticity by its own stream-function velocity.
// Space is the P1 disc discretization; time stepping is semi-Lagrangian
// (second order backtracking, linear interpolation).  With sharpen enabled
// every step is followed by a mass-exact re-threshold onto the admissible
// patch class, which removes the interpolation smear of the interface while
// leaving the transport of the support untouched.
class TransportSolver {
 public:
  TransportSolver(const DiscMesh& mesh, const StiffnessSystem& sys, const HelixParams& params);

  const PatchProblem& problem() const { return problem_; }

  // Nodal velocity (perp-gradient of the stream function of omega):
  // solves one Dirichlet problem, averages element gradients to nodes.
  std::vector<Vec2> velocity_of(const std::vector<double>& omega) const;

  // Gradient averaging only, for a known stream function.
  std::vector<Vec2> velocity_from_stream(const std::vector<double>& psi) const;

  // One semi-Lagrangian step through a frozen velocity field.  Requires
  // dt <= 0.5 h / |u|_inf (CFLViolation otherwise).  Characteristics leaving
  // the disc are clamped to the boundary.
  std::vector<double> step(const std::vector<double>& omega, const std::vector<Vec2>& u,
                           double dt) const;

  // Self-consistent evolution over duration T.  The reference profile (for
  // the orbital distance monitor) defaults to the initial profile.
  TransportRunResult run(const std::vector<double>& omega0, double T,
                         const TransportOptions& opts,
                         const std::vector<double>* reference = nullptr) const;

 private:
  const DiscMesh* mesh_;
  const StiffnessSystem* sys_;
  HelixParams params_;
  PatchProblem problem_;
  std::vector<double> node_area_;  // per node: sum of adjacent cell areas

  Vec2 interpolate_velocity(const std::vector<Vec2>& u, const Vec2& x) const;
};

struct StabilityRow {
  double delta = 0.0;
  double initial_distance = 0.0;
  double max_distance = 0.0;
  double final_distance = 0.0;
  double mass_error = 0.0;
  bool completed = false;
  std::string error;
};

struct StabilityReport {
  std::uint64_t rng_seed = 0;
  double period = 0.0;     // pattern rotation period 2 pi / (alpha log(1/eps))
  double horizon = 0.0;    // total simulated time
  StabilityRow baseline;   // delta = 0
  std::vector<StabilityRow> perturbed;
  TransportRunResult baseline_run;
};

// Roughens the support boundary of a converged profile: rim cells lose a
// multiplicative fraction (amplitude delta) of their value and the removed
// mass reappears on the inactive cells just outside, weighted by fresh draws
// from the same stream.  Mass is preserved exactly and the construction is
// linear in delta, so halving delta halves the perturbation.  Throws
// PerturbationInfeasible when the redistribution would violate the box bound.
std::vector<double> perturb_support_boundary(const DiscMesh& mesh,
                                             const std::vector<double>& omega, double cap,
                                             double target_mass, double delta,
                                             std::uint64_t seed);

// Evolves the unperturbed profile and boundary-roughened copies over
// `periods` pattern rotations, tracking the orbital distance to the
// unperturbed profile.
StabilityReport stability_experiment(const TransportSolver& solver,
                                     const std::vector<double>& omega_base,
                                     const std::vector<double>& deltas, double periods,
                                     std::uint64_t rng_seed, const TransportOptions& opts);

}  // namespace helipatch
