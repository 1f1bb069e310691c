#pragma once

#include <string>

#include "helipatch/fem.hpp"

namespace helipatch {

// Vorticity profile of the planar reduction: a cellwise field constrained to
// 0 <= omega <= 1/eps^2 with integral equal to the circulation.
struct PatchState {
  ScalarField omega;      // cellwise
  double mu = 0.0;        // threshold value of the deviation stream function
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct PatchDiagnostics {
  Vec2 centroid = Vec2::Zero();
  double support_radius = 0.0;  // |centroid|
  double diameter = 0.0;        // diameter of the union of active cells
  Mat2 second_moment = Mat2::Zero();
  double moment_inertia = 0.0;  // (1/2) \int |x|^2 omega
  double mass = 0.0;
  double energy = 0.0;
  double mu = 0.0;
  int active_cells = 0;
};

// Core rearrangement: fill `mass` into the cells with the highest scores at
// value `cap`, highest score first (ties by ascending index), with at most
// one fractional cell.  Returns the filled values and the score of the last
// cell that received anything.  InfeasibleMass when cap times the total area
// cannot hold the mass.
std::pair<std::vector<double>, double> bathtub_fill(const std::vector<double>& area,
                                                    const std::vector<double>& score,
                                                    double cap, double mass);

struct PatchSolveResult {
  PatchState state;
  PatchDiagnostics diag;
  std::vector<double> energy_trace;  // one entry per iterate
  std::vector<double> mu_trace;
};

// Constrained energy maximization for the rotating-patch profile.  The
// energy is
//   E(omega) = 1/2 \int omega G omega - (alpha/2) log(1/eps) \int |x|^2 omega
// and the admissible class is {0 <= omega <= 1/eps^2, \int omega = d}.
// Iterating the bathtub step (fill the super-level cells of the deviation
// stream function) ascends E monotonically.
class PatchProblem {
 public:
  PatchProblem(const DiscMesh& mesh, const StiffnessSystem& sys, const HelixParams& params);

  const DiscMesh& mesh() const { return *mesh_; }
  const HelixParams& params() const { return params_; }
  double cap() const { return cap_; }

  double mass(const std::vector<double>& omega) const;

  // Moment \int |x|^2 omega evaluated with the P1 vertex rule, the same
  // quadrature the cell-averaged stream values use; this keeps the bathtub
  // step an exact maximizer of the energy linearization.
  double weighted_moment(const std::vector<double>& omega) const;

  double energy(const std::vector<double>& omega) const;

  // Nodal field G omega - (alpha/2) |x|^2 log(1/eps) (no multiplier).
  ScalarField stream_deviation(const std::vector<double>& omega) const;

  // One rearrangement step: redistribute the full budget onto the cells with
  // the largest cell-averaged score, highest first (ties by cell index), at
  // value 1/eps^2 with at most one fractional cell.  Returns the new profile
  // and the score of the threshold cell.
  std::pair<std::vector<double>, double> fill_by_score(const std::vector<double>& score) const;

  // Bathtub step driven by the current profile's deviation stream function.
  std::pair<std::vector<double>, double> bathtub_step(const std::vector<double>& omega) const;

  // Seed profile: a disc of area d*eps^2 centred at seed_point.
  std::vector<double> seed_profile(const Vec2& seed_point) const;

  // Fixed-point iteration from a seed.  Stops when the relative energy
  // change drops below tol and the support symmetric difference is smaller
  // than one mean cell area.  When max_iter is exhausted the best iterate is
  // returned with converged = false.  min_cells_in_support guards against
  // meshes too coarse to resolve the patch (InvalidResolution).
  PatchSolveResult solve(const Vec2& seed_point, double tol = 1e-10, int max_iter = 500,
                         int min_cells_in_support = 20) const;

  PatchDiagnostics diagnostics(const std::vector<double>& omega, double energy,
                               double mu) const;

 private:
  const DiscMesh* mesh_;
  const StiffnessSystem* sys_;
  HelixParams params_;
  double cap_ = 0.0;                   // 1/eps^2
  std::vector<double> vertex_sq_;      // per cell: vertex mean of |x|^2
  std::vector<double> mid_sq_;         // per cell: midpoint mean of |x|^2 (exact)
};

struct SweepRow {
  double eps = 0.0;
  double h = 0.0;
  double energy = 0.0;
  double mu = 0.0;
  double support_radius = 0.0;
  double diameter = 0.0;
  double moment_inertia = 0.0;
  double sm_trace = 0.0;      // trace of the second moment
  double sm_eig_ratio = 0.0;  // larger / smaller eigenvalue
  int active_cells = 0;
  bool converged = false;
  std::string error;  // nonempty when this row failed
};

struct SweepFits {
  // least squares E and mu against log(1/eps), log(diameter) against log(eps)
  double energy_slope = 0.0, energy_intercept = 0.0;
  double mu_slope = 0.0, mu_intercept = 0.0;
  double diameter_slope = 0.0, diameter_intercept = 0.0;
  int points = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  SweepFits fits;
};

// Runs solve() across a list of eps values, each on a mesh fine enough to
// put at least min_cells cells inside the predicted support.  Rows that fail
// are recorded with their error and skipped by the fits.  Rows are
// independent, so `threads` only caps concurrent solves; the result does not
// depend on it.
SweepResult epsilon_sweep(const HelixParams& base, const std::vector<double>& eps_list,
                          const Vec2& seed_point, double tol = 1e-10, int max_iter = 500,
                          int min_cells = 20, int threads = 1);

// Mesh size rule for the sweep: rings chosen so the support holds at least
// min_cells cells.
int sweep_rings(const HelixParams& p, int min_cells);

}  // namespace helipatch
