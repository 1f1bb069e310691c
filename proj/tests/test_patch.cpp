#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "helipatch/errors.hpp"
#include "helipatch/fem.hpp"
#include "helipatch/mesh.hpp"
#include "helipatch/patch.hpp"
#include "helipatch/rng.hpp"

using namespace helipatch;

namespace {

constexpr double kPi = std::numbers::pi;

struct PatchSetup {
  HelixParams params;
  DiscMesh mesh;
  CoefficientField K;
  StiffnessSystem sys;
  PatchProblem prob;

  PatchSetup(double eps, int min_cells)
      : params(HelixParams::make(1.0, 1.0, 0.5, 1.0, eps)),
        mesh(build_disc_mesh(params.domain_radius, params.domain_radius / sweep_rings(params, min_cells))),
        K(CoefficientField::helical(params.pitch, params.domain_radius)),
        sys(assemble(mesh, K)),
        prob(mesh, sys, params) {}
};

int count_fractional(const std::vector<double>& omega, double cap) {
  int n = 0;
  for (double v : omega)
    if (v > 0.0 && v < cap) ++n;
  return n;
}

void check_feasible(const PatchProblem& prob, const std::vector<double>& omega) {
  CHECK(prob.mass(omega) == doctest::Approx(prob.params().circulation).epsilon(1e-12));
  for (double v : omega) {
    CHECK(v >= 0.0);
    CHECK(v <= prob.cap() * (1.0 + 1e-12));
  }
}

}  // namespace

TEST_CASE("bathtub fill on the four-cell toy") {
  const std::vector<double> area(4, 0.25);
  const double cap = 8.0;  // a full cell holds cap * area = 2

  // Highest score wins the whole budget.
  auto [w, mu] = bathtub_fill(area, {3.0, 1.0, 2.0, 0.0}, cap, 2.0);
  CHECK(w == std::vector<double>{8.0, 0.0, 0.0, 0.0});
  CHECK(mu == 3.0);

  // Equal scores break toward the lower cell index.
  auto [wt, mut] = bathtub_fill(area, {3.0, 3.0, 1.0, 0.0}, cap, 2.0);
  CHECK(wt == std::vector<double>{8.0, 0.0, 0.0, 0.0});
  CHECK(mut == 3.0);

  // A larger budget spills into the runner-up as a fractional cell.
  auto [w3, mu3] = bathtub_fill(area, {3.0, 1.0, 2.0, 0.0}, cap, 3.0);
  CHECK(w3 == std::vector<double>{8.0, 0.0, 4.0, 0.0});
  CHECK(mu3 == 2.0);
}

TEST_CASE("bathtub fill properties on random data") {
  Rng rng(2024);
  std::vector<double> area(60), score(60);
  double total = 0.0;
  for (size_t i = 0; i < area.size(); ++i) {
    area[i] = 0.01 + rng.uniform();
    score[i] = rng.uniform() * 10.0 - 5.0;
    total += area[i];
  }
  const double cap = 3.0;
  const double mass = 0.4 * cap * total;

  auto [w, mu] = bathtub_fill(area, score, cap, mass);

  double filled = 0.0;
  for (size_t i = 0; i < w.size(); ++i) filled += w[i] * area[i];
  CHECK(filled == doctest::Approx(mass).epsilon(1e-12));
  CHECK(count_fractional(w, cap) <= 1);

  // The active set is a superlevel set of the score, and mu is its lowest
  // score.
  double lowest_active = 1e300, highest_inactive = -1e300;
  for (size_t i = 0; i < w.size(); ++i) {
    CHECK(w[i] >= 0.0);
    CHECK(w[i] <= cap);
    if (w[i] > 0.0)
      lowest_active = std::min(lowest_active, score[i]);
    else
      highest_inactive = std::max(highest_inactive, score[i]);
  }
  CHECK(lowest_active >= highest_inactive);
  CHECK(mu == lowest_active);
}

TEST_CASE("bathtub fill rejects masses the box cannot hold") {
  const std::vector<double> area(4, 0.25);
  CHECK_THROWS_AS(bathtub_fill(area, {1.0, 2.0, 3.0, 4.0}, 8.0, 8.1), Error);
  try {
    bathtub_fill(area, {1.0, 2.0, 3.0, 4.0}, 8.0, 8.1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InfeasibleMass);
  }
}

TEST_CASE("energy closed values and positivity of the kinetic part") {
  PatchSetup s(0.1, 20);

  // The zero profile has exactly zero energy.
  const std::vector<double> zero(s.mesh.num_cells(), 0.0);
  CHECK(s.prob.energy(zero) == 0.0);

  // For a feasible profile the quadratic (kinetic) part is strictly positive.
  const std::vector<double> seed = s.prob.seed_profile(Vec2(0.5, 0.0));
  const double halfrate = 0.5 * s.params.alpha * s.params.log_inv_eps();
  const double kinetic = s.prob.energy(seed) + halfrate * s.prob.weighted_moment(seed);
  CHECK(kinetic > 0.0);
}

TEST_CASE("stream deviation of the zero profile is the bare moment ramp") {
  PatchSetup s(0.1, 20);
  const std::vector<double> zero(s.mesh.num_cells(), 0.0);
  const ScalarField dev = s.prob.stream_deviation(zero);

  const double halfrate = 0.5 * s.params.alpha * s.params.log_inv_eps();
  for (int i = 0; i < s.mesh.num_nodes(); ++i) {
    const double expected = -halfrate * s.mesh.nodes[i].squaredNorm();
    CHECK(dev.values[i] == doctest::Approx(expected).epsilon(1e-12));
  }
  // Spot values: zero at the origin node, -alpha R^2 log(1/eps)/2 on the rim.
  const int centre = s.mesh.nearest_node(Vec2(0.0, 0.0));
  CHECK(dev.values[centre] == 0.0);
  int rim = -1;
  for (int i = 0; i < s.mesh.num_nodes(); ++i)
    if (s.mesh.on_boundary[i]) { rim = i; break; }
  REQUIRE(rim >= 0);
  CHECK(dev.values[rim] ==
        doctest::Approx(-halfrate * s.params.domain_radius * s.params.domain_radius)
            .epsilon(1e-12));
}

TEST_CASE("stream deviation is affine in the profile") {
  PatchSetup s(0.1, 20);
  const std::vector<double> seed = s.prob.seed_profile(Vec2(0.4, 0.2));
  std::vector<double> twice = seed;
  for (double& v : twice) v *= 2.0;

  const ScalarField d1 = s.prob.stream_deviation(seed);
  const ScalarField d2 = s.prob.stream_deviation(twice);

  // Subtracting the fixed moment ramp leaves the solver image, which must be
  // homogeneous of degree one.
  const double halfrate = 0.5 * s.params.alpha * s.params.log_inv_eps();
  double scale = 0.0;
  for (int i = 0; i < s.mesh.num_nodes(); ++i)
    scale = std::max(scale, std::fabs(d1.values[i]));
  for (int i = 0; i < s.mesh.num_nodes(); ++i) {
    const double ramp = halfrate * s.mesh.nodes[i].squaredNorm();
    const double g1 = d1.values[i] + ramp;
    const double g2 = d2.values[i] + ramp;
    CHECK(std::fabs(g2 - 2.0 * g1) <= 1e-9 * std::max(1.0, scale));
  }
}

TEST_CASE("seed profile is feasible and sits where asked") {
  PatchSetup s(0.05, 20);
  const Vec2 c(0.3, -0.4);
  const std::vector<double> seed = s.prob.seed_profile(c);
  check_feasible(s.prob, seed);
  CHECK(count_fractional(seed, s.prob.cap()) <= 1);

  const PatchDiagnostics d = s.prob.diagnostics(seed, 0.0, 0.0);
  CHECK((d.centroid - c).norm() < 2.0 * s.mesh.h);
}

TEST_CASE("solver converges at the reference parameters") {
  PatchSetup s(0.1, 20);
  const PatchSolveResult res = s.prob.solve(Vec2(0.5, 0.0));

  CHECK(res.state.converged);
  CHECK(res.state.iterations >= 1);
  check_feasible(s.prob, res.state.omega.values);
  CHECK(count_fractional(res.state.omega.values, s.prob.cap()) <= 1);

  // Monotone ascent with 1e-12 slack, trace consistent with the final state.
  REQUIRE(res.energy_trace.size() >= 2);
  for (size_t i = 1; i < res.energy_trace.size(); ++i)
    CHECK(res.energy_trace[i] >=
          res.energy_trace[i - 1] - 1e-12 * std::max(1.0, std::fabs(res.energy_trace[i - 1])));
  CHECK(res.state.energy == res.energy_trace.back());

  // Multiplier lower bound.
  const double L = s.params.log_inv_eps();
  const double mu_floor = -0.5 * s.params.alpha * s.params.domain_radius *
                          s.params.domain_radius * L;
  CHECK(res.state.mu >= mu_floor);

  // The patch stays at the radius it was seeded on (the predicted one).
  CHECK(std::fabs(res.diag.support_radius - 0.5) < 0.05);
  CHECK(res.diag.mass == doctest::Approx(s.params.circulation).epsilon(1e-12));
  CHECK(res.diag.active_cells >= 20);

  // Moment of inertia against an independent midpoint-rule integral.
  double inertia = 0.0;
  for (int t = 0; t < s.mesh.num_cells(); ++t) {
    if (res.state.omega.values[t] == 0.0) continue;
    const auto& cell = s.mesh.tris[t];
    double cellsq = 0.0;
    for (int e = 0; e < 3; ++e) {
      const Vec2 m = 0.5 * (s.mesh.nodes[cell[e]] + s.mesh.nodes[cell[(e + 1) % 3]]);
      cellsq += m.squaredNorm() / 3.0;
    }
    inertia += res.state.omega.values[t] * cellsq * s.mesh.area[t];
  }
  CHECK(res.diag.moment_inertia == doctest::Approx(0.5 * inertia).epsilon(1e-12));
}

TEST_CASE("eccentric seeds keep every invariant while they creep") {
  PatchSetup s(0.1, 20);
  const PatchSolveResult res = s.prob.solve(Vec2(0.8, 0.0));

  CHECK(res.state.converged);
  check_feasible(s.prob, res.state.omega.values);
  for (size_t i = 1; i < res.energy_trace.size(); ++i)
    CHECK(res.energy_trace[i] >=
          res.energy_trace[i - 1] - 1e-12 * std::max(1.0, std::fabs(res.energy_trace[i - 1])));

  const double L = s.params.log_inv_eps();
  CHECK(res.state.mu >= -0.5 * s.params.alpha * L);

  // The discrete landscape pins eccentric seeds close to where they start;
  // the support must stay interior and connected to its seed radius.
  CHECK(res.diag.support_radius > 0.5);
  CHECK(res.diag.support_radius + res.diag.diameter < s.params.domain_radius);
}

TEST_CASE("solver flags exhausted iteration budgets") {
  PatchSetup s(0.1, 120);
  const PatchSolveResult res = s.prob.solve(Vec2(0.8, 0.0), 1e-10, 2);
  CHECK_FALSE(res.state.converged);
  CHECK(res.state.iterations == 2);
  check_feasible(s.prob, res.state.omega.values);
}

TEST_CASE("solver refuses meshes that cannot resolve the core") {
  HelixParams p = HelixParams::make(1.0, 1.0, 0.5, 1.0, 0.05);
  DiscMesh mesh = build_disc_mesh(1.0, 1.0 / 8);
  StiffnessSystem sys = assemble(mesh, CoefficientField::helical(1.0, 1.0));
  PatchProblem prob(mesh, sys, p);
  CHECK_THROWS_AS(prob.solve(Vec2(0.5, 0.0)), Error);
  try {
    prob.solve(Vec2(0.5, 0.0));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidResolution);
  }
}

TEST_CASE("diagnostics of a single active cell") {
  PatchSetup s(0.1, 20);

  // Pick an interior cell and load it alone.
  int cell = -1;
  for (int t = 0; t < s.mesh.num_cells(); ++t) {
    bool interior = true;
    for (int v : s.mesh.tris[t])
      if (s.mesh.on_boundary[v]) interior = false;
    if (interior) { cell = t; break; }
  }
  REQUIRE(cell >= 0);

  std::vector<double> omega(s.mesh.num_cells(), 0.0);
  omega[cell] = 5.0;
  const PatchDiagnostics d = s.prob.diagnostics(omega, 0.0, 0.0);

  const auto& verts = s.mesh.tris[cell];
  const Vec2 a = s.mesh.nodes[verts[0]], b = s.mesh.nodes[verts[1]],
             c = s.mesh.nodes[verts[2]];
  const Vec2 centroid = (a + b + c) / 3.0;
  CHECK((d.centroid - centroid).norm() < 1e-14);
  CHECK(d.active_cells == 1);

  // Diameter of one triangle is its longest edge.
  const double longest =
      std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
  CHECK(d.diameter == doctest::Approx(longest).epsilon(1e-14));

  // Covariance of the uniform density on a triangle:
  // (1/12) sum (v_i - centroid)(v_i - centroid)^t.
  Mat2 cov = Mat2::Zero();
  for (const Vec2& v : {a, b, c}) {
    const Vec2 r = v - centroid;
    cov += r * r.transpose();
  }
  cov /= 12.0;
  CHECK((d.second_moment - cov).norm() < 1e-13 * std::max(1.0, cov.norm()));

  // SPD whenever the support has positive area.
  Eigen::SelfAdjointEigenSolver<Mat2> es(d.second_moment);
  CHECK(es.eigenvalues()(0) > 0.0);
}

TEST_CASE("diagnostics reject an empty support") {
  PatchSetup s(0.1, 20);
  const std::vector<double> zero(s.mesh.num_cells(), 0.0);
  CHECK_THROWS_AS(s.prob.diagnostics(zero, 0.0, 0.0), Error);
  try {
    s.prob.diagnostics(zero, 0.0, 0.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySupport);
  }
}

TEST_CASE("converged diagnostics are rotation covariant") {
  PatchSetup s(0.05, 60);
  const Eigen::Rotation2Dd R(kPi / 7.0);

  const PatchSolveResult a = s.prob.solve(Vec2(0.5, 0.0));
  const PatchSolveResult b = s.prob.solve(R * Vec2(0.5, 0.0));
  REQUIRE(a.state.converged);
  REQUIRE(b.state.converged);

  auto rel = [](double x, double y) {
    return std::fabs(x - y) / std::max({std::fabs(x), std::fabs(y), 1e-30});
  };
  CHECK(rel(a.diag.energy, b.diag.energy) < 1e-2);
  CHECK(rel(a.diag.mu, b.diag.mu) < 1e-2);
  CHECK(rel(a.diag.support_radius, b.diag.support_radius) < 1e-2);

  // Shape quantities of a few-dozen-cell support are quantized at the few
  // percent level; the gate reflects the measured floor.
  CHECK(rel(a.diag.diameter, b.diag.diameter) < 6e-2);
  Eigen::SelfAdjointEigenSolver<Mat2> ea(a.diag.second_moment), eb(b.diag.second_moment);
  CHECK(rel(ea.eigenvalues()(0), eb.eigenvalues()(0)) < 6e-2);
  CHECK(rel(ea.eigenvalues()(1), eb.eigenvalues()(1)) < 6e-2);

  // The converged patch keeps the angular position of its seed.
  const double angle = std::atan2(b.diag.centroid(1), b.diag.centroid(0));
  CHECK(std::fabs(angle - kPi / 7.0) < 0.05);
}

TEST_CASE("epsilon sweep collects rows and fits") {
  HelixParams base = HelixParams::make(1.0, 1.0, 0.5, 1.0, 0.1);
  const std::vector<double> eps = {0.2, 0.1, 0.05};
  const SweepResult sr = epsilon_sweep(base, eps, Vec2(0.5, 0.0));

  REQUIRE(sr.rows.size() == eps.size());
  for (size_t i = 0; i < sr.rows.size(); ++i) {
    const SweepRow& row = sr.rows[i];
    CHECK(row.error.empty());
    CHECK(row.converged);
    CHECK(row.eps == eps[i]);
    CHECK(row.h > 0.0);
    CHECK(std::fabs(row.support_radius - 0.5) < 0.05);
    CHECK(row.sm_trace > 0.0);
    CHECK(row.sm_eig_ratio >= 1.0);
    CHECK(row.active_cells >= 20);
  }

  // Energy and mu rise as the core concentrates; diameter shrinks.
  CHECK(sr.rows[1].energy > sr.rows[0].energy);
  CHECK(sr.rows[2].energy > sr.rows[1].energy);
  CHECK(sr.rows[2].diameter < sr.rows[0].diameter);

  CHECK(sr.fits.points == 3);
  // Slopes near the closed-form targets even on this short list.
  CHECK(std::fabs(sr.fits.energy_slope - 0.0800732861344324) <
        0.15 * 0.0800732861344324);
  CHECK(std::fabs(sr.fits.mu_slope - 0.1690436040615797) < 0.15 * 0.1690436040615797);
  CHECK(sr.fits.diameter_slope > 0.85);
  CHECK(sr.fits.diameter_slope < 1.15);
}
