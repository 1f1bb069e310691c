// Microbenchmarks for the hot paths: assembly, Dirichlet solves, Green's
// columns, rearrangement steps, and transport steps.

#include <benchmark/benchmark.h>

#include "helipatch/fem.hpp"
#include "helipatch/green.hpp"
#include "helipatch/helical.hpp"
#include "helipatch/mesh.hpp"
#include "helipatch/patch.hpp"
#include "helipatch/transport.hpp"

using namespace helipatch;

namespace {

struct Fixture {
  HelixParams params;
  DiscMesh mesh;
  CoefficientField K;
  StiffnessSystem sys;

  explicit Fixture(int rings)
      : params(HelixParams::make(1.0, 1.0, 0.5, 1.0, 0.1)),
        mesh(build_disc_mesh(1.0, 1.0 / rings)),
        K(CoefficientField::helical(1.0, 1.0)),
        sys(assemble(mesh, K)) {}
};

Fixture& fixture(int rings) {
  static std::map<int, Fixture> cache;
  auto it = cache.find(rings);
  if (it == cache.end()) it = cache.emplace(rings, Fixture(rings)).first;
  return it->second;
}

void BM_LeadingPart(benchmark::State& state) {
  const CoefficientField K = CoefficientField::helical(1.0, 1.0);
  const Vec2 x(0.31, -0.12), y(-0.4, 0.22);
  for (auto _ : state) benchmark::DoNotOptimize(leading_part(x, y, K));
}
BENCHMARK(BM_LeadingPart);

void BM_Assemble(benchmark::State& state) {
  const int rings = static_cast<int>(state.range(0));
  const DiscMesh mesh = build_disc_mesh(1.0, 1.0 / rings);
  const CoefficientField K = CoefficientField::helical(1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(assemble(mesh, K));
  state.SetComplexityN(mesh.num_cells());
}
BENCHMARK(BM_Assemble)->Arg(16)->Arg(32)->Arg(64)->Complexity();

void BM_DirichletSolve(benchmark::State& state) {
  Fixture& f = fixture(static_cast<int>(state.range(0)));
  const ScalarField one = ScalarField::cellwise(f.mesh, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(f.sys.solve_dirichlet(one));
  state.SetComplexityN(f.sys.num_dofs());
}
BENCHMARK(BM_DirichletSolve)->Arg(16)->Arg(32)->Arg(64)->Complexity();

void BM_GreenColumn(benchmark::State& state) {
  Fixture& f = fixture(32);
  for (auto _ : state) {
    GreenOperator op(f.mesh, f.sys, f.K);
    benchmark::DoNotOptimize(op.column(0));
  }
}
BENCHMARK(BM_GreenColumn);

void BM_BathtubStep(benchmark::State& state) {
  Fixture& f = fixture(static_cast<int>(state.range(0)));
  PatchProblem problem(f.mesh, f.sys, f.params);
  const std::vector<double> omega = problem.seed_profile(Vec2(0.5, 0.0));
  for (auto _ : state) benchmark::DoNotOptimize(problem.bathtub_step(omega));
  state.SetComplexityN(f.mesh.num_cells());
}
BENCHMARK(BM_BathtubStep)->Arg(23)->Arg(46)->Complexity();

void BM_TransportStep(benchmark::State& state) {
  Fixture& f = fixture(23);
  TransportSolver solver(f.mesh, f.sys, f.params);
  const std::vector<double> omega =
      solver.problem().solve(Vec2(0.5, 0.0)).state.omega.values;
  const std::vector<Vec2> u = solver.velocity_of(omega);
  double umax = 0.0;
  for (const Vec2& v : u) umax = std::max(umax, v.norm());
  const double dt = 0.45 * f.mesh.h / umax;
  for (auto _ : state) benchmark::DoNotOptimize(solver.step(omega, u, dt));
}
BENCHMARK(BM_TransportStep);

void BM_OrbitalDistance(benchmark::State& state) {
  Fixture& f = fixture(23);
  PatchProblem problem(f.mesh, f.sys, f.params);
  const std::vector<double> omega = problem.solve(Vec2(0.5, 0.0)).state.omega.values;
  for (auto _ : state)
    benchmark::DoNotOptimize(orbital_distance(f.mesh, omega, omega));
}
BENCHMARK(BM_OrbitalDistance);

}  // namespace

BENCHMARK_MAIN();
