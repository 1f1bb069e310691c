#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "helipatch/errors.hpp"
#include "helipatch/fem.hpp"
#include "helipatch/rng.hpp"

using namespace helipatch;

namespace {

// Errors of the f = 1 Poisson solve against (1 - |x|^2)/4: max nodal error
// and the lumped-mass L2 error.
std::pair<double, double> poisson_errors(double h_target) {
  const DiscMesh m = build_disc_mesh(1.0, h_target);
  const StiffnessSystem sys = assemble(m, CoefficientField::identity());
  const ScalarField u = sys.solve_dirichlet(ScalarField::cellwise(m, 1.0));
  double emax = 0.0, l2 = 0.0;
  for (int i = 0; i < m.num_nodes(); ++i) {
    const double e = u.values[i] - 0.25 * (1.0 - m.nodes[i].squaredNorm());
    emax = std::max(emax, std::abs(e));
    l2 += sys.lumped_mass[i] * e * e;
  }
  return {emax, std::sqrt(l2)};
}

}  // namespace

TEST_CASE("identity coefficient reproduces the cotangent Laplacian") {
  const DiscMesh m = build_disc_mesh(1.0, 0.12);
  const StiffnessSystem sys = assemble(m, CoefficientField::identity());

  // Independent reference assembly: per-element P1 gradients.
  Eigen::SparseMatrix<double> want(m.num_nodes(), m.num_nodes());
  std::vector<Eigen::Triplet<double>> trips;
  for (int t = 0; t < m.num_cells(); ++t) {
    const auto& v = m.tris[t];
    const Vec2& a = m.nodes[v[0]];
    const Vec2& b = m.nodes[v[1]];
    const Vec2& c = m.nodes[v[2]];
    const double A = m.area[t];
    const Vec2 g[3] = {Vec2(b[1] - c[1], c[0] - b[0]) / (2.0 * A),
                       Vec2(c[1] - a[1], a[0] - c[0]) / (2.0 * A),
                       Vec2(a[1] - b[1], b[0] - a[0]) / (2.0 * A)};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trips.emplace_back(v[i], v[j], A * g[i].dot(g[j]));
  }
  want.setFromTriplets(trips.begin(), trips.end());

  const Eigen::SparseMatrix<double> diff = (sys.full - want).pruned();
  double max_abs = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it)
      max_abs = std::max(max_abs, std::abs(it.value()));
  CHECK(max_abs < 1e-13);
}

TEST_CASE("assembled matrix structure") {
  const DiscMesh m = build_disc_mesh(1.0, 0.09);
  const StiffnessSystem sys = assemble(m, CoefficientField::helical(1.0, 1.0));

  // Constants lie in the kernel before boundary elimination.
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.num_nodes());
  const Eigen::VectorXd rows = sys.full * ones;
  CHECK(rows.cwiseAbs().maxCoeff() < 1e-12);

  const Eigen::SparseMatrix<double> asym =
      Eigen::SparseMatrix<double>(sys.full - Eigen::SparseMatrix<double>(sys.full.transpose()))
          .pruned();
  double max_asym = 0.0;
  for (int k = 0; k < asym.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(asym, k); it; ++it)
      max_asym = std::max(max_asym, std::abs(it.value()));
  CHECK(max_asym < 1e-13);

  // Dirichlet elimination keeps exactly the interior nodes.
  int interior = 0;
  for (int i = 0; i < m.num_nodes(); ++i)
    if (!m.on_boundary[i]) ++interior;
  CHECK(sys.num_dofs() == interior);
}

TEST_CASE("non-SPD coefficient is rejected") {
  const DiscMesh m = build_disc_mesh(1.0, 0.2);
  CoefficientField bad;
  bad.eval = [](const Vec2&) {
    Mat2 K;
    K << 1.0, 2.0, 2.0, 1.0;
    return K;
  };
  try {
    assemble(m, bad);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonSPDCoefficient);
  }
}

TEST_CASE("zero load gives the zero solution") {
  const DiscMesh m = build_disc_mesh(1.0, 0.15);
  const StiffnessSystem sys = assemble(m, CoefficientField::identity());
  const ScalarField u = sys.solve_dirichlet(ScalarField::cellwise(m, 0.0));
  for (double v : u.values) CHECK(v == 0.0);
}

TEST_CASE("Poisson oracle on the unit disc") {
  CHECK(poisson_errors(1.0 / 32).first < 5e-3);
}

TEST_CASE("refinement order of the Poisson oracle") {
  const auto [m16, e16] = poisson_errors(1.0 / 16);
  const auto [m32, e32] = poisson_errors(1.0 / 32);
  const auto [m64, e64] = poisson_errors(1.0 / 64);
  CHECK(m16 > m32);
  CHECK(m32 > m64);
  CHECK(std::log2(e16 / e32) > 1.8);
  CHECK(std::log2(e32 / e64) > 1.8);
}

TEST_CASE("solver linearity") {
  const DiscMesh m = build_disc_mesh(1.0, 1.0 / 16);
  const StiffnessSystem sys = assemble(m, CoefficientField::helical(1.0, 1.0));

  Rng rng(5);
  ScalarField f = ScalarField::cellwise(m), g = ScalarField::cellwise(m);
  for (int t = 0; t < m.num_cells(); ++t) {
    f.values[t] = rng.symmetric();
    g.values[t] = rng.symmetric();
  }
  const double a = 2.5, b = -1.25;
  ScalarField combo = ScalarField::cellwise(m);
  for (int t = 0; t < m.num_cells(); ++t) combo.values[t] = a * f.values[t] + b * g.values[t];

  const ScalarField uf = sys.solve_dirichlet(f);
  const ScalarField ug = sys.solve_dirichlet(g);
  const ScalarField uc = sys.solve_dirichlet(combo);
  double scale = 0.0;
  for (double v : uc.values) scale = std::max(scale, std::abs(v));
  for (int i = 0; i < m.num_nodes(); ++i)
    CHECK(std::abs(uc.values[i] - a * uf.values[i] - b * ug.values[i]) < 1e-9 * scale);
}

TEST_CASE("discrete maximum principle") {
  const DiscMesh m = build_disc_mesh(1.0, 1.0 / 20);
  const StiffnessSystem sys = assemble(m, CoefficientField::helical(1.0, 1.0));
  Rng rng(41);
  ScalarField f = ScalarField::cellwise(m);
  for (int t = 0; t < m.num_cells(); ++t) f.values[t] = rng.uniform();
  const ScalarField u = sys.solve_dirichlet(f);
  double umax = 0.0;
  for (double v : u.values) umax = std::max(umax, std::abs(v));
  for (double v : u.values) CHECK(v >= -1e-10 * umax);
}

TEST_CASE("operator application recovers the coefficient identity") {
  // -div(K grad |x|^2) for the helical coefficient has the closed form
  // -4 k^4 / (k^2 + |x|^2)^2; check the discrete operator against it at the
  // center and near the rim.
  const DiscMesh m = build_disc_mesh(1.0, 1.0 / 64);
  const StiffnessSystem sys = assemble(m, CoefficientField::helical(1.0, 1.0));

  ScalarField u = ScalarField::nodal(m);
  for (int i = 0; i < m.num_nodes(); ++i) u.values[i] = m.nodes[i].squaredNorm();
  const ScalarField Lu = sys.apply_operator(u);

  const int center = m.nearest_node(Vec2(0.0, 0.0));
  REQUIRE_FALSE(m.on_boundary[center]);
  CHECK(Lu.values[center] == doctest::Approx(-4.0).epsilon(0.02));

  // Interior node nearest the rim.
  int rim_node = -1;
  double best = -1.0;
  for (int i = 0; i < m.num_nodes(); ++i)
    if (!m.on_boundary[i] && m.nodes[i].norm() > best) {
      best = m.nodes[i].norm();
      rim_node = i;
    }
  const double want = -4.0 / ((1.0 + best * best) * (1.0 + best * best));
  CHECK(Lu.values[rim_node] == doctest::Approx(want).epsilon(0.02));

  // Constants are annihilated at interior nodes.
  ScalarField c = ScalarField::nodal(m, 3.7);
  const ScalarField Lc = sys.apply_operator(c);
  for (int i = 0; i < m.num_nodes(); ++i)
    if (!m.on_boundary[i]) CHECK(std::abs(Lc.values[i]) < 1e-9);
}

TEST_CASE("solver failure reports divergence") {
  const DiscMesh m = build_disc_mesh(1.0, 1.0 / 24);
  StiffnessSystem sys = assemble(m, CoefficientField::identity());
  sys.cg_cap_factor = 0.0;  // caps the iteration count at the +10 floor
  Rng rng(9);
  ScalarField f = ScalarField::cellwise(m);
  for (int t = 0; t < m.num_cells(); ++t) f.values[t] = rng.symmetric();
  try {
    sys.solve_dirichlet(f);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SolverDivergence);
  }
}

TEST_CASE("point loads reject boundary nodes") {
  const DiscMesh m = build_disc_mesh(1.0, 0.15);
  const StiffnessSystem sys = assemble(m, CoefficientField::identity());
  int bnode = -1;
  for (int i = 0; i < m.num_nodes(); ++i)
    if (m.on_boundary[i]) {
      bnode = i;
      break;
    }
  REQUIRE(bnode >= 0);
  CHECK_THROWS_AS(sys.point_load(bnode), Error);
}
