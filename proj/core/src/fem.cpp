#include "helipatch/fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <vector>

#include "helipatch/errors.hpp"

namespace helipatch {

StiffnessSystem assemble(const DiscMesh& mesh, const CoefficientField& K) {
  StiffnessSystem sys;
  sys.mesh = &mesh;

  const int nn = mesh.num_nodes();
  sys.dof_of_node.assign(nn, -1);
  for (int i = 0; i < nn; ++i)
    if (!mesh.on_boundary[i]) {
      sys.dof_of_node[i] = static_cast<int>(sys.node_of_dof.size());
      sys.node_of_dof.push_back(i);
    }

  sys.lumped_mass.assign(nn, 0.0);
  std::vector<Eigen::Triplet<double>> full_trip, red_trip;
  full_trip.reserve(mesh.num_cells() * 9);
  red_trip.reserve(mesh.num_cells() * 9);

  for (int t = 0; t < mesh.num_cells(); ++t) {
    const auto& v = mesh.tris[t];
    const Vec2& a = mesh.nodes[v[0]];
    const Vec2& b = mesh.nodes[v[1]];
    const Vec2& c = mesh.nodes[v[2]];
    const double A = mesh.area[t];

    // Constant P1 gradients: grad phi_i = perp(opposite edge) / (2A).
    const Vec2 e0 = c - b, e1 = a - c, e2 = b - a;
    const Vec2 g[3] = {Vec2(-e0[1], e0[0]) / (2.0 * A), Vec2(-e1[1], e1[0]) / (2.0 * A),
                       Vec2(-e2[1], e2[0]) / (2.0 * A)};

    const Vec2 mid[3] = {0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)};
    Mat2 Kq = Mat2::Zero();
    for (const Vec2& m : mid) {
      const Mat2 Km = K.eval(m);
      const double det = Km(0, 0) * Km(1, 1) - Km(0, 1) * Km(1, 0);
      if (!(Km(0, 0) > 0.0) || !(det > 0.0))
        fail(ErrorCode::NonSPDCoefficient, "coefficient matrix not SPD at a quadrature point");
      Kq += Km;
    }
    Kq *= A / 3.0;

    for (int i = 0; i < 3; ++i) {
      sys.lumped_mass[v[i]] += A / 3.0;
      for (int j = 0; j < 3; ++j) {
        const double kij = g[i].dot(Kq * g[j]);
        full_trip.emplace_back(v[i], v[j], kij);
        const int di = sys.dof_of_node[v[i]];
        const int dj = sys.dof_of_node[v[j]];
        if (di >= 0 && dj >= 0) red_trip.emplace_back(di, dj, kij);
      }
    }
  }

  sys.full.resize(nn, nn);
  sys.full.setFromTriplets(full_trip.begin(), full_trip.end());
  sys.reduced.resize(sys.num_dofs(), sys.num_dofs());
  sys.reduced.setFromTriplets(red_trip.begin(), red_trip.end());
  return sys;
}

Eigen::VectorXd StiffnessSystem::load_vector(const ScalarField& f) const {
  const DiscMesh& m = *mesh;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m.num_nodes());
  if (f.kind == ScalarField::Kind::Cellwise) {
    for (int t = 0; t < m.num_cells(); ++t) {
      const double w = f.values[t] * m.area[t] / 3.0;
      for (int i = 0; i < 3; ++i) b[m.tris[t][i]] += w;
    }
  } else {
    // Consistent P1 mass: exact for piecewise linear densities.
    for (int t = 0; t < m.num_cells(); ++t) {
      const auto& v = m.tris[t];
      const double w = m.area[t] / 12.0;
      for (int i = 0; i < 3; ++i) {
        double s = f.values[v[i]];
        for (int j = 0; j < 3; ++j) s += f.values[v[j]];
        b[v[i]] += w * s;
      }
    }
  }
  return b;
}

Eigen::VectorXd StiffnessSystem::point_load(int node) const {
  if (node < 0 || node >= mesh->num_nodes())
    fail(ErrorCode::InvalidArgument, "point source node out of range");
  if (mesh->on_boundary[node])
    fail(ErrorCode::BoundarySource, "point source on the Dirichlet boundary");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh->num_nodes());
  b[node] = 1.0;
  return b;
}

Eigen::VectorXd StiffnessSystem::solve_reduced(const Eigen::VectorXd& rhs,
                                               const Eigen::VectorXd* guess) const {
  if (rhs.size() != num_dofs()) fail(ErrorCode::InvalidArgument, "rhs size mismatch");
  if (rhs.lpNorm<Eigen::Infinity>() == 0.0) return Eigen::VectorXd::Zero(num_dofs());

  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setTolerance(cg_tol);
  cg.setMaxIterations(
      static_cast<int>(cg_cap_factor * std::sqrt(static_cast<double>(num_dofs()))) + 10);
  cg.compute(reduced);

  Eigen::VectorXd x;
  if (guess != nullptr && guess->size() == num_dofs())
    x = cg.solveWithGuess(rhs, *guess);
  else
    x = cg.solve(rhs);
  if (cg.info() != Eigen::Success)
    fail(ErrorCode::SolverDivergence,
         "conjugate gradient did not reach tolerance " + std::to_string(cg_tol) + " in " +
             std::to_string(cg.iterations()) + " iterations (residual " +
             std::to_string(cg.error()) + ")");
  return x;
}

std::vector<double> StiffnessSystem::solve_load(const Eigen::VectorXd& load,
                                                const Eigen::VectorXd* guess,
                                                Eigen::VectorXd* reduced_out) const {
  Eigen::VectorXd rhs(num_dofs());
  for (int d = 0; d < num_dofs(); ++d) rhs[d] = load[node_of_dof[d]];
  const Eigen::VectorXd x = solve_reduced(rhs, guess);
  if (reduced_out != nullptr) *reduced_out = x;
  std::vector<double> u(mesh->num_nodes(), 0.0);
  for (int d = 0; d < num_dofs(); ++d) u[node_of_dof[d]] = x[d];
  return u;
}

ScalarField StiffnessSystem::solve_dirichlet(const ScalarField& f) const {
  ScalarField u = ScalarField::nodal(*mesh);
  u.values = solve_load(load_vector(f));
  return u;
}

ScalarField StiffnessSystem::apply_operator(const ScalarField& u_nodal) const {
  if (u_nodal.kind != ScalarField::Kind::Nodal)
    fail(ErrorCode::InvalidArgument, "apply_operator expects a nodal field");
  const Eigen::VectorXd u =
      Eigen::Map<const Eigen::VectorXd>(u_nodal.values.data(), u_nodal.values.size());
  const Eigen::VectorXd Au = full * u;
  ScalarField out = ScalarField::nodal(*mesh);
  for (int i = 0; i < mesh->num_nodes(); ++i) out.values[i] = Au[i] / lumped_mass[i];
  return out;
}

}  // namespace helipatch
