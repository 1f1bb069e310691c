#pragma once

#include <Eigen/Sparse>
#include <optional>

#include "helipatch/mesh.hpp"

namespace helipatch {

// P1 Galerkin discretization of u -> -div(K grad u) on a DiscMesh with a
// homogeneous Dirichlet boundary.  Element integrals use the three
// edge-midpoint quadrature points, which integrates linearly varying
// coefficients exactly and keeps the matrix symmetric.
struct StiffnessSystem {
  const DiscMesh* mesh = nullptr;

  Eigen::SparseMatrix<double> full;     // all nodes, no boundary conditions
  Eigen::SparseMatrix<double> reduced;  // interior rows and columns only
  std::vector<int> dof_of_node;         // node -> interior dof index, -1 on the boundary
  std::vector<int> node_of_dof;         // interior dof index -> node
  std::vector<double> lumped_mass;      // per node, sum of adjacent areas / 3

  // Conjugate gradient controls.  The iteration is Jacobi preconditioned;
  // the cap scales with sqrt(#dof) as the expected iteration growth.
  double cg_tol = 1e-12;
  double cg_cap_factor = 50.0;

  int num_dofs() const { return static_cast<int>(node_of_dof.size()); }

  // Load vector over all nodes for a cellwise or nodal density f.
  Eigen::VectorXd load_vector(const ScalarField& f) const;

  // Unit point mass at a mesh node (the hat-function load of a delta).
  // Throws BoundarySource for boundary nodes.
  Eigen::VectorXd point_load(int node) const;

  // Solves the interior system; optional warm start.  Throws
  // SolverDivergence when the iteration cap is hit.
  Eigen::VectorXd solve_reduced(const Eigen::VectorXd& rhs_reduced,
                                const Eigen::VectorXd* guess = nullptr) const;

  // Solves -div(K grad u) = f with u = 0 on the boundary; returns the nodal
  // solution (zeros on boundary nodes).
  ScalarField solve_dirichlet(const ScalarField& f) const;

  // Same, for an assembled full-size load vector.
  std::vector<double> solve_load(const Eigen::VectorXd& load,
                                 const Eigen::VectorXd* guess = nullptr,
                                 Eigen::VectorXd* reduced_out = nullptr) const;

  // Pointwise image of the discrete operator: (A u) / lumped_mass.
  // Meaningful at interior nodes; boundary entries carry the flux residue.
  ScalarField apply_operator(const ScalarField& u_nodal) const;
};

// Assembles the stiffness system for a coefficient field.  Every quadrature
// evaluation of K is checked for positive definiteness; a violation throws
// NonSPDCoefficient.
StiffnessSystem assemble(const DiscMesh& mesh, const CoefficientField& K);

}  // namespace helipatch
