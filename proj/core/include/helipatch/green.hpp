#pragma once

#include <map>

#include "helipatch/fem.hpp"

namespace helipatch {

// Closed-form leading term of the Green's function of -div(K grad .):
//   G0(x, y) = avg(det K(x)^-1/2, det K(y)^-1/2) * Gamma(T_avg (x - y)),
// where Gamma(z) = -log|z| / (2 pi) and T_avg is the mean of the
// inverse-Cholesky factors at x and y.  Throws CoincidentPoints when
// |x - y| < 1e-14.
double leading_part(const Vec2& x, const Vec2& y, const CoefficientField& K);

// Discrete Green's operator on a fixed mesh/system pair.  Columns (solutions
// for a unit point mass at a node) are cached, so sampling many pairs that
// share sources costs one solve per distinct source.
class GreenOperator {
 public:
  GreenOperator(const DiscMesh& mesh, const StiffnessSystem& sys, const CoefficientField& K)
      : mesh_(&mesh), sys_(&sys), K_(&K) {}

  // Nodal solution of -div(K grad u) = delta_{node y} with zero boundary
  // values.  Throws BoundarySource for boundary nodes.
  const std::vector<double>& column(int y_node);

  // Difference between the discrete Green's function and its leading part,
  // evaluated at node x for a source at node y.  The two nodes must be at
  // least min_separation_cells mesh sizes apart (default 3); closer pairs
  // throw TooClose.
  double regular_part(int x_node, int y_node, double min_separation_cells = 3.0);

  const DiscMesh& mesh() const { return *mesh_; }

 private:
  const DiscMesh* mesh_;
  const StiffnessSystem* sys_;
  const CoefficientField* K_;
  std::map<int, std::vector<double>> columns_;
};

struct GreenSample {
  Vec2 x, y;
  double g0 = 0.0;  // leading part
  double s = 0.0;   // regular remainder
  double g = 0.0;   // discrete Green's function value
};

// Deterministically samples interior node pairs (all pairs drawn from
// `sources` seeded source nodes, separation >= 3h) and tabulates the
// decomposition g = g0 + s.
std::vector<GreenSample> sample_green_decomposition(GreenOperator& op,
                                                    const CoefficientField& K, int sources,
                                                    std::uint64_t seed);

}  // namespace helipatch
