#pragma once

#include <array>
#include <vector>

#include "helipatch/helical.hpp"

namespace helipatch {

// Triangulation of the disc |x| <= radius built from concentric rings:
// ring i carries 6*i nodes at radius i*radius/n_rings, plus a centre node.
// The layout is fully determined by (radius, n_rings), which makes meshes
// reproducible and gives O(log) point location through the ring structure.
struct DiscMesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> tris;  // counter-clockwise vertex triples
  std::vector<bool> on_boundary;         // per node
  std::vector<double> area;              // per triangle
  std::vector<std::array<int, 3>> neighbors;  // per triangle, edge-adjacent (-1 at rim)

  double radius = 1.0;
  double h = 0.0;  // longest edge in the triangulation
  int n_rings = 0;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_cells() const { return static_cast<int>(tris.size()); }

  Vec2 cell_center(int t) const {
    const auto& v = tris[t];
    return (nodes[v[0]] + nodes[v[1]] + nodes[v[2]]) / 3.0;
  }

  double total_area() const;
  double max_cell_area() const;
  double mean_cell_area() const;

  // Index of a triangle containing x, or -1 if x lies outside the disc.
  // Points on shared edges resolve deterministically.
  int locate(const Vec2& x) const;

  // Barycentric evaluation of a nodal field at x; zero outside the disc.
  double interpolate(const std::vector<double>& nodal, const Vec2& x) const;

  // Node index closest to x.
  int nearest_node(const Vec2& x) const;

  // Internal acceleration structure (band = triangles between two rings).
  struct Band {
    int first = 0;
    int count = 0;
  };
  std::vector<Band> bands;
};

// Builds the structured disc triangulation.  The actual mesh size satisfies
// h <= 1.5 * h_target.  Throws InvalidResolution unless
// 0 < h_target < radius / 4.
DiscMesh build_disc_mesh(double radius, double h_target);

// Scalar data attached to a mesh, either one value per node (piecewise
// linear) or one value per triangle (piecewise constant).
struct ScalarField {
  enum class Kind { Nodal, Cellwise };
  Kind kind = Kind::Nodal;
  std::vector<double> values;

  static ScalarField nodal(const DiscMesh& mesh, double fill = 0.0) {
    return ScalarField{Kind::Nodal, std::vector<double>(mesh.num_nodes(), fill)};
  }
  static ScalarField cellwise(const DiscMesh& mesh, double fill = 0.0) {
    return ScalarField{Kind::Cellwise, std::vector<double>(mesh.num_cells(), fill)};
  }
};

// Mean of the three vertex values, per cell.
std::vector<double> cell_vertex_mean(const DiscMesh& mesh, const std::vector<double>& nodal);

// Integral of a cellwise field.
double integrate_cellwise(const DiscMesh& mesh, const std::vector<double>& cw);

// Integral of f * g where f is cellwise and g nodal (exact for P1 g).
double integrate_product(const DiscMesh& mesh, const std::vector<double>& cellwise,
                         const std::vector<double>& nodal);

}  // namespace helipatch
