#include "helipatch/green.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "helipatch/errors.hpp"
#include "helipatch/rng.hpp"

namespace helipatch {

double leading_part(const Vec2& x, const Vec2& y, const CoefficientField& K) {
  const Vec2 diff = x - y;
  if (diff.norm() < 1e-14)
    fail(ErrorCode::CoincidentPoints, "leading part is singular on the diagonal");
  const Mat2 Kx = K.eval(x);
  const Mat2 Ky = K.eval(y);
  const double wx = 1.0 / std::sqrt(Kx(0, 0) * Kx(1, 1) - Kx(0, 1) * Kx(1, 0));
  const double wy = 1.0 / std::sqrt(Ky(0, 0) * Ky(1, 1) - Ky(0, 1) * Ky(1, 0));
  const Mat2 T = 0.5 * (inverse_cholesky_factor(Kx) + inverse_cholesky_factor(Ky));
  const double r = (T * diff).norm();
  return -0.5 * (wx + wy) * std::log(r) / (2.0 * std::numbers::pi);
}

const std::vector<double>& GreenOperator::column(int y_node) {
  auto it = columns_.find(y_node);
  if (it != columns_.end()) return it->second;
  const Eigen::VectorXd b = sys_->point_load(y_node);
  auto [pos, ok] = columns_.emplace(y_node, sys_->solve_load(b));
  return pos->second;
}

double GreenOperator::regular_part(int x_node, int y_node, double min_separation_cells) {
  const Vec2& x = mesh_->nodes[x_node];
  const Vec2& y = mesh_->nodes[y_node];
  if ((x - y).norm() < min_separation_cells * mesh_->h)
    fail(ErrorCode::TooClose, "evaluation point is inside the singular core of the source");
  const double g = column(y_node)[x_node];
  return g - leading_part(x, y, *K_);
}

std::vector<GreenSample> sample_green_decomposition(GreenOperator& op,
                                                    const CoefficientField& K, int sources,
                                                    std::uint64_t seed) {
  if (sources < 2) fail(ErrorCode::InvalidArgument, "need at least two sources");
  const DiscMesh& mesh = op.mesh();

  // Sources are drawn uniformly from the disc of radius 0.85 R and snapped
  // to the nearest interior node; duplicates are re-drawn.
  Rng rng(seed);
  std::vector<int> nodes;
  int guard = 0;
  while (static_cast<int>(nodes.size()) < sources && guard < 10000) {
    ++guard;
    const double r = 0.85 * mesh.radius * std::sqrt(rng.uniform());
    const double t = 2.0 * std::numbers::pi * rng.uniform();
    const int n = mesh.nearest_node(Vec2(r * std::cos(t), r * std::sin(t)));
    if (mesh.on_boundary[n]) continue;
    if (std::find(nodes.begin(), nodes.end(), n) == nodes.end()) nodes.push_back(n);
  }

  std::vector<GreenSample> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (i == j) continue;
      const int xn = nodes[i], yn = nodes[j];
      if ((mesh.nodes[xn] - mesh.nodes[yn]).norm() < 3.0 * mesh.h) continue;
      GreenSample smp;
      smp.x = mesh.nodes[xn];
      smp.y = mesh.nodes[yn];
      smp.g = op.column(yn)[xn];
      smp.g0 = leading_part(smp.x, smp.y, K);
      smp.s = smp.g - smp.g0;
      out.push_back(smp);
    }
  }
  return out;
}

}  // namespace helipatch
