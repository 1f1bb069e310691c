#include "helipatch/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "helipatch/errors.hpp"

namespace helipatch {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

// Barycentric membership test with a small negative tolerance so that points
// on shared edges are accepted by both adjacent triangles.
bool contains(const DiscMesh& mesh, int t, const Vec2& x) {
  const auto& v = mesh.tris[t];
  const Vec2& a = mesh.nodes[v[0]];
  const Vec2& b = mesh.nodes[v[1]];
  const Vec2& c = mesh.nodes[v[2]];
  const double A = mesh.area[t];
  const double tol = -1e-12 * A;
  const double w0 = signed_area(b, c, x);
  if (w0 < tol) return false;
  const double w1 = signed_area(c, a, x);
  if (w1 < tol) return false;
  const double w2 = signed_area(a, b, x);
  return w2 >= tol;
}

}  // namespace

DiscMesh build_disc_mesh(double radius, double h_target) {
  if (!(radius > 0.0)) fail(ErrorCode::InvalidArgument, "radius must be positive");
  if (!(h_target > 0.0) || !(h_target < radius / 4.0))
    fail(ErrorCode::InvalidResolution, "h_target must lie in (0, radius/4)");

  DiscMesh mesh;
  mesh.radius = radius;
  const int n = static_cast<int>(std::ceil(radius / h_target));
  mesh.n_rings = n;

  // Nodes: centre, then ring i with 6*i equally spaced nodes.
  std::vector<int> ring_start(n + 1, 0);
  mesh.nodes.emplace_back(0.0, 0.0);
  for (int i = 1; i <= n; ++i) {
    ring_start[i] = static_cast<int>(mesh.nodes.size());
    const double r = radius * static_cast<double>(i) / n;
    const int cnt = 6 * i;
    for (int j = 0; j < cnt; ++j) {
      const double t = kTwoPi * j / cnt;
      mesh.nodes.emplace_back(r * std::cos(t), r * std::sin(t));
    }
  }
  mesh.on_boundary.assign(mesh.nodes.size(), false);
  for (int j = ring_start[n]; j < static_cast<int>(mesh.nodes.size()); ++j)
    mesh.on_boundary[j] = true;

  auto push_tri = [&mesh](int a, int b, int c) {
    double A = signed_area(mesh.nodes[a], mesh.nodes[b], mesh.nodes[c]);
    if (A < 0.0) {
      std::swap(b, c);
      A = -A;
    }
    mesh.tris.push_back({a, b, c});
    mesh.area.push_back(A);
  };

  // Band between the centre and ring 1.
  mesh.bands.push_back({0, 6});
  for (int j = 0; j < 6; ++j)
    push_tri(0, ring_start[1] + j, ring_start[1] + (j + 1) % 6);

  // Bands between consecutive rings: zip the two node loops, advancing the
  // pointer whose step creates the shorter new diagonal.  Both rings carry a
  // node at angle zero, so the merge starts aligned; the rule keeps the
  // longest band edge below 1.25 times the ring spacing.
  for (int i = 2; i <= n; ++i) {
    const int m = 6 * (i - 1), cnt = 6 * i;
    const int si = ring_start[i - 1], so = ring_start[i];
    const int first = static_cast<int>(mesh.tris.size());
    int ai = 0, ao = 0;
    while (ai < m || ao < cnt) {
      bool take_o = ao < cnt;
      if (take_o && ai < m) {
        const Vec2& o_cur = mesh.nodes[so + ao % cnt];
        const Vec2& o_next = mesh.nodes[so + (ao + 1) % cnt];
        const Vec2& i_cur = mesh.nodes[si + ai % m];
        const Vec2& i_next = mesh.nodes[si + (ai + 1) % m];
        take_o = (o_next - i_cur).squaredNorm() <= (i_next - o_cur).squaredNorm();
      }
      if (take_o) {
        push_tri(so + ao % cnt, so + (ao + 1) % cnt, si + ai % m);
        ++ao;
      } else {
        push_tri(so + ao % cnt, si + (ai + 1) % m, si + ai % m);
        ++ai;
      }
    }
    mesh.bands.push_back({first, static_cast<int>(mesh.tris.size()) - first});
  }

  // Longest edge.
  double h = 0.0;
  for (const auto& v : mesh.tris)
    for (int e = 0; e < 3; ++e)
      h = std::max(h, (mesh.nodes[v[e]] - mesh.nodes[v[(e + 1) % 3]]).norm());
  mesh.h = h;

  // Edge-adjacency between triangles.
  mesh.neighbors.assign(mesh.tris.size(), {-1, -1, -1});
  std::unordered_map<std::uint64_t, std::pair<int, int>> edge_owner;
  edge_owner.reserve(mesh.tris.size() * 2);
  for (int t = 0; t < mesh.num_cells(); ++t) {
    const auto& v = mesh.tris[t];
    for (int e = 0; e < 3; ++e) {
      const int a = std::min(v[e], v[(e + 1) % 3]);
      const int b = std::max(v[e], v[(e + 1) % 3]);
      const std::uint64_t key =
          (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
      auto it = edge_owner.find(key);
      if (it == edge_owner.end()) {
        edge_owner.emplace(key, std::make_pair(t, e));
      } else {
        mesh.neighbors[t][e] = it->second.first;
        mesh.neighbors[it->second.first][it->second.second] = t;
      }
    }
  }
  return mesh;
}

double DiscMesh::total_area() const {
  double s = 0.0;
  for (double a : area) s += a;
  return s;
}

double DiscMesh::max_cell_area() const {
  double s = 0.0;
  for (double a : area) s = std::max(s, a);
  return s;
}

double DiscMesh::mean_cell_area() const { return total_area() / num_cells(); }

int DiscMesh::locate(const Vec2& x) const {
  const double r = x.norm();
  if (r > radius * (1.0 + 1e-12)) return -1;
  const double dr = radius / n_rings;
  double theta = std::atan2(x[1], x[0]);
  if (theta < 0.0) theta += kTwoPi;

  // Candidate band (triangles between rings ib-1 and ib), with both
  // neighbours tried to absorb points sitting exactly on a ring.
  int ib = static_cast<int>(std::ceil(r / dr));
  ib = std::clamp(ib, 1, n_rings);
  for (int band : {ib, ib - 1, ib + 1}) {
    if (band < 1 || band > n_rings) continue;
    const Band& bd = bands[band - 1];
    int guess = static_cast<int>(theta / kTwoPi * bd.count);
    guess = std::clamp(guess, 0, bd.count - 1);
    for (int off = -8; off <= 8; ++off) {
      const int t = bd.first + ((guess + off) % bd.count + bd.count) % bd.count;
      if (contains(*this, t, x)) return t;
    }
    for (int j = 0; j < bd.count; ++j) {
      const int t = bd.first + j;
      if (contains(*this, t, x)) return t;
    }
  }
  return -1;
}

double DiscMesh::interpolate(const std::vector<double>& nodal, const Vec2& x) const {
  const int t = locate(x);
  if (t < 0) return 0.0;
  const auto& v = tris[t];
  const Vec2& a = nodes[v[0]];
  const Vec2& b = nodes[v[1]];
  const Vec2& c = nodes[v[2]];
  const double A = area[t];
  const double w0 = signed_area(b, c, x) / A;
  const double w1 = signed_area(c, a, x) / A;
  const double w2 = 1.0 - w0 - w1;
  return w0 * nodal[v[0]] + w1 * nodal[v[1]] + w2 * nodal[v[2]];
}

int DiscMesh::nearest_node(const Vec2& x) const {
  Vec2 q = x;
  const double r = q.norm();
  if (r > radius) q *= radius * (1.0 - 1e-12) / r;
  const int t = locate(q);
  if (t >= 0) {
    int best = tris[t][0];
    double dist = (nodes[best] - x).norm();
    for (int e = 1; e < 3; ++e) {
      const double d = (nodes[tris[t][e]] - x).norm();
      if (d < dist) {
        dist = d;
        best = tris[t][e];
      }
    }
    return best;
  }
  int best = 0;
  double dist = (nodes[0] - x).norm();
  for (int i = 1; i < num_nodes(); ++i) {
    const double d = (nodes[i] - x).norm();
    if (d < dist) {
      dist = d;
      best = i;
    }
  }
  return best;
}

std::vector<double> cell_vertex_mean(const DiscMesh& mesh, const std::vector<double>& nodal) {
  std::vector<double> out(mesh.num_cells());
  for (int t = 0; t < mesh.num_cells(); ++t) {
    const auto& v = mesh.tris[t];
    out[t] = (nodal[v[0]] + nodal[v[1]] + nodal[v[2]]) / 3.0;
  }
  return out;
}

double integrate_cellwise(const DiscMesh& mesh, const std::vector<double>& cw) {
  double s = 0.0;
  for (int t = 0; t < mesh.num_cells(); ++t) s += cw[t] * mesh.area[t];
  return s;
}

double integrate_product(const DiscMesh& mesh, const std::vector<double>& cellwise,
                         const std::vector<double>& nodal) {
  double s = 0.0;
  for (int t = 0; t < mesh.num_cells(); ++t) {
    const auto& v = mesh.tris[t];
    s += cellwise[t] * mesh.area[t] * (nodal[v[0]] + nodal[v[1]] + nodal[v[2]]) / 3.0;
  }
  return s;
}

}  // namespace helipatch
