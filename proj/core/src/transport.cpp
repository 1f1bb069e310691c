#include "helipatch/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "helipatch/errors.hpp"
#include "helipatch/rng.hpp"

namespace helipatch {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  if (n < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}
}  // namespace

double orbital_distance(const DiscMesh& mesh, const std::vector<double>& omega,
                        const std::vector<double>& reference, double p, int n_theta) {
  if (n_theta < 1) fail(ErrorCode::InvalidArgument, "rotation grid must be nonempty");
  if (!(p >= 1.0)) fail(ErrorCode::InvalidArgument, "p must be at least 1");

  const int nc = mesh.num_cells();
  std::vector<Vec2> centers(nc);
  for (int t = 0; t < nc; ++t) centers[t] = mesh.cell_center(t);

  auto term = [p](double d) {
    d = std::abs(d);
    return p == 2.0 ? d * d : std::pow(d, p);
  };

  std::vector<int> act_omega, act_ref;
  for (int t = 0; t < nc; ++t) {
    if (omega[t] != 0.0) act_omega.push_back(t);
    if (reference[t] != 0.0) act_ref.push_back(t);
  }

  // Both profiles are typically small patches, so restricting each angle to
  // the cells where either field can be nonzero (support of omega plus a
  // two-ring neighbourhood of the back-rotated reference support) gives the
  // same sum as the full loop at a fraction of the cost.
  const bool sparse =
      8 * static_cast<int>(act_omega.size() + act_ref.size()) < nc && !act_ref.empty();

  double best = std::numeric_limits<double>::infinity();
  std::vector<char> mark(sparse ? nc : 0, 0);
  std::vector<int> cand;
  for (int k = 0; k < n_theta; ++k) {
    const double theta = kTwoPi * k / n_theta;
    const double c = std::cos(theta), s = std::sin(theta);
    double acc = 0.0;
    if (sparse) {
      cand.clear();
      auto visit = [&](int t) {
        if (t >= 0 && !mark[t]) {
          mark[t] = 1;
          cand.push_back(t);
        }
      };
      for (int t : act_omega) visit(t);
      for (int j : act_ref) {
        const Vec2& x = centers[j];
        const int seed = mesh.locate(Vec2(c * x[0] + s * x[1], -s * x[0] + c * x[1]));
        if (seed < 0) continue;
        visit(seed);
        for (int e = 0; e < 3; ++e) {
          const int nb = mesh.neighbors[seed][e];
          if (nb < 0) continue;
          visit(nb);
          for (int e2 = 0; e2 < 3; ++e2) visit(mesh.neighbors[nb][e2]);
        }
      }
      for (int t : cand) {
        const Vec2& x = centers[t];
        const int src = mesh.locate(Vec2(c * x[0] - s * x[1], s * x[0] + c * x[1]));
        const double ref = src >= 0 ? reference[src] : 0.0;
        acc += mesh.area[t] * term(omega[t] - ref);
        mark[t] = 0;
      }
    } else {
      for (int t = 0; t < nc; ++t) {
        const Vec2& x = centers[t];
        const int src = mesh.locate(Vec2(c * x[0] - s * x[1], s * x[0] + c * x[1]));
        const double ref = src >= 0 ? reference[src] : 0.0;
        acc += mesh.area[t] * term(omega[t] - ref);
      }
    }
    best = std::min(best, acc);
  }
  return std::pow(best, 1.0 / p);
}

TransportSolver::TransportSolver(const DiscMesh& mesh, const StiffnessSystem& sys,
                                 const HelixParams& params)
    : mesh_(&mesh), sys_(&sys), params_(params), problem_(mesh, sys, params) {
  node_area_.assign(mesh.num_nodes(), 0.0);
  for (int t = 0; t < mesh.num_cells(); ++t)
    for (int i = 0; i < 3; ++i) node_area_[mesh.tris[t][i]] += mesh.area[t];
}

std::vector<Vec2> TransportSolver::velocity_from_stream(const std::vector<double>& psi) const {
  const DiscMesh& m = *mesh_;
  std::vector<Vec2> u(m.num_nodes(), Vec2::Zero());
  for (int t = 0; t < m.num_cells(); ++t) {
    const auto& v = m.tris[t];
    const Vec2& a = m.nodes[v[0]];
    const Vec2& b = m.nodes[v[1]];
    const Vec2& c = m.nodes[v[2]];
    const double A = m.area[t];
    const Vec2 e0 = c - b, e1 = a - c, e2 = b - a;
    const Vec2 grad = (psi[v[0]] * Vec2(-e0[1], e0[0]) + psi[v[1]] * Vec2(-e1[1], e1[0]) +
                       psi[v[2]] * Vec2(-e2[1], e2[0])) /
                      (2.0 * A);
    const Vec2 vel(grad[1], -grad[0]);  // perp-gradient
    for (int i = 0; i < 3; ++i) u[v[i]] += A * vel;
  }
  for (int i = 0; i < m.num_nodes(); ++i) u[i] /= node_area_[i];
  return u;
}

std::vector<Vec2> TransportSolver::velocity_of(const std::vector<double>& omega) const {
  ScalarField w{ScalarField::Kind::Cellwise, omega};
  return velocity_from_stream(sys_->solve_dirichlet(w).values);
}

Vec2 TransportSolver::interpolate_velocity(const std::vector<Vec2>& u, const Vec2& x) const {
  Vec2 q = x;
  const double r = q.norm();
  if (r > mesh_->radius) q *= mesh_->radius * (1.0 - 1e-12) / r;
  const int t = mesh_->locate(q);
  if (t < 0) return Vec2::Zero();
  const auto& v = mesh_->tris[t];
  const Vec2& a = mesh_->nodes[v[0]];
  const Vec2& b = mesh_->nodes[v[1]];
  const Vec2& c = mesh_->nodes[v[2]];
  const double A2 = 2.0 * mesh_->area[t];
  const double w0 = ((b[0] - q[0]) * (c[1] - q[1]) - (b[1] - q[1]) * (c[0] - q[0])) / A2;
  const double w1 = ((c[0] - q[0]) * (a[1] - q[1]) - (c[1] - q[1]) * (a[0] - q[0])) / A2;
  const double w2 = 1.0 - w0 - w1;
  return w0 * u[v[0]] + w1 * u[v[1]] + w2 * u[v[2]];
}

std::vector<double> TransportSolver::step(const std::vector<double>& omega,
                                          const std::vector<Vec2>& u, double dt) const {
  const DiscMesh& m = *mesh_;
  double umax = 0.0;
  for (const Vec2& v : u) umax = std::max(umax, v.norm());
  if (umax > 0.0 && dt > 0.5 * m.h / umax)
    fail(ErrorCode::CFLViolation, "dt exceeds 0.5 h / |u|_inf");

  // Cellwise -> nodal recovery for the interpolation stencil.
  std::vector<double> nodal(m.num_nodes(), 0.0);
  for (int t = 0; t < m.num_cells(); ++t)
    for (int i = 0; i < 3; ++i) nodal[m.tris[t][i]] += m.area[t] * omega[t];
  for (int i = 0; i < m.num_nodes(); ++i) nodal[i] /= node_area_[i];

  std::vector<double> out(m.num_cells());
  for (int t = 0; t < m.num_cells(); ++t) {
    const auto& v = m.tris[t];
    const Vec2 x = m.cell_center(t);
    const Vec2 u_here = (u[v[0]] + u[v[1]] + u[v[2]]) / 3.0;
    const Vec2 mid = x - 0.5 * dt * u_here;
    Vec2 back = x - dt * interpolate_velocity(u, mid);
    const double r = back.norm();
    if (r > m.radius) back *= m.radius * (1.0 - 1e-12) / r;
    out[t] = m.interpolate(nodal, back);
  }
  return out;
}

TransportRunResult TransportSolver::run(const std::vector<double>& omega0, double T,
                                        const TransportOptions& opts,
                                        const std::vector<double>* reference) const {
  if (!(T > 0.0)) fail(ErrorCode::InvalidArgument, "horizon must be positive");
  const DiscMesh& m = *mesh_;
  const std::vector<double>& ref = reference != nullptr ? *reference : omega0;
  const double cap = problem_.cap();

  TransportRunResult res;
  std::vector<double> omega = omega0;
  Eigen::VectorXd warm;
  bool have_warm = false;

  double t = 0.0;
  int step_idx = 0;
  res.dt_min = std::numeric_limits<double>::infinity();
  std::vector<double> angle_t, angle_v;
  double prev_angle = 0.0;
  bool have_angle = false;

  while (true) {
    ScalarField w{ScalarField::Kind::Cellwise, omega};
    const Eigen::VectorXd load = sys_->load_vector(w);
    const std::vector<double> psi = sys_->solve_load(load, have_warm ? &warm : nullptr, &warm);
    have_warm = true;
    const std::vector<Vec2> u = velocity_from_stream(psi);

    double umax = 0.0;
    for (const Vec2& vel : u) umax = std::max(umax, vel.norm());

    // Monitors for the current state.
    const bool at_end = t >= T - 1e-12;
    if (step_idx % opts.monitor_stride == 0 || at_end) {
      double quad = 0.0;
      for (int i = 0; i < m.num_nodes(); ++i) quad += load[i] * psi[i];
      double mass = 0.0, inertia = 0.0, mn = omega[0], mx = omega[0], level = 0.0;
      Vec2 first = Vec2::Zero();
      for (int c = 0; c < m.num_cells(); ++c) {
        const double a = m.area[c];
        mass += a * omega[c];
        mn = std::min(mn, omega[c]);
        mx = std::max(mx, omega[c]);
        if (omega[c] > 0.5 * cap) level += a;
        first += a * omega[c] * m.cell_center(c);
      }
      const Vec2 centroid = mass != 0.0 ? Vec2(first / mass) : Vec2::Zero();
      // Inertia uses the midpoint rule (exact for |x|^2).
      for (int c = 0; c < m.num_cells(); ++c) {
        const auto& v = m.tris[c];
        const Vec2 mids[3] = {0.5 * (m.nodes[v[0]] + m.nodes[v[1]]),
                              0.5 * (m.nodes[v[1]] + m.nodes[v[2]]),
                              0.5 * (m.nodes[v[2]] + m.nodes[v[0]])};
        double s = 0.0;
        for (const Vec2& mid : mids) s += mid.squaredNorm();
        inertia += omega[c] * m.area[c] / 3.0 * s;
      }
      res.monitors.t.push_back(t);
      res.monitors.energy.push_back(0.5 * quad);
      res.monitors.inertia.push_back(0.5 * inertia);
      res.monitors.mass.push_back(mass);
      res.monitors.min_omega.push_back(mn);
      res.monitors.max_omega.push_back(mx);
      res.monitors.centroid_x.push_back(centroid[0]);
      res.monitors.centroid_y.push_back(centroid[1]);
      res.monitors.level_area.push_back(level);
      res.monitors.orbital_dist.push_back(
          orbital_distance(m, omega, ref, opts.p_norm, opts.rotation_grid));

      double angle = std::atan2(centroid[1], centroid[0]);
      if (have_angle) {
        while (angle - prev_angle > std::numbers::pi) angle -= kTwoPi;
        while (angle - prev_angle < -std::numbers::pi) angle += kTwoPi;
      }
      prev_angle = angle;
      have_angle = true;
      angle_t.push_back(t);
      angle_v.push_back(angle);
    }
    if (at_end) break;

    double dt = opts.dt > 0.0 ? opts.dt : opts.cfl_fraction * m.h / std::max(umax, 1e-30);
    dt = std::min(dt, T - t);
    if (umax > 0.0 && dt > 0.5 * m.h / umax)
      fail(ErrorCode::CFLViolation, "requested dt exceeds 0.5 h / |u|_inf");

    omega = step(omega, u, dt);
    if (opts.sharpen && opts.sharpen_stride > 0 && (step_idx + 1) % opts.sharpen_stride == 0)
      omega = problem_.fill_by_score(omega).first;

    t += dt;
    ++step_idx;
    res.dt_min = std::min(res.dt_min, dt);
    res.dt_max = std::max(res.dt_max, dt);
  }

  res.final_omega = std::move(omega);
  res.steps = step_idx;
  res.angular_rate = ls_slope(angle_t, angle_v);
  if (res.dt_min > res.dt_max) res.dt_min = res.dt_max = 0.0;
  return res;
}

std::vector<double> perturb_support_boundary(const DiscMesh& mesh,
                                             const std::vector<double>& omega, double cap,
                                             double target_mass, double delta,
                                             std::uint64_t seed) {
  if (delta < 0.0 || delta > 1.0) fail(ErrorCode::InvalidArgument, "delta must lie in [0, 1]");
  if (!(cap > 0.0)) fail(ErrorCode::InvalidArgument, "cap must be positive");
  std::vector<double> out = omega;
  if (delta == 0.0) return out;

  // Rim: active cells with an inactive (or missing) edge neighbour.
  // Outer rim: inactive cells with an active edge neighbour.
  std::vector<int> rim, outer;
  for (int t = 0; t < mesh.num_cells(); ++t) {
    bool touches_active = false, touches_inactive = false;
    for (int e = 0; e < 3; ++e) {
      const int nb = mesh.neighbors[t][e];
      if (nb < 0 || !(omega[nb] > 0.0))
        touches_inactive = true;
      else
        touches_active = true;
    }
    if (omega[t] > 0.0 && touches_inactive) rim.push_back(t);
    if (!(omega[t] > 0.0) && touches_active) outer.push_back(t);
  }
  if (rim.empty()) fail(ErrorCode::EmptySupport, "profile has no support boundary");
  if (outer.empty())
    fail(ErrorCode::PerturbationInfeasible, "no inactive cells adjacent to the support");

  // Remove a delta-proportional fraction of each rim cell and move exactly
  // that mass onto the outer rim (weights drawn from the same stream); both
  // parts scale linearly with delta, so halving the amplitude halves the
  // perturbation field itself.
  Rng rng(seed);
  double removed = 0.0;
  for (int t : rim) {
    const double cut = delta * std::abs(rng.symmetric()) * out[t];
    out[t] -= cut;
    removed += cut * mesh.area[t];
  }
  std::vector<double> weight(outer.size());
  double total_weight = 0.0;
  for (std::size_t i = 0; i < outer.size(); ++i) {
    weight[i] = std::abs(rng.symmetric()) * mesh.area[outer[i]];
    total_weight += weight[i];
  }
  if (!(removed > 0.0) || !(total_weight > 0.0))
    fail(ErrorCode::PerturbationInfeasible, "degenerate roughening draw");
  for (std::size_t i = 0; i < outer.size(); ++i) {
    const double add = removed * weight[i] / (total_weight * mesh.area[outer[i]]);
    if (add > cap)
      fail(ErrorCode::PerturbationInfeasible, "redistribution exceeds the box bound");
    out[outer[i]] += add;
  }

  const double m = integrate_cellwise(mesh, out);
  if (std::abs(m - target_mass) > 1e-10 * std::max(1.0, target_mass))
    fail(ErrorCode::PerturbationInfeasible, "mass not preserved by the roughening");
  return out;
}

StabilityReport stability_experiment(const TransportSolver& solver,
                                     const std::vector<double>& omega_base,
                                     const std::vector<double>& deltas, double periods,
                                     std::uint64_t rng_seed, const TransportOptions& opts) {
  const HelixParams& p = solver.problem().params();
  const DiscMesh& mesh = solver.problem().mesh();
  const double rate = p.alpha * p.log_inv_eps();
  StabilityReport report;
  report.rng_seed = rng_seed;
  report.period = kTwoPi / rate;
  report.horizon = periods * report.period;

  auto run_one = [&](const std::vector<double>& start, StabilityRow& row) {
    row.initial_distance =
        orbital_distance(mesh, start, omega_base, opts.p_norm, opts.rotation_grid);
    const TransportRunResult rr = solver.run(start, report.horizon, opts, &omega_base);
    row.max_distance = 0.0;
    for (double v : rr.monitors.orbital_dist) row.max_distance = std::max(row.max_distance, v);
    row.final_distance = rr.monitors.orbital_dist.back();
    row.mass_error = std::abs(rr.monitors.mass.back() - p.circulation);
    row.completed = true;
    return rr;
  };

  report.baseline.delta = 0.0;
  report.baseline_run = run_one(omega_base, report.baseline);

  // One shared seed: every delta sees the same noise realization, so rows
  // differ only in amplitude.
  for (double delta : deltas) {
    StabilityRow row;
    row.delta = delta;
    try {
      const std::vector<double> start = perturb_support_boundary(
          mesh, omega_base, solver.problem().cap(), p.circulation, delta, rng_seed);
      run_one(start, row);
    } catch (const Error& e) {
      row.error = std::string(to_string(e.code())) + ": " + e.what();
    }
    report.perturbed.push_back(row);
  }
  return report;
}

}  // namespace helipatch
