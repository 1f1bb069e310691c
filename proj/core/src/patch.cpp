#include "helipatch/patch.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>
#include <thread>

#include "helipatch/errors.hpp"

namespace helipatch {

namespace {
constexpr double kPi = std::numbers::pi;

double ls_slope(const std::vector<double>& x, const std::vector<double>& y, double* intercept) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  if (intercept != nullptr) *intercept = (sy - slope * sx) / n;
  return slope;
}
}  // namespace

PatchProblem::PatchProblem(const DiscMesh& mesh, const StiffnessSystem& sys,
                           const HelixParams& params)
    : mesh_(&mesh), sys_(&sys), params_(params) {
  cap_ = 1.0 / (params.eps * params.eps);
  const int nc = mesh.num_cells();
  vertex_sq_.resize(nc);
  mid_sq_.resize(nc);
  for (int t = 0; t < nc; ++t) {
    const auto& v = mesh.tris[t];
    const Vec2& a = mesh.nodes[v[0]];
    const Vec2& b = mesh.nodes[v[1]];
    const Vec2& c = mesh.nodes[v[2]];
    vertex_sq_[t] = (a.squaredNorm() + b.squaredNorm() + c.squaredNorm()) / 3.0;
    mid_sq_[t] = ((0.5 * (a + b)).squaredNorm() + (0.5 * (b + c)).squaredNorm() +
                  (0.5 * (c + a)).squaredNorm()) /
                 3.0;
  }
}

double PatchProblem::mass(const std::vector<double>& omega) const {
  return integrate_cellwise(*mesh_, omega);
}

double PatchProblem::weighted_moment(const std::vector<double>& omega) const {
  double s = 0.0;
  for (int t = 0; t < mesh_->num_cells(); ++t) s += omega[t] * mesh_->area[t] * vertex_sq_[t];
  return s;
}

double PatchProblem::energy(const std::vector<double>& omega) const {
  ScalarField w{ScalarField::Kind::Cellwise, omega};
  const Eigen::VectorXd load = sys_->load_vector(w);
  const std::vector<double> psi = sys_->solve_load(load);
  double quad = 0.0;
  for (int i = 0; i < mesh_->num_nodes(); ++i) quad += load[i] * psi[i];
  return 0.5 * quad - 0.5 * params_.alpha * params_.log_inv_eps() * weighted_moment(omega);
}

ScalarField PatchProblem::stream_deviation(const std::vector<double>& omega) const {
  ScalarField w{ScalarField::Kind::Cellwise, omega};
  ScalarField psi = sys_->solve_dirichlet(w);
  const double half_rate = 0.5 * params_.alpha * params_.log_inv_eps();
  for (int i = 0; i < mesh_->num_nodes(); ++i)
    psi.values[i] -= half_rate * mesh_->nodes[i].squaredNorm();
  return psi;
}

std::pair<std::vector<double>, double> bathtub_fill(const std::vector<double>& area,
                                                    const std::vector<double>& score,
                                                    double cap, double mass) {
  const int nc = static_cast<int>(area.size());
  if (static_cast<int>(score.size()) != nc)
    fail(ErrorCode::InvalidArgument, "score size mismatch");
  if (!(cap > 0.0) || !(mass > 0.0))
    fail(ErrorCode::InvalidArgument, "cap and mass must be positive");

  std::vector<int> order(nc);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&score](int a, int b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return a < b;
  });

  std::vector<double> omega(nc, 0.0);
  double remaining = mass;
  double mu = score[order.front()];
  for (int idx : order) {
    if (remaining <= 0.0) break;
    const double full = cap * area[idx];
    if (remaining >= full) {
      // Full cells sit exactly on the box bound; dividing take/area back out
      // would perturb the value by an ulp in either direction.
      omega[idx] = cap;
      remaining -= full;
    } else {
      omega[idx] = std::min(cap, remaining / area[idx]);
      remaining = 0.0;
    }
    mu = score[idx];
  }
  if (remaining > 1e-12 * mass)
    fail(ErrorCode::InfeasibleMass, "the box constraint cannot hold the required mass");
  return {std::move(omega), mu};
}

std::pair<std::vector<double>, double> PatchProblem::fill_by_score(
    const std::vector<double>& score) const {
  return bathtub_fill(mesh_->area, score, cap_, params_.circulation);
}

std::pair<std::vector<double>, double> PatchProblem::bathtub_step(
    const std::vector<double>& omega) const {
  const ScalarField dev = stream_deviation(omega);
  return fill_by_score(cell_vertex_mean(*mesh_, dev.values));
}

std::vector<double> PatchProblem::seed_profile(const Vec2& seed_point) const {
  std::vector<double> score(mesh_->num_cells());
  for (int t = 0; t < mesh_->num_cells(); ++t)
    score[t] = -(mesh_->cell_center(t) - seed_point).norm();
  return fill_by_score(score).first;
}

PatchSolveResult PatchProblem::solve(const Vec2& seed_point, double tol, int max_iter,
                                     int min_cells_in_support) const {
  const double d = params_.circulation;
  const double support_area = d * params_.eps * params_.eps;
  const double mean_area = mesh_->mean_cell_area();
  if (support_area < min_cells_in_support * mean_area)
    fail(ErrorCode::InvalidResolution,
         "mesh too coarse: the predicted support area " + std::to_string(support_area) +
             " holds fewer than " + std::to_string(min_cells_in_support) + " cells");
  if (cap_ * mesh_->total_area() < d)
    fail(ErrorCode::InfeasibleMass, "domain cannot hold the required mass at this cap");

  PatchSolveResult res;
  std::vector<double> omega = seed_profile(seed_point);
  std::vector<double> prev_omega;
  double prev_energy = 0.0;

  const double half_rate = 0.5 * params_.alpha * params_.log_inv_eps();
  Eigen::VectorXd warm;
  bool have_warm = false;

  std::vector<double> dev_cells(mesh_->num_cells());
  int it = 0;
  for (; it < max_iter; ++it) {
    ScalarField w{ScalarField::Kind::Cellwise, omega};
    const Eigen::VectorXd load = sys_->load_vector(w);
    std::vector<double> psi =
        sys_->solve_load(load, have_warm ? &warm : nullptr, &warm);
    have_warm = true;

    double quad = 0.0;
    for (int i = 0; i < mesh_->num_nodes(); ++i) quad += load[i] * psi[i];
    const double energy = 0.5 * quad - half_rate * weighted_moment(omega);
    res.energy_trace.push_back(energy);

    for (int i = 0; i < mesh_->num_nodes(); ++i)
      psi[i] -= half_rate * mesh_->nodes[i].squaredNorm();
    dev_cells = cell_vertex_mean(*mesh_, psi);
    auto [next, mu] = fill_by_score(dev_cells);
    res.mu_trace.push_back(mu);

    if (it > 0) {
      double symdiff = 0.0;
      for (int t = 0; t < mesh_->num_cells(); ++t)
        if ((omega[t] > 0.0) != (prev_omega[t] > 0.0)) symdiff += mesh_->area[t];
      const bool energy_settled =
          std::abs(energy - prev_energy) <= tol * std::max(1.0, std::abs(prev_energy));
      if (energy_settled && symdiff < mean_area) {
        res.state.omega = ScalarField{ScalarField::Kind::Cellwise, omega};
        res.state.mu = mu;
        res.state.energy = energy;
        res.state.iterations = it + 1;
        res.state.converged = true;
        break;
      }
    }
    prev_omega = omega;
    prev_energy = energy;
    omega = std::move(next);
  }

  if (!res.state.converged) {
    res.state.omega = ScalarField{ScalarField::Kind::Cellwise, prev_omega.empty() ? omega : prev_omega};
    res.state.mu = res.mu_trace.back();
    res.state.energy = res.energy_trace.back();
    res.state.iterations = it;
  }
  res.diag = diagnostics(res.state.omega.values, res.state.energy, res.state.mu);
  return res;
}

PatchDiagnostics PatchProblem::diagnostics(const std::vector<double>& omega, double energy,
                                           double mu) const {
  PatchDiagnostics d;
  d.energy = energy;
  d.mu = mu;

  std::vector<int> active;
  for (int t = 0; t < mesh_->num_cells(); ++t)
    if (omega[t] > 0.0) active.push_back(t);
  if (active.empty()) fail(ErrorCode::EmptySupport, "profile has no active cells");
  d.active_cells = static_cast<int>(active.size());

  d.mass = mass(omega);
  Vec2 first_moment = Vec2::Zero();
  for (int t : active) first_moment += omega[t] * mesh_->area[t] * mesh_->cell_center(t);
  d.centroid = first_moment / d.mass;
  d.support_radius = d.centroid.norm();

  // Diameter of the support as a set: max pairwise distance over the
  // vertices of the active cells (a single cell reports its own diameter).
  std::vector<int> verts;
  for (int t : active)
    for (int i = 0; i < 3; ++i) verts.push_back(mesh_->tris[t][i]);
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  for (std::size_t i = 0; i < verts.size(); ++i)
    for (std::size_t j = i + 1; j < verts.size(); ++j)
      d.diameter =
          std::max(d.diameter, (mesh_->nodes[verts[i]] - mesh_->nodes[verts[j]]).norm());

  // Second moments use the edge-midpoint rule, which is exact for
  // quadratics over each cell.
  Mat2 M = Mat2::Zero();
  double inertia = 0.0;
  for (int t : active) {
    const auto& v = mesh_->tris[t];
    const Vec2 mids[3] = {0.5 * (mesh_->nodes[v[0]] + mesh_->nodes[v[1]]),
                          0.5 * (mesh_->nodes[v[1]] + mesh_->nodes[v[2]]),
                          0.5 * (mesh_->nodes[v[2]] + mesh_->nodes[v[0]])};
    const double w = omega[t] * mesh_->area[t] / 3.0;
    for (const Vec2& m : mids) {
      const Vec2 rel = m - d.centroid;
      M += w * rel * rel.transpose();
      inertia += w * m.squaredNorm();
    }
  }
  d.second_moment = M / d.mass;
  d.moment_inertia = 0.5 * inertia;
  return d;
}

int sweep_rings(const HelixParams& p, int min_cells) {
  const double r = p.domain_radius;
  const double support = p.circulation * p.eps * p.eps;
  const double n2 = min_cells * kPi * r * r / (6.0 * support);
  return std::max(8, static_cast<int>(std::ceil(std::sqrt(n2))));
}

SweepResult epsilon_sweep(const HelixParams& base, const std::vector<double>& eps_list,
                          const Vec2& seed_point, double tol, int max_iter, int min_cells,
                          int threads) {
  SweepResult out;
  const int n = static_cast<int>(eps_list.size());
  out.rows.resize(n);
  const auto compute_row = [&](int i) {
    SweepRow row;
    row.eps = eps_list[i];
    try {
      const HelixParams p = HelixParams::make(base.pitch, base.circulation, base.target_radius,
                                              base.domain_radius, eps_list[i]);
      const int rings = sweep_rings(p, min_cells);
      const DiscMesh mesh = build_disc_mesh(p.domain_radius, p.domain_radius / rings);
      const CoefficientField K = CoefficientField::helical(p.pitch, p.domain_radius);
      const StiffnessSystem sys = assemble(mesh, K);
      PatchProblem problem(mesh, sys, p);
      const PatchSolveResult res = problem.solve(seed_point, tol, max_iter, min_cells);

      row.h = mesh.h;
      row.energy = res.state.energy;
      row.mu = res.state.mu;
      row.support_radius = res.diag.support_radius;
      row.diameter = res.diag.diameter;
      row.moment_inertia = res.diag.moment_inertia;
      row.sm_trace = res.diag.second_moment.trace();
      Eigen::SelfAdjointEigenSolver<Mat2> es(res.diag.second_moment);
      row.sm_eig_ratio = es.eigenvalues()[1] / es.eigenvalues()[0];
      row.active_cells = res.diag.active_cells;
      row.converged = res.state.converged;
    } catch (const Error& e) {
      row.error = std::string(to_string(e.code())) + ": " + e.what();
    }
    out.rows[i] = std::move(row);
  };
  const int workers = std::clamp(threads, 1, std::max(n, 1));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) compute_row(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int i = next++; i < n; i = next++) compute_row(i);
      });
    for (std::thread& th : pool) th.join();
  }

  std::vector<double> L, E, mu, log_eps, log_diam;
  for (const SweepRow& row : out.rows) {
    if (!row.error.empty()) continue;
    L.push_back(-std::log(row.eps));
    E.push_back(row.energy);
    mu.push_back(row.mu);
    if (row.diameter > 0.0) {
      log_eps.push_back(std::log(row.eps));
      log_diam.push_back(std::log(row.diameter));
    }
  }
  out.fits.points = static_cast<int>(L.size());
  if (L.size() >= 2) {
    out.fits.energy_slope = ls_slope(L, E, &out.fits.energy_intercept);
    out.fits.mu_slope = ls_slope(L, mu, &out.fits.mu_intercept);
  }
  if (log_eps.size() >= 2)
    out.fits.diameter_slope = ls_slope(log_eps, log_diam, &out.fits.diameter_intercept);
  return out;
}

}  // namespace helipatch
