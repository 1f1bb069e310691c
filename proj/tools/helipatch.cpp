// Command line driver: builds meshes, tabulates Green's functions, solves
// rotating-patch profiles, evolves them, and lifts them to helical tubes.
// Every run writes its artifacts plus a manifest.json with the effective
// config, library versions, per-phase timings, and built-in invariant
// checks.  Exit codes: 0 ok, 1 numerical failure, 2 usage.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "helipatch/errors.hpp"
#include "helipatch/fem.hpp"
#include "helipatch/green.hpp"
#include "helipatch/helical.hpp"
#include "helipatch/helix.hpp"
#include "helipatch/io.hpp"
#include "helipatch/mesh.hpp"
#include "helipatch/patch.hpp"
#include "helipatch/transport.hpp"

#ifndef HELIPATCH_VERSION
#define HELIPATCH_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace helipatch;

namespace {

constexpr double kPi = std::numbers::pi;

class Stopwatch {
 public:
  explicit Stopwatch(json& timings, std::string key)
      : timings_(&timings), key_(std::move(key)), start_(clock::now()) {}
  ~Stopwatch() {
    const auto dt = std::chrono::duration<double, std::milli>(clock::now() - start_);
    (*timings_)[key_] = dt.count();
  }

 private:
  using clock = std::chrono::steady_clock;
  json* timings_;
  std::string key_;
  clock::time_point start_;
};

int thread_cap() {
  if (const char* env = std::getenv("HELIPATCH_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

json versions_json() {
  return json{{"helipatch", HELIPATCH_VERSION},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                            std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"cli11", CLI11_VERSION},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

// Writes manifest.json and reports whether all checks passed.  Timing
// fields change run to run; everything else is deterministic for a fixed
// config and seed.
bool write_manifest(const fs::path& out_dir, const std::string& command, const json& config,
                    const json& checks, const json& timings, const json& results = json::object()) {
  bool ok = true;
  for (const auto& [name, passed] : checks.items()) ok = ok && passed.get<bool>();
  json m;
  m["kind"] = "manifest";
  m["command"] = command;
  m["ok"] = ok;
  m["config"] = config;
  m["versions"] = versions_json();
  m["checks"] = checks;
  if (!results.empty()) m["results"] = results;
  m["timings"] = timings;
  fs::create_directories(out_dir);
  write_text_file(out_dir / "manifest.json", m.dump(2) + "\n");
  return ok;
}

void report_checks(const json& checks) {
  for (const auto& [name, passed] : checks.items())
    std::cout << (passed.get<bool>() ? "[ok]   " : "[FAIL] ") << name << '\n';
}

struct PhysicsOpts {
  double k = 1.0;
  double d = 1.0;
  double rstar = 0.5;
  double rstar_domain = 1.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--k", k, "helical pitch parameter")
        ->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--d", d, "total vorticity mass")
        ->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--rstar", rstar, "radius where the profile concentrates")
        ->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--rstar-domain", rstar_domain, "disc radius of the reduced domain")
        ->check(CLI::PositiveNumber)->capture_default_str();
  }

  HelixParams make(double eps) const {
    return HelixParams::make(k, d, rstar, rstar_domain, eps);
  }

  json echo() const {
    return json{{"k", k}, {"d", d}, {"rstar", rstar}, {"rstar_domain", rstar_domain}};
  }
};

struct SeedOpts {
  double x = std::numeric_limits<double>::quiet_NaN();
  double y = std::numeric_limits<double>::quiet_NaN();
  double angle = std::numeric_limits<double>::quiet_NaN();

  void attach(CLI::App* cmd) {
    cmd->add_option("--seed-x", x, "seed point x (default 0.9 of the domain radius)");
    cmd->add_option("--seed-y", y, "seed point y (default 0)");
    cmd->add_option("--seed-angle", angle,
                    "place the seed at 0.9*domain_radius along this angle; "
                    "the maximizers form a rotation orbit and the iteration "
                    "keeps the seed's angular position");
  }

  Vec2 resolve(double domain_radius) const {
    if (!std::isnan(x) || !std::isnan(y))
      return Vec2(std::isnan(x) ? 0.9 * domain_radius : x, std::isnan(y) ? 0.0 : y);
    if (!std::isnan(angle))
      return 0.9 * domain_radius * Vec2(std::cos(angle), std::sin(angle));
    return Vec2(0.9 * domain_radius, 0.0);
  }
};

json patch_checks(const HelixParams& p, const PatchSolveResult& res) {
  json checks;
  checks["converged"] = res.state.converged;
  checks["mass_conserved"] =
      std::abs(res.diag.mass - p.circulation) <= 1e-8 * p.circulation;
  const double cap = 1.0 / (p.eps * p.eps);
  bool in_box = true;
  for (double w : res.state.omega.values)
    in_box = in_box && w >= 0.0 && w <= cap * (1.0 + 1e-12);
  checks["box_constraint"] = in_box;
  bool monotone = true;
  for (std::size_t i = 1; i < res.energy_trace.size(); ++i)
    monotone = monotone &&
               res.energy_trace[i] >= res.energy_trace[i - 1] -
                                          1e-12 * std::max(1.0, std::abs(res.energy_trace[i]));
  checks["energy_monotone"] = monotone;
  const double mu_floor =
      -0.5 * p.alpha * p.log_inv_eps() * p.domain_radius * p.domain_radius;
  checks["mu_above_floor"] = res.state.mu >= mu_floor - 1e-12;
  return checks;
}

// Rebuilds the mesh a saved run was computed on; the layout is a pure
// function of (radius, rings).
DiscMesh mesh_of_run(const PatchRun& run) {
  return build_disc_mesh(run.mesh_radius, run.mesh_radius / run.rings);
}

int cmd_mesh(const fs::path& out, double radius, double h) {
  json timings, config{{"radius", radius}, {"h", h}, {"out", out.string()}};
  DiscMesh mesh;
  {
    Stopwatch t(timings, "build_ms");
    mesh = build_disc_mesh(radius, h);
  }
  fs::create_directories(out);
  {
    Stopwatch t(timings, "write_ms");
    write_mesh_csv(out, mesh);
  }

  double area_sum = 0.0;
  bool positive = true;
  for (double a : mesh.area) {
    positive = positive && a > 0.0;
    area_sum += a;
  }
  const double disc = kPi * radius * radius;
  json checks;
  checks["areas_positive"] = positive;
  // inscribed polygonal disc: deficit is O((h/R)^2), never an excess
  checks["disc_area_captured"] =
      area_sum <= disc + 1e-12 && area_sum >= disc * (1.0 - (h / radius) * (h / radius));
  json results{{"nodes", mesh.num_nodes()}, {"cells", mesh.num_cells()}, {"h", mesh.h},
               {"rings", mesh.n_rings}, {"area_sum", area_sum}};

  const bool ok = write_manifest(out, "mesh", config, checks, timings, results);
  std::cout << "mesh: " << mesh.num_nodes() << " nodes, " << mesh.num_cells()
            << " cells, h = " << mesh.h << '\n';
  report_checks(checks);
  return ok ? 0 : 1;
}

int cmd_green(const fs::path& out, double k, double rstar_domain, double h, int sources,
              std::uint64_t seed) {
  json timings, config{{"k", k}, {"rstar_domain", rstar_domain}, {"h", h},
                       {"sources", sources}, {"seed", seed}, {"out", out.string()}};
  DiscMesh mesh;
  StiffnessSystem sys;
  const CoefficientField K = CoefficientField::helical(k, rstar_domain);
  {
    Stopwatch t(timings, "assemble_ms");
    mesh = build_disc_mesh(rstar_domain, h);
    sys = assemble(mesh, K);
  }
  GreenOperator op(mesh, sys, K);
  std::vector<GreenSample> samples;
  {
    Stopwatch t(timings, "sample_ms");
    samples = sample_green_decomposition(op, K, sources, seed);
  }
  fs::create_directories(out);
  write_green_csv(out / "green_samples.csv", samples);

  bool finite = true, split_exact = true, positive = true;
  for (const GreenSample& s : samples) {
    finite = finite && std::isfinite(s.g0) && std::isfinite(s.s) && std::isfinite(s.g);
    split_exact = split_exact && std::abs(s.g - s.g0 - s.s) <= 1e-12 * std::max(1.0, std::abs(s.g));
    positive = positive && s.g > 0.0;
  }
  json checks{{"values_finite", finite},
              {"decomposition_exact", split_exact},
              {"green_positive", positive}};
  json results{{"samples", samples.size()}};

  const bool ok = write_manifest(out, "green", config, checks, timings, results);
  std::cout << "green: " << samples.size() << " samples on " << mesh.num_nodes()
            << " nodes\n";
  report_checks(checks);
  return ok ? 0 : 1;
}

int cmd_patch(const fs::path& out, const PhysicsOpts& phys, double eps, double h, int min_cells,
              const SeedOpts& seed, double tol, int max_iter) {
  // feasibility gate: rejected configs never reach the solver
  const HelixParams p = phys.make(eps);
  const Vec2 seed_point = seed.resolve(p.domain_radius);

  json timings;
  json config = phys.echo();
  config["eps"] = eps;
  config["h"] = h;
  config["min_cells"] = min_cells;
  config["seed_x"] = seed_point[0];
  config["seed_y"] = seed_point[1];
  config["tol"] = tol;
  config["max_iter"] = max_iter;
  config["out"] = out.string();

  DiscMesh mesh;
  StiffnessSystem sys;
  {
    Stopwatch t(timings, "assemble_ms");
    const double h_eff = h > 0.0 ? h : p.domain_radius / sweep_rings(p, min_cells);
    mesh = build_disc_mesh(p.domain_radius, h_eff);
    sys = assemble(mesh, CoefficientField::helical(p.pitch, p.domain_radius));
  }
  PatchProblem problem(mesh, sys, p);
  PatchSolveResult res;
  {
    Stopwatch t(timings, "solve_ms");
    res = problem.solve(seed_point, tol, max_iter, min_cells);
  }
  fs::create_directories(out);
  {
    Stopwatch t(timings, "write_ms");
    save_patch_run(out, p, mesh, res);
  }

  const json checks = patch_checks(p, res);
  const json results = diagnostics_to_json(res.diag);
  const bool ok = write_manifest(out, "patch", config, checks, timings, results);
  std::cout << "patch: eps = " << eps << ", h = " << mesh.h << ", " << res.state.iterations
            << " iterations, E = " << res.state.energy << ", centroid radius = "
            << res.diag.support_radius << '\n';
  report_checks(checks);
  return ok ? 0 : 1;
}

int cmd_sweep(const fs::path& out, const PhysicsOpts& phys, std::vector<double> eps_list,
              int min_cells, const SeedOpts& seed, double tol, int max_iter) {
  if (eps_list.empty()) fail(ErrorCode::InvalidArgument, "sweep needs at least one eps");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1]))
      fail(ErrorCode::InvalidArgument, "eps list must be strictly decreasing");
  for (double eps : eps_list) phys.make(eps);  // feasibility gate for every row

  const HelixParams base = phys.make(eps_list.front());
  const Vec2 seed_point = seed.resolve(base.domain_radius);

  json timings;
  json config = phys.echo();
  config["eps"] = eps_list;
  config["min_cells"] = min_cells;
  config["seed_x"] = seed_point[0];
  config["seed_y"] = seed_point[1];
  config["tol"] = tol;
  config["max_iter"] = max_iter;
  config["threads"] = thread_cap();
  config["out"] = out.string();

  SweepResult sweep;
  {
    Stopwatch t(timings, "sweep_ms");
    sweep = epsilon_sweep(base, eps_list, seed_point, tol, max_iter, min_cells, thread_cap());
  }
  fs::create_directories(out);
  write_sweep_csv(out / "sweep.csv", sweep);

  bool rows_ok = true;
  for (const SweepRow& r : sweep.rows) rows_ok = rows_ok && r.error.empty() && r.converged;
  json checks{{"all_rows_converged", rows_ok},
              {"fit_points_match", sweep.fits.points == static_cast<int>(sweep.rows.size())}};
  json results{{"fits", fits_to_json(sweep.fits)}};

  const bool ok = write_manifest(out, "sweep", config, checks, timings, results);
  std::cout << "sweep: " << sweep.rows.size() << " rows, energy slope "
            << sweep.fits.energy_slope << ", mu slope " << sweep.fits.mu_slope
            << ", diameter slope " << sweep.fits.diameter_slope << '\n';
  report_checks(checks);
  return ok ? 0 : 1;
}

int cmd_evolve(const fs::path& out, const fs::path& from, double T, double dt, double p_norm,
               double delta, std::uint64_t seed) {
  json timings;
  PatchRun run;
  {
    Stopwatch t(timings, "load_ms");
    run = load_patch_run(from);
  }
  json config{{"from", from.string()}, {"T", T}, {"dt", dt}, {"p", p_norm},
              {"delta", delta}, {"seed", seed}, {"out", out.string()}};

  DiscMesh mesh;
  StiffnessSystem sys;
  {
    Stopwatch t(timings, "assemble_ms");
    mesh = mesh_of_run(run);
    sys = assemble(mesh, CoefficientField::helical(run.params.pitch, run.params.domain_radius));
  }
  TransportSolver solver(mesh, sys, run.params);

  std::vector<double> omega0 = run.omega;
  if (delta > 0.0) {
    Stopwatch t(timings, "perturb_ms");
    const double cap = 1.0 / (run.params.eps * run.params.eps);
    omega0 = perturb_support_boundary(mesh, run.omega, cap, run.params.circulation, delta, seed);
  }

  TransportOptions opts;
  opts.dt = dt;
  opts.p_norm = p_norm;
  TransportRunResult result;
  {
    Stopwatch t(timings, "evolve_ms");
    result = solver.run(omega0, T, opts, &run.omega);
  }
  fs::create_directories(out);
  {
    Stopwatch t(timings, "write_ms");
    write_monitors_csv(out / "monitors.csv", result.monitors);
    write_cell_field_csv(out / "final_omega.csv", result.final_omega);
  }

  const TransportMonitors& m = result.monitors;
  const double cap = 1.0 / (run.params.eps * run.params.eps);
  double mass_drift = 0.0, min_w = 0.0, max_w = 0.0;
  for (std::size_t i = 0; i < m.t.size(); ++i) {
    mass_drift = std::max(mass_drift, std::abs(m.mass[i] - m.mass.front()));
    min_w = std::min(min_w, m.min_omega[i]);
    max_w = std::max(max_w, m.max_omega[i]);
  }
  json checks{{"mass_conserved", mass_drift <= 1e-8 * run.params.circulation},
              {"box_constraint", min_w >= -1e-12 && max_w <= cap * (1.0 + 1e-10)},
              {"horizon_reached", !m.t.empty() && m.t.back() == T}};
  json results{{"steps", result.steps},
               {"dt_min", result.dt_min},
               {"dt_max", result.dt_max},
               {"angular_rate", result.angular_rate},
               {"final_orbital_distance", m.orbital_dist.empty() ? 0.0 : m.orbital_dist.back()}};

  const bool ok = write_manifest(out, "evolve", config, checks, timings, results);
  std::cout << "evolve: " << result.steps << " steps to T = " << T << ", angular rate "
            << result.angular_rate << ", final orbital distance "
            << (m.orbital_dist.empty() ? 0.0 : m.orbital_dist.back()) << '\n';
  report_checks(checks);
  return ok ? 0 : 1;
}

int cmd_lift(const fs::path& out, const fs::path& from, int levels) {
  json timings;
  PatchRun run;
  {
    Stopwatch t(timings, "load_ms");
    run = load_patch_run(from);
  }
  json config{{"from", from.string()}, {"levels", levels}, {"out", out.string()}};

  DiscMesh mesh = mesh_of_run(run);
  std::vector<TubeSample> tube;
  {
    Stopwatch t(timings, "lift_ms");
    tube = lift_patch(mesh, run.omega, run.params, levels);
  }
  fs::create_directories(out);
  write_tube_csv(out / "tube.csv", tube);

  bool weights_positive = true, tangential = true;
  for (const TubeSample& s : tube) {
    weights_positive = weights_positive && s.w > 0.0;
    const Vec3 zeta(s.x[1], -s.x[0], run.params.pitch);
    tangential = tangential && s.v.cross(zeta).norm() <= 1e-12 * s.v.norm() * zeta.norm();
  }
  json checks{{"full_turn", static_cast<int>(tube.size()) % levels == 0},
              {"weights_positive", weights_positive},
              {"vorticity_along_symmetry", tangential}};
  json results{{"samples", tube.size()}, {"levels", levels}};

  const bool ok = write_manifest(out, "lift", config, checks, timings, results);
  std::cout << "lift: " << tube.size() << " samples over " << levels << " levels\n";
  report_checks(checks);
  return ok ? 0 : 1;
}

// Quick cross-module invariant battery; the strict quantitative gates live
// in the acceptance suite.
int cmd_verify(const fs::path& out) {
  json timings, checks;
  Stopwatch total(timings, "total_ms");

  {
    const HelixParams p = HelixParams::make(1.0, 1.0, 0.5, 1.0, 0.1);
    const double root = std::sqrt(1.25);
    checks["helical_alpha_closed_form"] =
        std::abs(p.alpha - 0.0711762543417177) <= 1e-12;
    checks["helical_core_radius"] =
        std::abs(p.c_star - std::sqrt(root / kPi)) <= 1e-12;
    const HelixParams q = HelixParams::make(1.0, 1.0, 1.0, 2.0, 0.1);
    checks["helical_drift_coefficients"] =
        std::abs(q.a1 - 1.0 / (8.0 * kPi)) <= 1e-12 &&
        std::abs(q.b1 - 1.0 / (8.0 * kPi)) <= 1e-12;
  }

  {
    const DiscMesh mesh = build_disc_mesh(1.0, 1.0 / 16.0);
    double sum = 0.0;
    bool positive = true;
    for (double a : mesh.area) {
      positive = positive && a > 0.0;
      sum += a;
    }
    checks["mesh_positive_areas"] = positive;
    checks["mesh_disc_area"] = sum <= kPi && sum >= kPi * (1.0 - mesh.h * mesh.h);
  }

  {
    Stopwatch t(timings, "poisson_ms");
    const DiscMesh mesh = build_disc_mesh(1.0, 1.0 / 32.0);
    const StiffnessSystem sys = assemble(mesh, CoefficientField::identity());
    const ScalarField u = sys.solve_dirichlet(ScalarField::cellwise(mesh, 1.0));
    double max_err = 0.0;
    for (int n = 0; n < mesh.num_nodes(); ++n) {
      const double exact = (1.0 - mesh.nodes[n].squaredNorm()) / 4.0;
      max_err = std::max(max_err, std::abs(u.values[n] - exact));
    }
    checks["poisson_oracle"] = max_err < 5e-3;
  }

  {
    Stopwatch t(timings, "green_ms");
    const DiscMesh mesh = build_disc_mesh(1.0, 1.0 / 32.0);
    const CoefficientField K = CoefficientField::identity();
    const StiffnessSystem sys = assemble(mesh, K);
    GreenOperator op(mesh, sys, K);
    const auto samples = sample_green_decomposition(op, K, 4, 7);
    double max_err = 0.0;
    for (const GreenSample& s : samples) {
      // method of images on the unit disc
      const double want =
          std::log(s.y.norm() * (s.x - s.y / s.y.squaredNorm()).norm()) / (2.0 * kPi);
      max_err = std::max(max_err, std::abs(s.s - want));
    }
    checks["green_images_oracle"] = !samples.empty() && max_err < 2e-2;
  }

  HelixParams p_patch = HelixParams::make(1.0, 1.0, 0.5, 1.0, 0.2);
  DiscMesh patch_mesh;
  StiffnessSystem patch_sys;
  PatchSolveResult patch_res;
  {
    Stopwatch t(timings, "patch_ms");
    const int rings = sweep_rings(p_patch, 20);
    patch_mesh = build_disc_mesh(p_patch.domain_radius, p_patch.domain_radius / rings);
    patch_sys = assemble(patch_mesh, CoefficientField::helical(1.0, 1.0));
    PatchProblem problem(patch_mesh, patch_sys, p_patch);
    patch_res = problem.solve(Vec2(0.9, 0.0), 1e-10, 500, 20);
    const json pc = patch_checks(p_patch, patch_res);
    for (const auto& [name, passed] : pc.items()) checks["patch_" + name] = passed;
  }

  {
    Stopwatch t(timings, "transport_ms");
    TransportSolver solver(patch_mesh, patch_sys, p_patch);
    const std::vector<double> zeros(patch_mesh.num_cells(), 0.0);
    const std::vector<Vec2> vel = solver.velocity_of(zeros);
    double vmax = 0.0;
    for (const Vec2& v : vel) vmax = std::max(vmax, v.norm());
    checks["transport_zero_field_at_rest"] = vmax <= 1e-12;

    TransportOptions opts;
    TransportRunResult r =
        solver.run(patch_res.state.omega.values, 0.01, opts, &patch_res.state.omega.values);
    const TransportMonitors& m = r.monitors;
    checks["transport_mass_conserved"] =
        std::abs(m.mass.back() - m.mass.front()) <= 1e-8 * m.mass.front();
    checks["transport_energy_conserved"] =
        std::abs(m.energy.back() - m.energy.front()) <= 1e-6 * std::abs(m.energy.front());
  }

  {
    const HelixParams p = HelixParams::make(1.0, 1.0, 0.5, 1.0, 0.1);
    checks["helix_binormal_law"] = binormal_residual(p, 0.7, 0.0) < 1e-6;
    const auto [recovered, alpha] = rotation_consistency(p);
    checks["helix_rotation_consistent"] = std::abs(recovered - alpha) <= 1e-14 * alpha;
    const HelixCurve curve{p};
    const double denom = p.pitch * p.pitch + p.target_radius * p.target_radius;
    checks["helix_curvature_torsion"] =
        std::abs(curve.curvature() - p.target_radius / denom) <= 1e-14 &&
        std::abs(curve.torsion() - p.pitch / denom) <= 1e-14;
  }

  {
    const fs::path tmp =
        fs::temp_directory_path() / ("helipatch_verify_" + std::to_string(::getpid()));
    fs::create_directories(tmp);
    bool round_trip = true;
    try {
      save_patch_run(tmp, p_patch, patch_mesh, patch_res);
      const PatchRun back = load_patch_run(tmp / "patch_diag.json");
      round_trip = back.omega == patch_res.state.omega.values &&
                   back.params.eps == p_patch.eps && back.rings == patch_mesh.n_rings;
    } catch (const Error&) {
      round_trip = false;
    }
    fs::remove_all(tmp);
    checks["io_round_trip"] = round_trip;
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23})
      round_trip = round_trip && std::strtod(format_double(v).c_str(), nullptr) == v;
    checks["io_double_format"] = round_trip;
  }

  const bool ok = write_manifest(out, "verify", json::object(), checks, timings);
  report_checks(checks);
  std::cout << (ok ? "verify: all checks passed\n" : "verify: FAILURES\n");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"helical vortex patches: Green's functions, energy maximizers, "
               "transport, and tube lifts on the reduced disc"};
  app.set_version_flag("--version", HELIPATCH_VERSION);
  app.set_config("--config", "", "flat key=value file; section [command] or command.key");
  app.require_subcommand(0, 1);
  // several subcommands take a --h mesh size, so help is long-form only
  app.set_help_flag("--help", "print this help message and exit");

  std::string out_str = ".";
  app.add_option("-o,--out", out_str, "output directory")->capture_default_str();

  int status = 0;
  std::string active = "none";

  // mesh
  auto* mesh_cmd = app.add_subcommand("mesh", "triangulate the disc and dump it as CSV");
  double mesh_radius = 1.0, mesh_h = 0.0;
  mesh_cmd->add_option("--radius", mesh_radius, "disc radius")
      ->check(CLI::PositiveNumber)->capture_default_str();
  mesh_cmd->add_option("--h", mesh_h, "target mesh size")->required()
      ->check(CLI::PositiveNumber);
  mesh_cmd->callback([&] {
    active = "mesh";
    status = cmd_mesh(out_str, mesh_radius, mesh_h);
  });

  // green
  auto* green_cmd = app.add_subcommand("green", "tabulate the Green's function decomposition");
  double green_k = 1.0, green_R = 1.0, green_h = 1.0 / 32.0;
  int green_sources = 8;
  std::uint64_t green_seed = 1;
  green_cmd->add_option("--k", green_k, "helical pitch parameter")
      ->check(CLI::PositiveNumber)->capture_default_str();
  green_cmd->add_option("--rstar-domain", green_R, "disc radius")
      ->check(CLI::PositiveNumber)->capture_default_str();
  green_cmd->add_option("--h", green_h, "mesh size")
      ->check(CLI::PositiveNumber)->capture_default_str();
  green_cmd->add_option("--sources", green_sources, "number of source nodes")
      ->check(CLI::PositiveNumber)->capture_default_str();
  green_cmd->add_option("--seed", green_seed, "sampling seed")->capture_default_str();
  green_cmd->callback([&] {
    active = "green";
    status = cmd_green(out_str, green_k, green_R, green_h, green_sources, green_seed);
  });

  // patch
  auto* patch_cmd = app.add_subcommand("patch", "solve the rotating-patch energy maximizer");
  PhysicsOpts patch_phys;
  patch_phys.attach(patch_cmd);
  SeedOpts patch_seed;
  patch_seed.attach(patch_cmd);
  double patch_eps = 0.1, patch_h = 0.0, patch_tol = 1e-10;
  int patch_min_cells = 20, patch_max_iter = 500;
  patch_cmd->add_option("--eps", patch_eps, "concentration parameter")
      ->check(CLI::PositiveNumber)->capture_default_str();
  patch_cmd->add_option("--h", patch_h, "mesh size (0 picks it from --min-cells)")
      ->capture_default_str();
  patch_cmd->add_option("--min-cells", patch_min_cells, "minimum cells across the support")
      ->check(CLI::PositiveNumber)->capture_default_str();
  patch_cmd->add_option("--tol", patch_tol, "relative energy tolerance")
      ->check(CLI::PositiveNumber)->capture_default_str();
  patch_cmd->add_option("--max-iter", patch_max_iter, "iteration cap")
      ->check(CLI::PositiveNumber)->capture_default_str();
  patch_cmd->callback([&] {
    active = "patch";
    status = cmd_patch(out_str, patch_phys, patch_eps, patch_h, patch_min_cells, patch_seed,
                       patch_tol, patch_max_iter);
  });

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "patch solves across an eps list, with fits");
  PhysicsOpts sweep_phys;
  sweep_phys.attach(sweep_cmd);
  SeedOpts sweep_seed;
  sweep_seed.attach(sweep_cmd);
  std::vector<double> sweep_eps{0.2, 0.1, 0.05};
  double sweep_tol = 1e-10;
  int sweep_min_cells = 20, sweep_max_iter = 500;
  sweep_cmd->add_option("--eps", sweep_eps, "decreasing eps values")
      ->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--min-cells", sweep_min_cells, "minimum cells across each support")
      ->check(CLI::PositiveNumber)->capture_default_str();
  sweep_cmd->add_option("--tol", sweep_tol, "relative energy tolerance")
      ->check(CLI::PositiveNumber)->capture_default_str();
  sweep_cmd->add_option("--max-iter", sweep_max_iter, "iteration cap")
      ->check(CLI::PositiveNumber)->capture_default_str();
  sweep_cmd->callback([&] {
    active = "sweep";
    status = cmd_sweep(out_str, sweep_phys, sweep_eps, sweep_min_cells, sweep_seed, sweep_tol,
                       sweep_max_iter);
  });

  // evolve
  auto* evolve_cmd = app.add_subcommand("evolve", "transport a saved profile in its own field");
  std::string evolve_from;
  double evolve_T = 0.0, evolve_dt = 0.0, evolve_p = 2.0, evolve_delta = 0.0;
  std::uint64_t evolve_seed = 1;
  evolve_cmd->add_option("--from", evolve_from, "patch_diag.json of a saved run")
      ->required()->check(CLI::ExistingFile);
  evolve_cmd->add_option("--T", evolve_T, "time horizon")->required()
      ->check(CLI::PositiveNumber);
  evolve_cmd->add_option("--dt", evolve_dt, "time step (0 = auto from the CFL rule)")
      ->capture_default_str();
  evolve_cmd->add_option("--p", evolve_p, "norm exponent for the orbital distance")
      ->check(CLI::PositiveNumber)->capture_default_str();
  evolve_cmd->add_option("--delta", evolve_delta, "support-boundary perturbation amplitude")
      ->capture_default_str();
  evolve_cmd->add_option("--seed", evolve_seed, "perturbation seed")->capture_default_str();
  evolve_cmd->callback([&] {
    active = "evolve";
    status = cmd_evolve(out_str, evolve_from, evolve_T, evolve_dt, evolve_p, evolve_delta,
                        evolve_seed);
  });

  // lift
  auto* lift_cmd = app.add_subcommand("lift", "sweep a saved profile into a helical tube");
  std::string lift_from;
  int lift_levels = 64;
  lift_cmd->add_option("--from", lift_from, "patch_diag.json of a saved run")
      ->required()->check(CLI::ExistingFile);
  lift_cmd->add_option("--levels", lift_levels, "group angles over one full turn")
      ->check(CLI::PositiveNumber)->capture_default_str();
  lift_cmd->callback([&] {
    active = "lift";
    status = cmd_lift(out_str, lift_from, lift_levels);
  });

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "run the cross-module invariant battery");
  verify_cmd->callback([&] {
    active = "verify";
    status = cmd_verify(out_str);
  });

  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
    sub->set_help_flag("--help", "print this help message and exit");

  if (argc < 2) {
    std::cout << app.help();
    return 2;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const Error& e) {
    std::cerr << "error command=" << active << " code=" << to_string(e.code()) << " message=\""
              << e.what() << "\"\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error command=" << active << " code=Unknown message=\"" << e.what() << "\"\n";
    return 1;
  }

  if (app.get_subcommands().empty()) {
    std::cout << app.help();
    return 2;
  }
  return status;
}
