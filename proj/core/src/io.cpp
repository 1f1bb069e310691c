#include "helipatch/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "helipatch/errors.hpp"

namespace helipatch {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IOFailure, "cannot open " + path.string() + " for writing");
  out << content;
  if (!out) fail(ErrorCode::IOFailure, "write failed for " + path.string());
}

void write_mesh_csv(const fs::path& dir, const DiscMesh& mesh) {
  std::ostringstream nodes;
  nodes << "id,x,y,boundary\n";
  for (int i = 0; i < mesh.num_nodes(); ++i)
    nodes << i << ',' << format_double(mesh.nodes[i][0]) << ','
          << format_double(mesh.nodes[i][1]) << ',' << (mesh.on_boundary[i] ? 1 : 0) << '\n';
  write_text_file(dir / "nodes.csv", nodes.str());

  std::ostringstream tris;
  tris << "id,n0,n1,n2,area\n";
  for (int t = 0; t < mesh.num_cells(); ++t)
    tris << t << ',' << mesh.tris[t][0] << ',' << mesh.tris[t][1] << ',' << mesh.tris[t][2]
         << ',' << format_double(mesh.area[t]) << '\n';
  write_text_file(dir / "tris.csv", tris.str());
}

void write_cell_field_csv(const fs::path& path, const std::vector<double>& values) {
  std::ostringstream out;
  out << "id,omega\n";
  for (std::size_t t = 0; t < values.size(); ++t)
    out << t << ',' << format_double(values[t]) << '\n';
  write_text_file(path, out.str());
}

std::vector<double> read_cell_field_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IOFailure, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("id,omega", 0) != 0)
    fail(ErrorCode::IOFailure, "unexpected header in " + path.string());
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail(ErrorCode::IOFailure, "bad row in " + path.string());
    values.push_back(std::stod(line.substr(comma + 1)));
  }
  return values;
}

void write_green_csv(const fs::path& path, const std::vector<GreenSample>& samples) {
  std::ostringstream out;
  out << "xi,yi,xj,yj,g0,s,g\n";
  for (const GreenSample& smp : samples)
    out << format_double(smp.x[0]) << ',' << format_double(smp.x[1]) << ','
        << format_double(smp.y[0]) << ',' << format_double(smp.y[1]) << ','
        << format_double(smp.g0) << ',' << format_double(smp.s) << ','
        << format_double(smp.g) << '\n';
  write_text_file(path, out.str());
}

void write_sweep_csv(const fs::path& path, const SweepResult& sweep) {
  std::ostringstream out;
  out << "eps,h,energy,mu,support_radius,diameter,moment_inertia,sm_trace,sm_eig_ratio,"
         "active_cells,converged,error\n";
  for (const SweepRow& r : sweep.rows) {
    std::string error = r.error;
    for (char& c : error)
      if (c == ',' || c == '\n') c = ';';
    out << format_double(r.eps) << ',' << format_double(r.h) << ',' << format_double(r.energy)
        << ',' << format_double(r.mu) << ',' << format_double(r.support_radius) << ','
        << format_double(r.diameter) << ',' << format_double(r.moment_inertia) << ','
        << format_double(r.sm_trace) << ',' << format_double(r.sm_eig_ratio) << ','
        << r.active_cells << ',' << (r.converged ? 1 : 0) << ',' << error << '\n';
  }
  write_text_file(path, out.str());
}

void write_monitors_csv(const fs::path& path, const TransportMonitors& m) {
  std::ostringstream out;
  out << "t,E,I,mass,min,max,centroid_x,centroid_y,orbital_dist\n";
  for (std::size_t i = 0; i < m.t.size(); ++i)
    out << format_double(m.t[i]) << ',' << format_double(m.energy[i]) << ','
        << format_double(m.inertia[i]) << ',' << format_double(m.mass[i]) << ','
        << format_double(m.min_omega[i]) << ',' << format_double(m.max_omega[i]) << ','
        << format_double(m.centroid_x[i]) << ',' << format_double(m.centroid_y[i]) << ','
        << format_double(m.orbital_dist[i]) << '\n';
  write_text_file(path, out.str());
}

void write_tube_csv(const fs::path& path, const std::vector<TubeSample>& tube) {
  std::ostringstream out;
  out << "x1,x2,x3,w,v1,v2,v3,dist_to_helix\n";
  for (const TubeSample& s : tube)
    out << format_double(s.x[0]) << ',' << format_double(s.x[1]) << ','
        << format_double(s.x[2]) << ',' << format_double(s.w) << ',' << format_double(s.v[0])
        << ',' << format_double(s.v[1]) << ',' << format_double(s.v[2]) << ','
        << format_double(s.dist_to_helix) << '\n';
  write_text_file(path, out.str());
}

json params_to_json(const HelixParams& p) {
  return json{{"pitch", p.pitch},
              {"circulation", p.circulation},
              {"target_radius", p.target_radius},
              {"domain_radius", p.domain_radius},
              {"eps", p.eps},
              {"alpha", p.alpha},
              {"a1", p.a1},
              {"b1", p.b1},
              {"c_star", p.c_star}};
}

HelixParams params_from_json(const json& j) {
  return HelixParams::make(j.at("pitch").get<double>(), j.at("circulation").get<double>(),
                           j.at("target_radius").get<double>(),
                           j.at("domain_radius").get<double>(), j.at("eps").get<double>());
}

json diagnostics_to_json(const PatchDiagnostics& d) {
  return json{{"centroid", {d.centroid[0], d.centroid[1]}},
              {"support_radius", d.support_radius},
              {"diameter", d.diameter},
              {"second_moment",
               {{d.second_moment(0, 0), d.second_moment(0, 1)},
                {d.second_moment(1, 0), d.second_moment(1, 1)}}},
              {"moment_inertia", d.moment_inertia},
              {"mass", d.mass},
              {"energy", d.energy},
              {"mu", d.mu},
              {"active_cells", d.active_cells}};
}

json fits_to_json(const SweepFits& f) {
  return json{{"points", f.points},
              {"energy_slope", f.energy_slope},
              {"energy_intercept", f.energy_intercept},
              {"mu_slope", f.mu_slope},
              {"mu_intercept", f.mu_intercept},
              {"diameter_slope", f.diameter_slope},
              {"diameter_intercept", f.diameter_intercept}};
}

json save_patch_run(const fs::path& dir, const HelixParams& params, const DiscMesh& mesh,
                    const PatchSolveResult& result) {
  write_cell_field_csv(dir / "patch_omega.csv", result.state.omega.values);

  json j;
  j["kind"] = "patch_diag";
  j["params"] = params_to_json(params);
  j["mesh"] = json{{"radius", mesh.radius},
                   {"rings", mesh.n_rings},
                   {"h", mesh.h},
                   {"nodes", mesh.num_nodes()},
                   {"cells", mesh.num_cells()}};
  j["converged"] = result.state.converged;
  j["iterations"] = result.state.iterations;
  j["diagnostics"] = diagnostics_to_json(result.diag);
  j["energy_trace"] = result.energy_trace;
  j["mu_trace"] = result.mu_trace;
  j["omega_file"] = "patch_omega.csv";
  write_text_file(dir / "patch_diag.json", j.dump(2) + "\n");
  return j;
}

PatchRun load_patch_run(const fs::path& diag_path) {
  std::ifstream in(diag_path);
  if (!in) fail(ErrorCode::IOFailure, "cannot open " + diag_path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& e) {
    fail(ErrorCode::IOFailure, "cannot parse " + diag_path.string() + ": " + e.what());
  }
  if (j.value("kind", "") != "patch_diag")
    fail(ErrorCode::IOFailure, diag_path.string() + " is not a patch diagnostics file");

  PatchRun run;
  run.params = params_from_json(j.at("params"));
  run.rings = j.at("mesh").at("rings").get<int>();
  run.mesh_radius = j.at("mesh").at("radius").get<double>();
  run.converged = j.value("converged", false);
  run.iterations = j.value("iterations", 0);

  const json& d = j.at("diagnostics");
  run.diag.centroid = Vec2(d.at("centroid")[0].get<double>(), d.at("centroid")[1].get<double>());
  run.diag.support_radius = d.at("support_radius").get<double>();
  run.diag.diameter = d.at("diameter").get<double>();
  run.diag.moment_inertia = d.at("moment_inertia").get<double>();
  run.diag.mass = d.at("mass").get<double>();
  run.diag.energy = d.at("energy").get<double>();
  run.diag.mu = d.at("mu").get<double>();
  run.diag.active_cells = d.at("active_cells").get<int>();
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      run.diag.second_moment(r, c) = d.at("second_moment")[r][c].get<double>();

  const fs::path omega_path = diag_path.parent_path() / j.at("omega_file").get<std::string>();
  run.omega = read_cell_field_csv(omega_path);
  return run;
}

}  // namespace helipatch
