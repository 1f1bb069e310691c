#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cfloat>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "helipatch/errors.hpp"
#include "helipatch/fem.hpp"
#include "helipatch/io.hpp"
#include "helipatch/mesh.hpp"
#include "helipatch/patch.hpp"

using namespace helipatch;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("helipatch_io_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("io: format_double round-trips through strtod") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -0.0, 0.0, DBL_MAX, DBL_MIN, -2.5,
                   6.02214076e23, 1.0 + DBL_EPSILON}) {
    const std::string s = format_double(v);
    char* end = nullptr;
    const double back = std::strtod(s.c_str(), &end);
    CHECK(*end == '\0');
    CHECK(back == v);
    CHECK(std::signbit(back) == std::signbit(v));
  }
  CHECK(format_double(-0.0) == "-0");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("io: cell field csv round-trips bitwise") {
  TempDir tmp;
  const fs::path file = tmp.path / "field.csv";
  const std::vector<double> values{0.0, 0.1, -3.5e-12, 1.0 / 7.0, 1e300, -0.0};
  write_cell_field_csv(file, values);
  const std::vector<double> back = read_cell_field_csv(file);
  REQUIRE(back.size() == values.size());
  for (std::size_t i = 0; i < values.size(); ++i) CHECK(back[i] == values[i]);

  // identical content on rewrite
  const std::string first = slurp(file);
  write_cell_field_csv(file, values);
  CHECK(slurp(file) == first);
  CHECK(first.rfind("id,omega\n", 0) == 0);
}

TEST_CASE("io: cell field reader rejects missing and malformed files") {
  TempDir tmp;
  CHECK_THROWS_AS(read_cell_field_csv(tmp.path / "absent.csv"), Error);
  const fs::path bad = tmp.path / "bad.csv";
  write_text_file(bad, "wrong,header\n0,1\n");
  CHECK_THROWS_AS(read_cell_field_csv(bad), Error);
  try {
    read_cell_field_csv(bad);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IOFailure);
  }
}

TEST_CASE("io: params serialize and rebuild identically") {
  const HelixParams p = HelixParams::make(0.7, 2.0, 1.3, 2.0, 0.05);
  const json j = params_to_json(p);
  const HelixParams q = params_from_json(j);
  CHECK(q.pitch == p.pitch);
  CHECK(q.circulation == p.circulation);
  CHECK(q.target_radius == p.target_radius);
  CHECK(q.domain_radius == p.domain_radius);
  CHECK(q.eps == p.eps);
  CHECK(q.alpha == p.alpha);
  CHECK(q.a1 == p.a1);
  CHECK(q.b1 == p.b1);
  CHECK(q.c_star == p.c_star);
  // derived values are recorded for readers of the file
  CHECK(j.at("alpha").get<double>() == p.alpha);
}

TEST_CASE("io: patch run save and load round-trip") {
  const HelixParams p = HelixParams::make(1.0, 1.0, 0.5, 1.0, 0.1);
  DiscMesh mesh = build_disc_mesh(1.0, 1.0 / sweep_rings(p, 20));
  StiffnessSystem sys = assemble(mesh, CoefficientField::helical(1.0, 1.0));
  PatchProblem prob(mesh, sys, p);
  PatchSolveResult res = prob.solve(Vec2(0.5, 0.0));
  REQUIRE(res.state.converged);

  TempDir tmp;
  const json saved = save_patch_run(tmp.path, p, mesh, res);
  CHECK(saved.at("kind") == "patch_diag");
  CHECK(fs::exists(tmp.path / "patch_omega.csv"));

  const PatchRun run = load_patch_run(tmp.path / "patch_diag.json");
  CHECK(run.params.eps == p.eps);
  CHECK(run.params.alpha == p.alpha);
  CHECK(run.rings == mesh.n_rings);
  CHECK(run.mesh_radius == mesh.radius);
  CHECK(run.converged == res.state.converged);
  CHECK(run.iterations == res.state.iterations);
  CHECK(run.diag.mass == res.diag.mass);
  CHECK(run.diag.energy == res.diag.energy);
  CHECK(run.diag.mu == res.diag.mu);
  CHECK(run.diag.active_cells == res.diag.active_cells);
  CHECK(run.diag.centroid.x() == res.diag.centroid.x());
  CHECK(run.diag.centroid.y() == res.diag.centroid.y());
  CHECK((run.diag.second_moment - res.diag.second_moment).norm() == 0.0);
  REQUIRE(run.omega.size() == res.state.omega.values.size());
  for (std::size_t i = 0; i < run.omega.size(); ++i)
    CHECK(run.omega[i] == res.state.omega.values[i]);

  // the rebuilt mesh matches the recorded one
  DiscMesh again = build_disc_mesh(run.mesh_radius, run.mesh_radius / run.rings);
  CHECK(again.num_cells() == mesh.num_cells());
  CHECK(again.h == mesh.h);

  SUBCASE("other json files are rejected") {
    const fs::path other = tmp.path / "other.json";
    write_text_file(other, "{\"kind\":\"something_else\"}\n");
    CHECK_THROWS_AS(load_patch_run(other), Error);
    const fs::path broken = tmp.path / "broken.json";
    write_text_file(broken, "{not json");
    CHECK_THROWS_AS(load_patch_run(broken), Error);
  }
}

TEST_CASE("io: sweep csv keeps one comma-separated row per record") {
  SweepResult sweep;
  SweepRow a;
  a.eps = 0.1;
  a.h = 0.02;
  a.energy = 0.25;
  a.converged = true;
  SweepRow b;
  b.eps = 0.05;
  b.error = "solver diverged, badly\nvery badly";
  sweep.rows = {a, b};

  TempDir tmp;
  const fs::path file = tmp.path / "sweep.csv";
  write_sweep_csv(file, sweep);

  std::ifstream in(file);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 11);
    ++rows;
  }
  CHECK(rows == 3);  // header + 2 records
}

TEST_CASE("io: monitor, green, tube and mesh writers emit consistent tables") {
  TempDir tmp;

  TransportMonitors m;
  m.t = {0.0, 0.5};
  m.energy = {1.0, 1.0};
  m.inertia = {0.2, 0.2};
  m.mass = {1.0, 1.0};
  m.min_omega = {0.0, 0.0};
  m.max_omega = {100.0, 100.0};
  m.centroid_x = {0.5, 0.49};
  m.centroid_y = {0.0, 0.01};
  m.orbital_dist = {0.0, 0.1};
  m.level_area = {0.01, 0.01};
  write_monitors_csv(tmp.path / "monitors.csv", m);
  const std::string mon = slurp(tmp.path / "monitors.csv");
  CHECK(mon.rfind("t,E,I,mass,min,max,centroid_x,centroid_y,orbital_dist\n", 0) == 0);
  CHECK(std::count(mon.begin(), mon.end(), '\n') == 3);

  GreenSample g;
  g.x = Vec2(0.1, 0.2);
  g.y = Vec2(-0.3, 0.0);
  g.g0 = 0.17;
  g.s = -0.02;
  g.g = 0.15;
  write_green_csv(tmp.path / "green.csv", {g});
  const std::string gr = slurp(tmp.path / "green.csv");
  CHECK(gr.rfind("xi,yi,xj,yj,g0,s,g\n", 0) == 0);
  CHECK(std::count(gr.begin(), gr.end(), '\n') == 2);

  TubeSample t;
  t.x = Vec3(0.5, 0.0, 0.1);
  t.w = 100.0;
  t.v = Vec3(0.0, -50.0, 100.0);
  t.dist_to_helix = 0.01;
  write_tube_csv(tmp.path / "tube.csv", {t, t});
  const std::string tb = slurp(tmp.path / "tube.csv");
  CHECK(tb.rfind("x1,x2,x3,w,v1,v2,v3,dist_to_helix\n", 0) == 0);
  CHECK(std::count(tb.begin(), tb.end(), '\n') == 3);

  DiscMesh mesh = build_disc_mesh(1.0, 0.2);
  write_mesh_csv(tmp.path, mesh);
  const std::string nodes = slurp(tmp.path / "nodes.csv");
  const std::string tris = slurp(tmp.path / "tris.csv");
  CHECK(nodes.rfind("id,x,y,boundary\n", 0) == 0);
  CHECK(tris.rfind("id,n0,n1,n2,area\n", 0) == 0);
  CHECK(std::count(nodes.begin(), nodes.end(), '\n') ==
        static_cast<long>(mesh.num_nodes()) + 1);
  CHECK(std::count(tris.begin(), tris.end(), '\n') ==
        static_cast<long>(mesh.num_cells()) + 1);
}

TEST_CASE("io: write_text_file reports unwritable targets") {
  CHECK_THROWS_AS(write_text_file("/nonexistent_dir_xyz/file.txt", "x"), Error);
}
