#pragma once

#include <filesystem>
#include <string>

#include "helipatch/green.hpp"
#include "helipatch/helix.hpp"
#include "helipatch/patch.hpp"
#include "helipatch/transport.hpp"

#include "json.hpp"

namespace helipatch {

using json = nlohmann::ordered_json;

// Shortest round-trippable decimal representation; all CSV and JSON output
// uses it so that identical runs produce byte-identical files.
std::string format_double(double v);

void write_text_file(const std::filesystem::path& path, const std::string& content);

void write_mesh_csv(const std::filesystem::path& dir, const DiscMesh& mesh);
void write_cell_field_csv(const std::filesystem::path& path, const std::vector<double>& values);
std::vector<double> read_cell_field_csv(const std::filesystem::path& path);
void write_green_csv(const std::filesystem::path& path, const std::vector<GreenSample>& samples);
void write_sweep_csv(const std::filesystem::path& path, const SweepResult& sweep);
void write_monitors_csv(const std::filesystem::path& path, const TransportMonitors& m);
void write_tube_csv(const std::filesystem::path& path, const std::vector<TubeSample>& tube);

json params_to_json(const HelixParams& p);
HelixParams params_from_json(const json& j);
json diagnostics_to_json(const PatchDiagnostics& d);
json fits_to_json(const SweepFits& f);

// Bundle that lets downstream commands rebuild the exact planar problem.
struct PatchRun {
  HelixParams params;
  int rings = 0;
  double mesh_radius = 0.0;
  std::vector<double> omega;
  PatchDiagnostics diag;
  bool converged = false;
  int iterations = 0;
};

// Writes patch_omega.csv and patch_diag.json into dir.
json save_patch_run(const std::filesystem::path& dir, const HelixParams& params,
                    const DiscMesh& mesh, const PatchSolveResult& result);

// Loads a run from a patch_diag.json path (omega file resolved next to it).
PatchRun load_patch_run(const std::filesystem::path& diag_path);

}  // namespace helipatch
