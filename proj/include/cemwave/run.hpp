#pragma once

// Run orchestration for the three modes. Every run owns its output directory:
//
//   config.ini      the configuration as parsed (defaults filled in)
//   manifest.json   configuration, tolerances, versions and artifact list
//   snapshots/      <solver>_<step>.vtk every snapshot_stride steps
//   eigenvalues.csv per-block spectra (multiscale)
//   errors.csv      multiscale vs fine reference at the final time (multiscale)
//   study.csv, study.md  (study)

#include "cemwave/analysis.hpp"
#include "cemwave/config.hpp"
#include "cemwave/io.hpp"
#include "cemwave/simulation.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace cemwave {

/// Output directory with the CEMWAVE_OUTPUT_ROOT prefix applied to relative paths.
inline std::filesystem::path resolve_output_directory(const SimulationConfig& cfg) {
  std::filesystem::path dir(cfg.output_directory);
  if (dir.is_relative()) {
    if (const char* root = std::getenv("CEMWAVE_OUTPUT_ROOT"); root && *root) dir = std::filesystem::path(root) / dir;
  }
  return dir;
}

struct RunSummary {
  std::filesystem::path directory;
  std::vector<std::string> artifacts;  // relative to directory
  std::optional<ErrorReport> errors;
  std::optional<StudyTable> study;
};

namespace detail {

class OutputDirectory {
public:
  explicit OutputDirectory(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw InputError("output.directory: cannot create " + dir_.string() + ": " + ec.message());
  }

  std::filesystem::path path(const std::string& name) {
    artifacts_.push_back(name);
    const auto p = dir_ / name;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    return p;
  }

  std::ofstream open(const std::string& name) {
    const auto p = path(name);
    std::ofstream out(p);
    if (!out) throw InputError("cannot write " + p.string());
    return out;
  }

  const std::filesystem::path& dir() const { return dir_; }
  const std::vector<std::string>& artifacts() const { return artifacts_; }

private:
  std::filesystem::path dir_;
  std::vector<std::string> artifacts_;
};

inline std::string step_name(const std::string& prefix, long step) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snapshots/%s_%07ld.vtk", prefix.c_str(), step);
  return buf;
}

inline SnapshotHook snapshot_hook(OutputDirectory& out, const MeshHierarchy& mesh, const DirichletMap& dofs,
                                  const std::string& prefix) {
  return [&out, &mesh, &dofs, prefix](long step, double, const Vector& free) {
    write_snapshot(dofs.prolong(free), mesh, out.path(step_name(prefix, step)));
  };
}

inline void write_errors_csv(const ErrorReport& e, std::ostream& out) {
  StudyTable t;
  t.rows.push_back({{e.meta.coarse_n, e.meta.oversampling, e.meta.nbf}, e});
  write_table_csv(t, out);
}

}  // namespace detail

inline StudySpec study_spec(const SimulationConfig& cfg) {
  StudySpec spec;
  spec.extent = cfg.extent_x;
  spec.fine_cells = cfg.study_fine_cells;
  spec.fine_per_coarse = cfg.fine_per_coarse;
  spec.media = [cfg](const MeshHierarchy& mesh) { return make_media(cfg, mesh); };
  spec.dg = cfg.dg();
  spec.mass = cfg.mass;
  spec.source = cfg.source;
  spec.time = cfg.time();
  spec.time.snapshot_stride = 0;
  spec.levels = cfg.study_levels;
  return spec;
}

/// Execute the configured pipeline and write its artifacts.
inline RunSummary run(const SimulationConfig& cfg, std::ostream* log = nullptr) {
  validate(cfg);
  detail::OutputDirectory out(resolve_output_directory(cfg));
  RunSummary summary;
  summary.directory = out.dir();
  auto note = [&](const std::string& s) {
    if (log) *log << s << '\n';
  };

  out.open("config.ini") << serialize_config(cfg);

  if (cfg.mode == RunMode::study) {
    note("study: " + std::to_string(cfg.study_levels.size()) + " levels");
    const StudyTable table = convergence_study(study_spec(cfg));
    {
      auto csv = out.open("study.csv");
      write_table_csv(table, csv);
    }
    {
      auto md = out.open("study.md");
      write_table_markdown(table, md);
    }
    summary.study = table;
  } else {
    const MeshHierarchy mesh(cfg.extent_x, cfg.extent_y, cfg.coarse_n, cfg.fine_per_coarse);
    const MediaField media = make_media(cfg, mesh);
    const FineSystem fine = assemble_fine_system(mesh, media, cfg.dg(), cfg.mass);

    RunOptions opt;
    opt.time = cfg.time();
    opt.source = cfg.source;

    note("fine reference: " + std::to_string(fine.dofs.num_free()) + " free DOFs");
    opt.hook = detail::snapshot_hook(out, mesh, fine.dofs, "fine");
    const RunResult reference = run_fine(mesh, fine, opt);

    if (cfg.mode == RunMode::multiscale) {
      const int r = cfg.oversampling();
      const MultiscaleModel model = build_multiscale(mesh, media, fine, cfg.nbf, r);
      note("multiscale: " + std::to_string(model.cem.size()) + " basis functions, r = " + std::to_string(r));
      {
        auto eig = out.open("eigenvalues.csv");
        write_eigenvalues_csv(model.aux, eig);
      }
      opt.hook = detail::snapshot_hook(out, mesh, fine.dofs, "multiscale");
      const RunResult coarse = run_multiscale(mesh, fine, model, opt);
      RunMetadata meta{cfg.coarse_n, cfg.fine_per_coarse, mesh.H(),  mesh.h(),         r, cfg.nbf,
                       cfg.gamma,    cfg.tau,             cfg.final_time, cfg.extent_x};
      const ErrorReport errors =
          relative_errors(fine.dofs.prolong(coarse.final_field), fine.dofs.prolong(reference.final_field),
                          ErrorNorms::build(mesh, media, cfg.dg()), meta);
      {
        auto csv = out.open("errors.csv");
        detail::write_errors_csv(errors, csv);
      }
      summary.errors = errors;
    }
  }

  std::vector<std::string> artifacts = out.artifacts();
  artifacts.push_back("manifest.json");
  Tolerances tol;
  tol.cfl_safety = cfg.cfl_safety;
  out.open("manifest.json") << make_manifest(cfg, tol, artifacts).dump(2) << '\n';
  summary.artifacts = out.artifacts();
  return summary;
}

}  // namespace cemwave
