#pragma once

// Snapshot files (legacy VTK structured grid, ASCII) and the run manifest.
//
// Interface nodes exist once per adjacent block in the DG field; the snapshot
// writes the value held by the lowest-numbered block (block id = by * n + bx).

#include "cemwave/common.hpp"
#include "cemwave/config.hpp"
#include "cemwave/mesh.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace cemwave {

inline constexpr const char* version_string = "0.1.0";

/// Block that owns a global grid line index g (0..n*nf) along one axis.
inline int owning_block_coordinate(int g, int nf, int n) {
  if (g > 0 && g % nf == 0) return g / nf - 1;
  return std::min(g / nf, n - 1);
}

/// Write a full-DOF field as a point grid of (n*nf + 1)^2 nodes.
inline void write_snapshot(const Vector& field, const MeshHierarchy& mesh, const std::filesystem::path& path,
                           const std::string& title = "cemwave displacement") {
  require(field.size() == mesh.num_dofs(), "snapshot field length does not match the fine DOFs");
  std::ofstream out(path);
  if (!out) throw InputError("cannot write snapshot " + path.string());
  const int n = mesh.coarse_n();
  const int nf = mesh.fine_per_coarse();
  const int np = n * nf + 1;
  const double h = mesh.h();
  char buf[96];
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_GRID\n";
  out << "DIMENSIONS " << np << ' ' << np << " 1\n";
  out << "POINTS " << static_cast<long>(np) * np << " double\n";
  for (int gy = 0; gy < np; ++gy)
    for (int gx = 0; gx < np; ++gx) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", gx * h, gy * h);
      out << buf;
    }
  out << "POINT_DATA " << static_cast<long>(np) * np << '\n';
  for (int comp = 0; comp < 2; ++comp) {
    out << "SCALARS " << (comp == 0 ? "ux" : "uy") << " double 1\nLOOKUP_TABLE default\n";
    for (int gy = 0; gy < np; ++gy) {
      const int by = owning_block_coordinate(gy, nf, n);
      for (int gx = 0; gx < np; ++gx) {
        const int bx = owning_block_coordinate(gx, nf, n);
        const int block = mesh.block_id(bx, by);
        const int node = mesh.local_node(gx - bx * nf, gy - by * nf);
        std::snprintf(buf, sizeof buf, "%.17g\n", field(mesh.dof(block, node, comp)));
        out << buf;
      }
    }
  }
  if (!out) throw InputError("failed while writing snapshot " + path.string());
}

struct Snapshot {
  int nx = 0;
  int ny = 0;
  std::vector<double> x, y;
  std::vector<double> ux, uy;
};

/// Reader for files produced by write_snapshot.
inline Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read snapshot " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("# vtk DataFile", 0) != 0) throw InputError("not a legacy VTK file: " + path.string());
  std::getline(in, line);  // title
  std::string word;
  in >> word;
  if (word != "ASCII") throw InputError("only ASCII VTK is supported");
  in >> word >> word;
  if (word != "STRUCTURED_GRID") throw InputError("expected a STRUCTURED_GRID dataset");
  Snapshot s;
  int nz = 0;
  in >> word >> s.nx >> s.ny >> nz;
  long count = 0;
  in >> word >> count >> word;
  s.x.resize(static_cast<std::size_t>(count));
  s.y.resize(static_cast<std::size_t>(count));
  double z = 0.0;
  for (long k = 0; k < count; ++k) in >> s.x[static_cast<std::size_t>(k)] >> s.y[static_cast<std::size_t>(k)] >> z;
  in >> word >> count;
  while (in >> word) {
    if (word != "SCALARS") throw InputError("unexpected token '" + word + "' in snapshot");
    std::string name, type, table, def;
    int ncomp = 0;
    in >> name >> type >> ncomp >> table >> def;
    std::vector<double>& target = name == "ux" ? s.ux : s.uy;
    target.resize(static_cast<std::size_t>(count));
    for (long k = 0; k < count; ++k) in >> target[static_cast<std::size_t>(k)];
  }
  if (s.ux.size() != s.x.size() || s.uy.size() != s.x.size()) throw InputError("snapshot is missing ux or uy");
  return s;
}

// ---------------------------------------------------------------------------
// Manifest

struct Tolerances {
  double eigen_residual = 1e-9;
  double saddle_residual = 1e-10;
  double mass_identity = 1e-9;
  double power_iteration = 1e-6;
  double cfl_safety = 0.9;
};

inline nlohmann::ordered_json make_manifest(const SimulationConfig& cfg, const Tolerances& tol,
                                           const std::vector<std::string>& artifacts) {
  nlohmann::ordered_json m;
  m["cemwave_version"] = version_string;
  m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                       std::to_string(EIGEN_MINOR_VERSION);
#if defined(__VERSION__)
  m["compiler"] = __VERSION__;
#endif
  nlohmann::ordered_json c;
  for (const auto& [key, value] : config_entries(cfg)) c[key] = value;
  m["config"] = c;
  m["config_ini"] = serialize_config(cfg);
  m["derived"] = {{"oversampling", cfg.oversampling()},
                  {"H", cfg.extent_x / cfg.coarse_n},
                  {"h", cfg.extent_x / (cfg.coarse_n * cfg.fine_per_coarse)}};
  m["tolerances"] = {{"eigen_residual", tol.eigen_residual},
                     {"saddle_residual", tol.saddle_residual},
                     {"mass_identity", tol.mass_identity},
                     {"power_iteration", tol.power_iteration},
                     {"cfl_safety", tol.cfl_safety}};
  m["artifacts"] = artifacts;
  return m;
}

/// Configuration stored in a manifest.
inline SimulationConfig config_from_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read manifest " + path.string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("manifest " + path.string() + ": " + e.what());
  }
  if (!m.contains("config_ini") || !m["config_ini"].is_string())
    throw InputError("manifest " + path.string() + " has no config_ini entry");
  return parse_config(m["config_ini"].get<std::string>());
}

/// A .json path is read as a manifest, anything else as INI.
inline SimulationConfig load_config_or_manifest(const std::filesystem::path& path) {
  if (path.extension() == ".json") return config_from_manifest(path);
  return load_config(path);
}

}  // namespace cemwave
