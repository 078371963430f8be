#pragma once

// Heterogeneous anisotropic media on the fine grid. Stiffness is stored in 2D
// Voigt form over the (x1, x3) plane:
//
//   C = [[C11, C13, 0], [C13, C33, 0], [0, 0, C55]]
//
// acting on engineering strain (e_xx, e_yy, 2 e_xy).

#include "cemwave/common.hpp"
#include "cemwave/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace cemwave {

struct Stiffness {
  double c11 = 0.0;
  double c13 = 0.0;
  double c33 = 0.0;
  double c55 = 0.0;

  Mat3 voigt() const {
    Mat3 c;
    c << c11, c13, 0.0, c13, c33, 0.0, 0.0, 0.0, c55;
    return c;
  }
  bool positive_definite() const { return c11 > 0.0 && c33 > 0.0 && c55 > 0.0 && c11 * c33 - c13 * c13 > 0.0; }
  bool operator==(const Stiffness&) const = default;
};

/// Eigenvalues of the Voigt matrix in ascending order (closed form: 2x2 block plus C55).
inline std::array<double, 3> voigt_eigenvalues(const Stiffness& s) {
  const double mean = 0.5 * (s.c11 + s.c33);
  const double radius = std::hypot(0.5 * (s.c11 - s.c33), s.c13);
  std::array<double, 3> ev{mean - radius, mean + radius, s.c55};
  std::sort(ev.begin(), ev.end());
  return ev;
}

class MediaField {
public:
  MediaField() = default;

  /// Per-cell coefficients on an nx-by-ny fine grid (row-major, y rows from the bottom).
  MediaField(int nx, int ny, std::vector<Stiffness> cells, std::vector<double> rho)
      : nx_(nx), ny_(ny), cells_(std::move(cells)), rho_(std::move(rho)) {
    require(nx > 0 && ny > 0, "media grid must be non-empty");
    require(cells_.size() == static_cast<std::size_t>(nx) * ny, "media cell count does not match grid");
    require(rho_.size() == cells_.size(), "density count does not match grid");
    validate();
  }

  static MediaField uniform(const MeshHierarchy& mesh, const Stiffness& s, double rho = 1.0) {
    const int n = mesh.fine_cells_per_side();
    return MediaField(n, n, std::vector<Stiffness>(static_cast<std::size_t>(n) * n, s),
                      std::vector<double>(static_cast<std::size_t>(n) * n, rho));
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t num_cells() const { return cells_.size(); }

  const Stiffness& stiffness(int cell) const { return cells_[static_cast<std::size_t>(cell)]; }
  double rho(int cell) const { return rho_[static_cast<std::size_t>(cell)]; }
  Mat3 voigt(int cell) const { return stiffness(cell).voigt(); }

  /// Penalty matrix for the vector jump: diag(C11, C33).
  Eigen::Matrix2d penalty_diagonal(int cell) const {
    const auto& s = stiffness(cell);
    return Eigen::Vector2d(s.c11, s.c33).asDiagonal();
  }

  const std::vector<Stiffness>& cells() const { return cells_; }
  const std::vector<double>& densities() const { return rho_; }

  /// Global eigenvalue bounds (c0, c1) of C over all cells.
  std::array<double, 2> eigenvalue_bounds() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& s : cells_) {
      const auto ev = voigt_eigenvalues(s);
      lo = std::min(lo, ev[0]);
      hi = std::max(hi, ev[2]);
    }
    return {lo, hi};
  }

  bool matches(const MeshHierarchy& mesh) const {
    return nx_ == mesh.fine_cells_per_side() && ny_ == mesh.fine_cells_per_side();
  }

  bool operator==(const MediaField&) const = default;

private:
  void validate() const {
    for (std::size_t k = 0; k < cells_.size(); ++k) {
      const auto& s = cells_[k];
      const bool finite = std::isfinite(s.c11) && std::isfinite(s.c13) && std::isfinite(s.c33) &&
                          std::isfinite(s.c55) && std::isfinite(rho_[k]);
      if (!finite || !s.positive_definite()) {
        std::ostringstream msg;
        msg << "stiffness is not symmetric positive definite at cell " << k << " (ix=" << k % nx_
            << ", iy=" << k / nx_ << "): C11=" << s.c11 << " C13=" << s.c13 << " C33=" << s.c33
            << " C55=" << s.c55;
        throw InputError(msg.str());
      }
      if (!(rho_[k] > 0.0)) throw InputError("density must be positive at cell " + std::to_string(k));
    }
  }

  int nx_ = 0;
  int ny_ = 0;
  std::vector<Stiffness> cells_;
  std::vector<double> rho_;
};

/// Model-2 style rescaling: (C11, 0.5 C13, 0.5 C33, 0.25 C55).
inline MediaField scale_transform(const MediaField& m) {
  std::vector<Stiffness> cells = m.cells();
  for (auto& s : cells) s = {s.c11, 0.5 * s.c13, 0.5 * s.c33, 0.25 * s.c55};
  return MediaField(m.nx(), m.ny(), std::move(cells), m.densities());
}

// ---------------------------------------------------------------------------
// Raster files

/// Four row-major planes (C11, C13, C33, C55), row 0 at the bottom of the domain.
struct Raster {
  int width = 0;
  int height = 0;
  std::array<std::vector<double>, 4> planes;

  bool operator==(const Raster&) const = default;
};

inline const std::array<const char*, 4>& raster_plane_names() {
  static const std::array<const char*, 4> names{"C11", "C13", "C33", "C55"};
  return names;
}

/// Binary raster: text header line "W H 4\n" followed by 4 native-endian float64 planes.
inline Raster read_raster_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open raster " + path.string());
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  Raster r;
  int planes = 0;
  if (!(hs >> r.width >> r.height >> planes) || planes != 4 || r.width <= 0 || r.height <= 0)
    throw InputError("malformed raster header in " + path.string() + ": expected 'W H 4'");
  const auto count = static_cast<std::size_t>(r.width) * r.height;
  for (auto& p : r.planes) {
    p.resize(count);
    in.read(reinterpret_cast<char*>(p.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw InputError("raster " + path.string() + " is truncated");
  }
  return r;
}

inline void write_raster_binary(const Raster& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write raster " + path.string());
  out << r.width << ' ' << r.height << " 4\n";
  for (const auto& p : r.planes)
    out.write(reinterpret_cast<const char*>(p.data()), static_cast<std::streamsize>(p.size() * sizeof(double)));
}

/// CSV raster: a directory holding C11.csv, C13.csv, C33.csv, C55.csv; one grid row per line.
inline Raster read_raster_csv(const std::filesystem::path& dir) {
  Raster r;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto file = dir / (std::string(raster_plane_names()[k]) + ".csv");
    std::ifstream in(file);
    if (!in) throw InputError("cannot open raster plane " + file.string());
    std::vector<double> values;
    int rows = 0;
    int cols = -1;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string cell;
      int c = 0;
      while (std::getline(ls, cell, ',')) {
        try {
          values.push_back(std::stod(cell));
        } catch (const std::exception&) {
          throw InputError("non-numeric value '" + cell + "' in " + file.string());
        }
        ++c;
      }
      if (cols >= 0 && c != cols) throw InputError("ragged rows in " + file.string());
      cols = c;
      ++rows;
    }
    if (rows == 0) throw InputError("empty raster plane " + file.string());
    if (k == 0) {
      r.width = cols;
      r.height = rows;
    } else if (cols != r.width || rows != r.height) {
      throw InputError("raster plane dimensions differ in " + file.string());
    }
    r.planes[k] = std::move(values);
  }
  return r;
}

inline void write_raster_csv(const Raster& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  char buf[32];
  for (std::size_t k = 0; k < 4; ++k) {
    std::ofstream out(dir / (std::string(raster_plane_names()[k]) + ".csv"));
    if (!out) throw InputError("cannot write raster plane in " + dir.string());
    for (int y = 0; y < r.height; ++y) {
      for (int x = 0; x < r.width; ++x) {
        std::snprintf(buf, sizeof buf, "%.17g", r.planes[k][static_cast<std::size_t>(y) * r.width + x]);
        out << (x ? "," : "") << buf;
      }
      out << '\n';
    }
  }
}

inline Raster read_raster(const std::filesystem::path& path) {
  return std::filesystem::is_directory(path) ? read_raster_csv(path) : read_raster_binary(path);
}

/// Nearest-cell sampling of a raster onto the fine cells of `mesh`.
inline MediaField media_from_raster(const Raster& r, const MeshHierarchy& mesh, double rho = 1.0) {
  const int n = mesh.fine_cells_per_side();
  if (r.width < n || r.height < n) {
    std::ostringstream msg;
    msg << "raster " << r.width << "x" << r.height << " is coarser than the fine grid " << n << "x" << n;
    throw InputError(msg.str());
  }
  std::vector<Stiffness> cells(static_cast<std::size_t>(n) * n);
  for (int iy = 0; iy < n; ++iy) {
    const int ry = std::min(r.height - 1, static_cast<int>((iy + 0.5) * r.height / n));
    for (int ix = 0; ix < n; ++ix) {
      const int rx = std::min(r.width - 1, static_cast<int>((ix + 0.5) * r.width / n));
      const auto src = static_cast<std::size_t>(ry) * r.width + rx;
      cells[static_cast<std::size_t>(iy) * n + ix] = {r.planes[0][src], r.planes[1][src], r.planes[2][src],
                                                      r.planes[3][src]};
    }
  }
  std::vector<double> density(cells.size(), rho);
  return MediaField(n, n, std::move(cells), std::move(density));
}

inline MediaField ingest_raster(const std::filesystem::path& path, const MeshHierarchy& mesh, double rho = 1.0) {
  return media_from_raster(read_raster(path), mesh, rho);
}

inline Raster to_raster(const MediaField& m) {
  Raster r;
  r.width = m.nx();
  r.height = m.ny();
  for (auto& p : r.planes) p.reserve(m.num_cells());
  for (const auto& s : m.cells()) {
    r.planes[0].push_back(s.c11);
    r.planes[1].push_back(s.c13);
    r.planes[2].push_back(s.c33);
    r.planes[3].push_back(s.c55);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Layered models

/// Horizontal layer over normalized heights [y_begin, y_end) of the domain.
struct Layer {
  double y_begin = 0.0;
  double y_end = 1.0;
  Stiffness stiffness;

  bool operator==(const Layer&) const = default;
};

/// Piecewise-constant-in-y media. Layers must tile [0, 1] without gaps or overlaps
/// (any order); cells are assigned by their centre.
inline MediaField layered_model(std::vector<Layer> layers, const MeshHierarchy& mesh, double rho = 1.0) {
  require(!layers.empty(), "layered model needs at least one layer");
  std::sort(layers.begin(), layers.end(), [](const Layer& a, const Layer& b) { return a.y_begin < b.y_begin; });
  constexpr double tol = 1e-12;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    require(l.y_end - l.y_begin > tol, "empty layer [" + std::to_string(l.y_begin) + ", " + std::to_string(l.y_end) + ")");
    if (k == 0) require(std::abs(l.y_begin) <= tol, "layers must start at 0");
    if (k > 0) {
      const double gap = l.y_begin - layers[k - 1].y_end;
      require(gap > -tol, "overlapping layers at y=" + std::to_string(l.y_begin));
      require(gap < tol, "gap between layers at y=" + std::to_string(layers[k - 1].y_end));
    }
  }
  require(std::abs(layers.back().y_end - 1.0) <= tol, "layers must end at 1");

  const int n = mesh.fine_cells_per_side();
  std::vector<Stiffness> cells(static_cast<std::size_t>(n) * n);
  for (int iy = 0; iy < n; ++iy) {
    const double yc = (iy + 0.5) / n;
    std::size_t k = 0;
    while (k + 1 < layers.size() && yc >= layers[k].y_end) ++k;
    for (int ix = 0; ix < n; ++ix) cells[static_cast<std::size_t>(iy) * n + ix] = layers[k].stiffness;
  }
  return MediaField(n, n, std::move(cells), std::vector<double>(static_cast<std::size_t>(n) * n, rho));
}

/// Synthetic five-layer stand-in with a thin stiff layer and a soft inclusion band.
inline std::vector<Layer> builtin_model1_layers() {
  return {
      {0.0, 0.22, {9.0, 3.0, 8.0, 2.5}},
      {0.22, 0.4, {5.0, 1.5, 4.0, 1.2}},
      {0.4, 0.47, {16.0, 5.0, 14.0, 5.0}},
      {0.47, 0.75, {7.0, 2.0, 6.0, 2.0}},
      {0.75, 1.0, {4.0, 1.0, 3.5, 1.0}},
  };
}

}  // namespace cemwave
