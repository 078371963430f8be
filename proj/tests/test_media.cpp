#include "cemwave/media.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <filesystem>
#include <fstream>

using namespace cemwave;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cemwave_media_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

Raster sample_raster(int w, int hgt) {
  Raster r;
  r.width = w;
  r.height = hgt;
  for (int y = 0; y < hgt; ++y)
    for (int x = 0; x < w; ++x) {
      const double c11 = 2.0 + 0.1 * x + 0.01 * y;
      r.planes[0].push_back(c11);
      r.planes[1].push_back(0.3 + 1e-3 * x);
      r.planes[2].push_back(1.5 + 0.05 * y);
      r.planes[3].push_back(0.7 + 1.0 / 3.0);
    }
  return r;
}

}  // namespace

TEST(Media, VoigtEigenvaluesMatchDenseSolver) {
  const Stiffness s{9.0, 3.0, 8.0, 2.5};
  const auto ev = voigt_eigenvalues(s);
  Eigen::SelfAdjointEigenSolver<Mat3> solver(s.voigt());
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(ev[static_cast<std::size_t>(k)], solver.eigenvalues()(k), 1e-12);
}

TEST(Media, RejectsNonPositiveDefiniteCell) {
  std::vector<Stiffness> cells(4, Stiffness{2.0, 0.5, 2.0, 1.0});
  cells[2] = {1.0, 2.0, 1.0, 1.0};
  try {
    MediaField(2, 2, cells, std::vector<double>(4, 1.0));
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
  cells[2] = {2.0, 0.5, 2.0, 0.0};
  EXPECT_THROW(MediaField(2, 2, cells, std::vector<double>(4, 1.0)), InputError);
  cells[2] = {2.0, 0.5, 2.0, 1.0};
  EXPECT_THROW(MediaField(2, 2, cells, std::vector<double>{1.0, 1.0, -1.0, 1.0}), InputError);
}

TEST(Media, ScaleTransformHalvesAndQuarters) {
  const MeshHierarchy mesh(1.0, 1.0, 1, 2);
  const auto m = scale_transform(MediaField::uniform(mesh, {8.0, 2.0, 6.0, 4.0}));
  EXPECT_EQ(m.stiffness(0), (Stiffness{8.0, 1.0, 3.0, 1.0}));
}

TEST(Media, BinaryRasterRoundTrip) {
  const auto dir = scratch("binary");
  const Raster r = sample_raster(7, 5);
  write_raster_binary(r, dir / "media.bin");
  EXPECT_EQ(read_raster(dir / "media.bin"), r);
}

TEST(Media, CsvRasterRoundTrip) {
  const auto dir = scratch("csv");
  const Raster r = sample_raster(6, 4);
  write_raster_csv(r, dir / "planes");
  EXPECT_EQ(read_raster(dir / "planes"), r);
}

TEST(Media, RasterToMediaAndBack) {
  const MeshHierarchy mesh(1.0, 1.0, 2, 3);
  const Raster r = sample_raster(6, 6);
  const MediaField m = media_from_raster(r, mesh);
  EXPECT_EQ(to_raster(m), r);
}

TEST(Media, RasterSamplingPicksNearestCell) {
  const MeshHierarchy mesh(1.0, 1.0, 1, 2);
  const Raster r = sample_raster(4, 4);
  const MediaField m = media_from_raster(r, mesh);
  // Fine cell (1, 0) has centre (0.75, 0.25) -> raster pixel (3, 1).
  EXPECT_DOUBLE_EQ(m.stiffness(1).c11, r.planes[0][1 * 4 + 3]);
}

TEST(Media, RasterCoarserThanGridRejected) {
  const MeshHierarchy mesh(1.0, 1.0, 2, 4);
  EXPECT_THROW(media_from_raster(sample_raster(4, 4), mesh), InputError);
}

TEST(Media, TruncatedRasterRejected) {
  const auto dir = scratch("truncated");
  {
    std::ofstream out(dir / "bad.bin", std::ios::binary);
    out << "3 3 4\n";
    const double v = 1.0;
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  EXPECT_THROW(read_raster(dir / "bad.bin"), InputError);
  EXPECT_THROW(read_raster(dir / "missing.bin"), InputError);
}

TEST(Media, LayeredModelAssignsByCellCentre) {
  const MeshHierarchy mesh(1.0, 1.0, 2, 5);
  const auto layers = builtin_model1_layers();
  const MediaField m = layered_model(layers, mesh);
  for (int iy = 0; iy < 10; ++iy) {
    const double yc = (iy + 0.5) / 10.0;
    for (const auto& l : layers) EXPECT_TRUE(!(yc >= l.y_begin && yc < l.y_end) || m.stiffness(iy * 10 + 3) == l.stiffness);
  }
}

TEST(Media, LayeredModelRejectsGapsAndOverlaps) {
  const MeshHierarchy mesh(1.0, 1.0, 1, 4);
  const Stiffness s{2.0, 0.5, 2.0, 1.0};
  EXPECT_THROW(layered_model({{0.0, 0.4, s}, {0.5, 1.0, s}}, mesh), InputError);
  EXPECT_THROW(layered_model({{0.0, 0.6, s}, {0.5, 1.0, s}}, mesh), InputError);
  EXPECT_THROW(layered_model({{0.0, 0.9, s}}, mesh), InputError);
  EXPECT_THROW(layered_model({{0.0, 0.0, s}, {0.0, 1.0, s}}, mesh), InputError);
  EXPECT_NO_THROW(layered_model({{0.5, 1.0, s}, {0.0, 0.5, s}}, mesh));
}

TEST(Media, EigenvalueBoundsCoverAllCells) {
  const MeshHierarchy mesh(1.0, 1.0, 2, 2);
  const MediaField m = layered_model(builtin_model1_layers(), mesh);
  const auto [lo, hi] = m.eigenvalue_bounds();
  for (const auto& s : m.cells()) {
    const auto ev = voigt_eigenvalues(s);
    EXPECT_LE(lo, ev[0]);
    EXPECT_GE(hi, ev[2]);
  }
}
