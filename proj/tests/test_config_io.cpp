#include "cemwave/cemwave.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace cemwave;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cemwave_io_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

SimulationConfig tiny(const std::filesystem::path& out) {
  SimulationConfig c;
  c.coarse_n = 2;
  c.fine_per_coarse = 2;
  c.tau = 1e-3;
  c.final_time = 0.01;
  c.nbf = 3;
  c.nol = 1;
  c.output_directory = out.string();
  return c;
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  const SimulationConfig c;
  EXPECT_EQ(parse_config(serialize_config(c)), c);
}

TEST(Config, FullRoundTrip) {
  SimulationConfig c;
  c.mode = RunMode::study;
  c.extent_x = c.extent_y = 0.1 + 0.2;
  c.media_kind = MediaKind::layered;
  c.model = "model2";
  c.layers = {{0.0, 1.0 / 3.0, {9.0, 3.0, 8.0, 2.5}}, {1.0 / 3.0, 1.0, {5.0, 1.5, 4.0, 1.2}}};
  c.rho = 1.25;
  c.gamma = 3.5;
  c.penalty_scale = PenaltyScale::coarse;
  c.mass = MassKind::lumped;
  c.nol = 4;
  c.tau = 1.0 / 7.0 * 1e-3;
  c.snapshot_stride = 25;
  c.source.y_component = false;
  c.source.center_x = 0.3;
  c.study_fine_cells = 64;
  c.study_levels = {{8, 2, 6}, {16, 3, 6}};
  const SimulationConfig back = parse_config(serialize_config(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(serialize_config(back), serialize_config(c));
}

TEST(Config, UnknownKeysAndSectionsAreRejected) {
  EXPECT_THROW(parse_config("[time]\ntua = 1e-4\n"), InputError);
  EXPECT_THROW(parse_config("[timing]\ntau = 1e-4\n"), InputError);
  EXPECT_THROW(parse_config("tau = 1e-4\n"), InputError);
  try {
    parse_config("[time]\ntua = 1e-4\n");
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("time.tua"), std::string::npos);
  }
}

TEST(Config, MalformedValuesNameTheField) {
  try {
    parse_config("[domain]\ncoarse_n = eight\n");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("domain.coarse_n"), std::string::npos);
  }
  EXPECT_THROW(parse_config("[time]\ntau = 1e-4x\n"), InputError);
  EXPECT_THROW(parse_config("[run]\nmode = coarse\n"), InputError);
  EXPECT_THROW(parse_config("[media]\nlayers = 0:1:2:3\n"), InputError);
}

TEST(Config, ValidationNamesTheField) {
  SimulationConfig c;
  c.tau = -1.0;
  try {
    validate(c);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("time.tau"), std::string::npos);
  }
  c = {};
  c.mode = RunMode::study;
  EXPECT_THROW(validate(c), InputError);
  c.study_levels = {{8, 2, 6}};
  EXPECT_NO_THROW(validate(c));
  c.study_fine_cells = 60;
  EXPECT_THROW(validate(c), InputError);
  c = {};
  c.media_kind = MediaKind::raster;
  EXPECT_THROW(validate(c), InputError);
}

TEST(Config, OverridesApply) {
  SimulationConfig c;
  apply_override(c, "time.tau=5e-5");
  apply_override(c, "multiscale.nol=auto");
  apply_override(c, "source.components = y");
  EXPECT_DOUBLE_EQ(c.tau, 5e-5);
  EXPECT_FALSE(c.nol.has_value());
  EXPECT_FALSE(c.source.x_component);
  EXPECT_THROW(apply_override(c, "time.tau"), InputError);
  EXPECT_THROW(apply_override(c, "time.nope=1"), InputError);
}

TEST(Config, MediaDispatch) {
  const auto dir = scratch("media");
  const MeshHierarchy mesh(1.0, 1.0, 2, 2);
  SimulationConfig c;
  const MediaField builtin = make_media(c, mesh);
  EXPECT_EQ(builtin, layered_model(builtin_model1_layers(), mesh));
  write_raster_binary(to_raster(builtin), dir / "m.bin");
  c.media_kind = MediaKind::raster;
  c.raster = (dir / "m.bin").string();
  EXPECT_EQ(make_media(c, mesh), builtin);
  c.model = "model2";
  EXPECT_EQ(make_media(c, mesh), scale_transform(builtin));
}

TEST(Snapshot, RoundTripAtFullPrecision) {
  const auto dir = scratch("vtk");
  const MeshHierarchy mesh(1.0, 1.0, 3, 2);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Vector v(mesh.num_dofs());
  for (Index k = 0; k < v.size(); ++k) v(k) = g(rng);
  write_snapshot(v, mesh, dir / "s.vtk");
  const Snapshot s = read_snapshot(dir / "s.vtk");
  ASSERT_EQ(s.nx, 7);
  ASSERT_EQ(s.ny, 7);
  for (int gy = 0; gy < 7; ++gy)
    for (int gx = 0; gx < 7; ++gx) {
      // lowest block id containing the point
      int owner = -1, node = -1;
      for (int j = 0; j < mesh.num_blocks() && owner < 0; ++j)
        for (int nd = 0; nd < mesh.nodes_per_block(); ++nd) {
          const Point p = mesh.node_point(j, nd);
          if (p.x == gx * mesh.h() && p.y == gy * mesh.h()) {
            owner = j;
            node = nd;
            break;
          }
        }
      ASSERT_GE(owner, 0);
      const std::size_t k = static_cast<std::size_t>(gy * 7 + gx);
      EXPECT_EQ(s.ux[k], v(mesh.dof(owner, node, 0)));
      EXPECT_EQ(s.uy[k], v(mesh.dof(owner, node, 1)));
      EXPECT_EQ(s.x[k], gx * mesh.h());
    }
}

TEST(Snapshot, ZeroFieldAndLargeGridDimensions) {
  const auto dir = scratch("zero");
  const MeshHierarchy mesh(1.0, 1.0, 30, 20);
  write_snapshot(Vector::Zero(mesh.num_dofs()), mesh, dir / "z.vtk");
  const Snapshot s = read_snapshot(dir / "z.vtk");
  EXPECT_EQ(s.nx, 601);
  EXPECT_EQ(s.ny, 601);
  EXPECT_EQ(s.ux.size(), 601u * 601u);
  for (double u : s.ux) ASSERT_EQ(u, 0.0);
  EXPECT_THROW(write_snapshot(Vector::Zero(3), mesh, dir / "bad.vtk"), InputError);
  EXPECT_THROW(write_snapshot(Vector::Zero(mesh.num_dofs()), mesh, dir / "missing" / "x" / "z.vtk"), InputError);
}

TEST(Run, FineModeWithoutSourceWritesZeroSnapshots) {
  const auto dir = scratch("run_fine");
  SimulationConfig c = tiny(dir / "out");
  c.mode = RunMode::fine;
  c.source.amplitude = 0.0;
  c.snapshot_stride = 5;
  const auto summary = run(c);
  int snapshots = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir / "out" / "snapshots")) {
    const Snapshot s = read_snapshot(entry.path());
    for (double u : s.ux) ASSERT_EQ(u, 0.0);
    for (double u : s.uy) ASSERT_EQ(u, 0.0);
    ++snapshots;
  }
  EXPECT_EQ(snapshots, 3);
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "manifest.json"));
  EXPECT_EQ(load_config(dir / "out" / "config.ini"), c);
}

TEST(Run, MultiscaleManifestRecordsParameters) {
  const auto dir = scratch("run_ms");
  SimulationConfig c = tiny(dir / "out");
  c.gamma = 2.0;
  c.tau = 1e-4;
  c.final_time = 0.002;
  c.source.f0 = 10.0;
  const auto summary = run(c);
  ASSERT_TRUE(summary.errors.has_value());
  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest["config"]["dg.gamma"], "2");
  EXPECT_EQ(manifest["config"]["time.tau"], "0.0001");
  EXPECT_EQ(manifest["config"]["source.f0"], "10");
  EXPECT_EQ(config_from_manifest(dir / "out" / "manifest.json"), c);
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "errors.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "eigenvalues.csv"));
}

TEST(Run, StudyWritesOneRowPerLevel) {
  const auto dir = scratch("run_study");
  SimulationConfig c = tiny(dir / "out");
  c.mode = RunMode::study;
  c.tau = 2e-3;
  c.final_time = 0.22;
  c.study_fine_cells = 8;
  c.study_levels = {{2, 1, 4}, {4, 1, 4}, {4, 2, 4}};
  run(c);
  std::ifstream in(dir / "out" / "study.csv");
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST(Run, OutputRootEnvironmentVariable) {
  const auto dir = scratch("root");
  SimulationConfig c;
  c.output_directory = "nested/run";
  ::setenv("CEMWAVE_OUTPUT_ROOT", dir.c_str(), 1);
  EXPECT_EQ(resolve_output_directory(c), dir / "nested" / "run");
  ::unsetenv("CEMWAVE_OUTPUT_ROOT");
  EXPECT_EQ(resolve_output_directory(c), std::filesystem::path("nested/run"));
}
