#include "cemwave/mesh.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace cemwave;

TEST(Mesh, CountsAndSizes) {
  const MeshHierarchy mesh(1.0, 1.0, 4, 3);
  EXPECT_EQ(mesh.num_blocks(), 16);
  EXPECT_EQ(mesh.fine_cells_per_side(), 12);
  EXPECT_EQ(mesh.nodes_per_block(), 16);
  EXPECT_EQ(mesh.num_dofs(), 16 * 16 * 2);
  EXPECT_DOUBLE_EQ(mesh.H(), 0.25);
  EXPECT_DOUBLE_EQ(mesh.h(), 1.0 / 12.0);
}

TEST(Mesh, RejectsInvalidInput) {
  EXPECT_THROW(MeshHierarchy(1.0, 1.0, 0, 2), InputError);
  EXPECT_THROW(MeshHierarchy(1.0, 1.0, 2, 0), InputError);
  EXPECT_THROW(MeshHierarchy(-1.0, -1.0, 2, 2), InputError);
  EXPECT_THROW(MeshHierarchy(1.0, 2.0, 2, 2), InputError);
}

TEST(Mesh, OversamplingClipsAtBoundary) {
  const MeshHierarchy mesh(1.0, 1.0, 4, 2);
  EXPECT_EQ(mesh.oversampling(mesh.block_id(1, 1), 1).size(), 9u);
  EXPECT_EQ(mesh.oversampling(mesh.block_id(0, 0), 1).size(), 4u);
  EXPECT_EQ(mesh.oversampling(mesh.block_id(0, 0), 0), std::vector<int>{0});
  EXPECT_EQ(mesh.oversampling(mesh.block_id(2, 1), 10).size(), 16u);
  const auto region = mesh.oversampling(mesh.block_id(3, 3), 1);
  EXPECT_EQ(region, (std::vector<int>{10, 11, 14, 15}));
}

TEST(Mesh, DofLayoutIsBlockMajor) {
  const MeshHierarchy mesh(1.0, 1.0, 3, 2);
  std::set<Index> seen;
  for (int j = 0; j < mesh.num_blocks(); ++j) {
    const auto dofs = mesh.block_dofs(j);
    ASSERT_EQ(static_cast<Index>(dofs.size()), mesh.dofs_per_block());
    EXPECT_EQ(dofs.front(), mesh.block_offset(j));
    for (Index d : dofs) EXPECT_TRUE(seen.insert(d).second);
  }
  EXPECT_EQ(static_cast<Index>(seen.size()), mesh.num_dofs());
}

TEST(Mesh, NodePointsCoincideAcrossInterfaces) {
  const MeshHierarchy mesh(2.0, 2.0, 2, 3);
  const int nf = mesh.fine_per_coarse();
  for (int b = 0; b <= nf; ++b) {
    const Point left = mesh.node_point(mesh.block_id(0, 0), mesh.local_node(nf, b));
    const Point right = mesh.node_point(mesh.block_id(1, 0), mesh.local_node(0, b));
    EXPECT_EQ(left.x, right.x);
    EXPECT_EQ(left.y, right.y);
  }
}

TEST(Mesh, EdgesCoverInteriorInterfacesOnce) {
  const int n = 3;
  const MeshHierarchy mesh(1.0, 1.0, n, 2);
  EXPECT_EQ(mesh.coarse_edges().size(), static_cast<std::size_t>(2 * n * (n + 1)));
  EXPECT_EQ(mesh.interior_edge_ids().size(), static_cast<std::size_t>(2 * n * (n - 1)));
  std::set<std::pair<int, int>> pairs;
  for (int id : mesh.interior_edge_ids()) {
    const auto& e = mesh.edge(id);
    EXPECT_TRUE(pairs.insert({e.plus_block, e.minus_block}).second);
    EXPECT_EQ(e.plus_normal + e.minus_normal, Vec2::Zero());
  }
  for (const auto& e : mesh.coarse_edges()) EXPECT_TRUE(e.interior() || e.minus_block == -1);
}

TEST(Mesh, TraceMapMatchesFineSegments) {
  const MeshHierarchy mesh(1.0, 1.0, 3, 4);
  const double h = mesh.h();
  for (int id : mesh.interior_edge_ids()) {
    const auto segs = interface_trace_map(mesh, id);
    ASSERT_EQ(segs.size(), 4u);
    for (const auto& seg : segs) {
      EXPECT_NEAR(seg.length(), h, 1e-15);
      ASSERT_EQ(seg.sides.size(), 2u);
      for (const auto& side : seg.sides) {
        const Point p0 = mesh.node_point(side.block, side.nodes[0]);
        const Point p1 = mesh.node_point(side.block, side.nodes[1]);
        EXPECT_DOUBLE_EQ(p0.x, seg.start.x);
        EXPECT_DOUBLE_EQ(p0.y, seg.start.y);
        EXPECT_DOUBLE_EQ(p1.x, seg.end.x);
        EXPECT_DOUBLE_EQ(p1.y, seg.end.y);
        // The cell lies on the side opposite to the outward normal.
        const auto nodes = mesh.cell_nodes(side.cell_a, side.cell_b);
        Point centre{0.0, 0.0};
        for (int k : nodes) {
          const Point q = mesh.node_point(side.block, k);
          centre.x += 0.25 * q.x;
          centre.y += 0.25 * q.y;
        }
        EXPECT_LT((centre.x - seg.start.x) * side.normal.x() + (centre.y - seg.start.y) * side.normal.y(), 0.0);
      }
    }
  }
}

TEST(Mesh, BoundaryEdgesHaveOneSide) {
  const MeshHierarchy mesh(1.0, 1.0, 2, 2);
  int boundary = 0;
  for (const auto& e : mesh.coarse_edges())
    if (!e.interior()) {
      ++boundary;
      for (const auto& seg : interface_trace_map(mesh, e.id)) EXPECT_EQ(seg.sides.size(), 1u);
    }
  EXPECT_EQ(boundary, 8);
}

TEST(Mesh, BoundaryNodes) {
  const MeshHierarchy mesh(1.0, 1.0, 2, 2);
  // Corner block (0,0): nodes with a == 0 or b == 0 lie on the domain boundary.
  EXPECT_EQ(mesh.boundary_nodes(0).size(), 5u);
  const MeshHierarchy single(1.0, 1.0, 1, 3);
  EXPECT_EQ(single.boundary_nodes(0).size(), 12u);
}
