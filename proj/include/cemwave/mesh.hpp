#pragma once

// Two-level tensor grid. Every coarse block carries its own copy of the fine
// nodes on its boundary, so the discrete space is continuous inside a block and
// may jump across coarse edges.
//
// DOF layout (block-major, row-major nodes, component-minor):
//   dof = (block * nodes_per_block + node) * 2 + component
//   block = by * coarse_n + bx,  node = b * (fine_per_coarse + 1) + a

#include "cemwave/common.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace cemwave {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class EdgeOrientation { vertical, horizontal };

struct CoarseEdge {
  int id = 0;
  EdgeOrientation orientation = EdgeOrientation::vertical;
  int line = 0;    // grid line index: x = line * H for vertical edges, y = line * H for horizontal
  int offset = 0;  // block index along the edge
  int plus_block = -1;
  int minus_block = -1;  // -1 on the domain boundary
  Vec2 plus_normal = Vec2::Zero();
  Vec2 minus_normal = Vec2::Zero();

  bool interior() const { return minus_block >= 0; }
};

/// One side of a fine edge segment lying on a coarse edge.
struct TraceSide {
  int block = -1;
  int cell_a = 0;  // block-local fine cell column
  int cell_b = 0;  // block-local fine cell row
  std::array<int, 2> nodes{};  // block-local node ids, ordered by increasing edge coordinate
  Vec2 normal = Vec2::Zero();  // outward from this side's block
};

struct TraceSegment {
  int index = 0;
  Point start;
  Point end;
  std::vector<TraceSide> sides;  // two on interior edges, one on the boundary

  double length() const { return std::hypot(end.x - start.x, end.y - start.y); }
};

class MeshHierarchy {
public:
  MeshHierarchy(double extent_x, double extent_y, int coarse_n, int fine_per_coarse)
      : extent_x_(extent_x), extent_y_(extent_y), coarse_n_(coarse_n), fine_per_coarse_(fine_per_coarse) {
    require(coarse_n >= 1, "coarse_n must be >= 1");
    require(fine_per_coarse >= 1, "fine_per_coarse must be >= 1");
    require(extent_x > 0.0 && extent_y > 0.0, "domain extents must be positive");
    require(extent_x == extent_y, "only square domains are supported");
    build_edges();
  }

  double extent_x() const { return extent_x_; }
  double extent_y() const { return extent_y_; }
  int coarse_n() const { return coarse_n_; }
  int fine_per_coarse() const { return fine_per_coarse_; }

  /// Coarse cell size.
  double H() const { return extent_x_ / coarse_n_; }
  /// Fine cell size.
  double h() const { return extent_x_ / (coarse_n_ * fine_per_coarse_); }

  int num_blocks() const { return coarse_n_ * coarse_n_; }
  int fine_cells_per_side() const { return coarse_n_ * fine_per_coarse_; }
  int nodes_per_side() const { return fine_per_coarse_ + 1; }
  int nodes_per_block() const { return nodes_per_side() * nodes_per_side(); }
  Index dofs_per_block() const { return 2 * static_cast<Index>(nodes_per_block()); }
  Index num_dofs() const { return dofs_per_block() * num_blocks(); }

  int block_id(int bx, int by) const { return by * coarse_n_ + bx; }
  std::array<int, 2> block_coords(int block) const { return {block % coarse_n_, block / coarse_n_}; }
  int local_node(int a, int b) const { return b * nodes_per_side() + a; }
  std::array<int, 2> local_node_coords(int node) const { return {node % nodes_per_side(), node / nodes_per_side()}; }

  Index block_offset(int block) const { return dofs_per_block() * block; }
  Index dof(int block, int node, int component) const {
    return block_offset(block) + 2 * static_cast<Index>(node) + component;
  }

  /// Global DOF indices of block j in block-local order.
  std::vector<Index> block_dofs(int block) const {
    std::vector<Index> out(static_cast<std::size_t>(dofs_per_block()));
    for (Index k = 0; k < dofs_per_block(); ++k) out[static_cast<std::size_t>(k)] = block_offset(block) + k;
    return out;
  }

  Point node_point(int block, int node) const {
    const auto [bx, by] = block_coords(block);
    const auto [a, b] = local_node_coords(node);
    return {(bx * fine_per_coarse_ + a) * h(), (by * fine_per_coarse_ + b) * h()};
  }

  /// Global fine-cell index (row-major over the whole fine grid) of a block-local cell.
  int global_cell(int block, int cell_a, int cell_b) const {
    const auto [bx, by] = block_coords(block);
    return (by * fine_per_coarse_ + cell_b) * fine_cells_per_side() + bx * fine_per_coarse_ + cell_a;
  }

  /// Block-local node ids of a fine cell, counter-clockwise from the lower-left corner.
  std::array<int, 4> cell_nodes(int cell_a, int cell_b) const {
    return {local_node(cell_a, cell_b), local_node(cell_a + 1, cell_b), local_node(cell_a + 1, cell_b + 1),
            local_node(cell_a, cell_b + 1)};
  }

  std::array<Index, 8> cell_dofs(int block, int cell_a, int cell_b) const {
    const auto nodes = cell_nodes(cell_a, cell_b);
    std::array<Index, 8> out{};
    for (int k = 0; k < 4; ++k) {
      out[2 * k] = dof(block, nodes[k], 0);
      out[2 * k + 1] = dof(block, nodes[k], 1);
    }
    return out;
  }

  bool on_boundary(int block, int node) const {
    const auto [bx, by] = block_coords(block);
    const auto [a, b] = local_node_coords(node);
    const int nf = fine_per_coarse_;
    return (bx == 0 && a == 0) || (bx == coarse_n_ - 1 && a == nf) || (by == 0 && b == 0) ||
           (by == coarse_n_ - 1 && b == nf);
  }

  std::vector<int> boundary_nodes(int block) const {
    std::vector<int> out;
    for (int node = 0; node < nodes_per_block(); ++node)
      if (on_boundary(block, node)) out.push_back(node);
    return out;
  }

  /// Blocks within r layers of block j, clipped at the domain boundary, ascending.
  std::vector<int> oversampling(int block, int r) const {
    require(block >= 0 && block < num_blocks(), "block id out of range");
    require(r >= 0, "oversampling radius must be >= 0");
    const auto [bx, by] = block_coords(block);
    std::vector<int> out;
    for (int y = std::max(0, by - r); y <= std::min(coarse_n_ - 1, by + r); ++y)
      for (int x = std::max(0, bx - r); x <= std::min(coarse_n_ - 1, bx + r); ++x) out.push_back(block_id(x, y));
    return out;
  }

  const std::vector<CoarseEdge>& coarse_edges() const { return edges_; }

  std::vector<int> interior_edge_ids() const {
    std::vector<int> out;
    for (const auto& e : edges_)
      if (e.interior()) out.push_back(e.id);
    return out;
  }

  const CoarseEdge& edge(int id) const {
    require(id >= 0 && id < static_cast<int>(edges_.size()), "unknown coarse edge id " + std::to_string(id));
    return edges_[static_cast<std::size_t>(id)];
  }

private:
  void build_edges() {
    const int n = coarse_n_;
    // Vertical edges: plus side is the left block, normals point from plus to minus.
    for (int line = 0; line <= n; ++line) {
      for (int by = 0; by < n; ++by) {
        CoarseEdge e;
        e.id = static_cast<int>(edges_.size());
        e.orientation = EdgeOrientation::vertical;
        e.line = line;
        e.offset = by;
        if (line == 0) {
          e.plus_block = block_id(0, by);
          e.plus_normal = Vec2(-1.0, 0.0);
        } else if (line == n) {
          e.plus_block = block_id(n - 1, by);
          e.plus_normal = Vec2(1.0, 0.0);
        } else {
          e.plus_block = block_id(line - 1, by);
          e.minus_block = block_id(line, by);
          e.plus_normal = Vec2(1.0, 0.0);
          e.minus_normal = Vec2(-1.0, 0.0);
        }
        edges_.push_back(e);
      }
    }
    // Horizontal edges: plus side is the lower block.
    for (int line = 0; line <= n; ++line) {
      for (int bx = 0; bx < n; ++bx) {
        CoarseEdge e;
        e.id = static_cast<int>(edges_.size());
        e.orientation = EdgeOrientation::horizontal;
        e.line = line;
        e.offset = bx;
        if (line == 0) {
          e.plus_block = block_id(bx, 0);
          e.plus_normal = Vec2(0.0, -1.0);
        } else if (line == n) {
          e.plus_block = block_id(bx, n - 1);
          e.plus_normal = Vec2(0.0, 1.0);
        } else {
          e.plus_block = block_id(bx, line - 1);
          e.minus_block = block_id(bx, line);
          e.plus_normal = Vec2(0.0, 1.0);
          e.minus_normal = Vec2(0.0, -1.0);
        }
        edges_.push_back(e);
      }
    }
  }

  double extent_x_;
  double extent_y_;
  int coarse_n_;
  int fine_per_coarse_;
  std::vector<CoarseEdge> edges_;
};

inline MeshHierarchy build_mesh(double extent_x, double extent_y, int coarse_n, int fine_per_coarse) {
  return MeshHierarchy(extent_x, extent_y, coarse_n, fine_per_coarse);
}

namespace detail {

// Trace of block `block` on a coarse edge: the fine cell touching the edge at
// segment k and the two cell nodes on the edge.
inline TraceSide trace_side(const MeshHierarchy& mesh, const CoarseEdge& e, int block, const Vec2& normal, int k) {
  const int nf = mesh.fine_per_coarse();
  TraceSide side;
  side.block = block;
  side.normal = normal;
  if (e.orientation == EdgeOrientation::vertical) {
    const bool right_face = normal.x() > 0.0;
    const int a = right_face ? nf : 0;
    side.cell_a = right_face ? nf - 1 : 0;
    side.cell_b = k;
    side.nodes = {mesh.local_node(a, k), mesh.local_node(a, k + 1)};
  } else {
    const bool top_face = normal.y() > 0.0;
    const int b = top_face ? nf : 0;
    side.cell_a = k;
    side.cell_b = top_face ? nf - 1 : 0;
    side.nodes = {mesh.local_node(k, b), mesh.local_node(k + 1, b)};
  }
  return side;
}

}  // namespace detail

/// Per fine segment of a coarse edge: the adjacent fine cells, their trace nodes and outward normals.
inline std::vector<TraceSegment> interface_trace_map(const MeshHierarchy& mesh, int edge_id) {
  const CoarseEdge& e = mesh.edge(edge_id);
  const int nf = mesh.fine_per_coarse();
  const double h = mesh.h();
  std::vector<TraceSegment> out;
  out.reserve(static_cast<std::size_t>(nf));
  for (int k = 0; k < nf; ++k) {
    TraceSegment seg;
    seg.index = k;
    const double along0 = (e.offset * nf + k) * h;
    const double across = (e.line * nf) * h;
    if (e.orientation == EdgeOrientation::vertical) {
      seg.start = {across, along0};
      seg.end = {across, along0 + h};
    } else {
      seg.start = {along0, across};
      seg.end = {along0 + h, across};
    }
    seg.sides.push_back(detail::trace_side(mesh, e, e.plus_block, e.plus_normal, k));
    if (e.interior()) seg.sides.push_back(detail::trace_side(mesh, e, e.minus_block, e.minus_normal, k));
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace cemwave
