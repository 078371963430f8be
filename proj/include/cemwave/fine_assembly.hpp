#pragma once

// Fine-grid forms: block stiffness a^j and mass s^j, the interior-penalty DG
// stiffness a_DG, the rho-weighted mass, the DG norm, and strong Dirichlet
// elimination.
//
// On every interior coarse edge E with sides K+ and K-:
//
//   a_DG(u, v) = sum_K int_K sigma(u) : eps(v)
//              - sum_E int_E ({sigma(u)} : [[v]] + [[u]] : {sigma(v)})
//              + sum_E (gamma / h) int_E ([[u]] : {C} : [[v]] + [u] . {D} . [v])
//
// where [[v]] = sym(v+ (x) n+ + v- (x) n-) in Voigt form, [v] = v+ - v-,
// and D = diag(C11, C33).

#include "cemwave/common.hpp"
#include "cemwave/element.hpp"
#include "cemwave/media.hpp"
#include "cemwave/mesh.hpp"

#include <cstdio>
#include <ostream>
#include <vector>

namespace cemwave {

enum class FormTag { block_stiffness, block_mass, dg_stiffness, mass, lumped_mass, l2, dg_norm, broken_h1 };

/// Symmetric sparse operator over fine (or coarse) DOFs, tagged by the form it represents.
struct SparseOperator {
  FormTag tag = FormTag::dg_stiffness;
  SparseMatrix matrix;

  Index dim() const { return matrix.rows(); }
  double form(const Vector& u, const Vector& v) const { return u.dot(matrix * v); }
  double quad(const Vector& v) const { return form(v, v); }
  double symmetry_defect() const { return cemwave::symmetry_defect(matrix); }
};

enum class PenaltyScale { fine, coarse };
enum class MassKind { consistent, lumped };

struct DgOptions {
  double gamma = 2.0;
  PenaltyScale scale = PenaltyScale::fine;
};

inline double penalty_weight(const MeshHierarchy& mesh, const DgOptions& opt) {
  require(opt.gamma > 0.0, "penalty parameter gamma must be positive");
  return opt.gamma / (opt.scale == PenaltyScale::fine ? mesh.h() : mesh.H());
}

inline BilinearQuad fine_element(const MeshHierarchy& mesh) { return BilinearQuad(mesh.h(), mesh.h()); }

namespace detail {

inline void scatter(std::vector<Triplet>& out, const std::array<Index, 8>& dofs, const Mat8& local, Index offset = 0) {
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b)
      if (local(a, b) != 0.0) out.emplace_back(dofs[a] - offset, dofs[b] - offset, local(a, b));
}

template <int N>
void scatter(std::vector<Triplet>& out, const std::array<Index, N>& dofs, const Eigen::Matrix<double, N, N>& local) {
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b)
      if (local(a, b) != 0.0) out.emplace_back(dofs[a], dofs[b], local(a, b));
}

inline SparseMatrix from_triplets(Index n, const std::vector<Triplet>& t) {
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

template <typename CellMatrix>
void for_each_cell(const MeshHierarchy& mesh, int block, CellMatrix&& fn) {
  const int nf = mesh.fine_per_coarse();
  for (int cb = 0; cb < nf; ++cb)
    for (int ca = 0; ca < nf; ++ca) fn(ca, cb, mesh.global_cell(block, ca, cb));
}

/// Reference coordinates of the quadrature point t in [-1, 1] on the trace of a side.
inline std::array<double, 2> trace_reference(const TraceSide& side, EdgeOrientation o, double t) {
  if (o == EdgeOrientation::vertical) return {side.normal.x() > 0.0 ? 1.0 : -1.0, t};
  return {t, side.normal.y() > 0.0 ? 1.0 : -1.0};
}

}  // namespace detail

/// Local 16x16 contributions of one fine segment on an interior coarse edge.
/// DOFs 0..7 belong to the plus-side cell, 8..15 to the minus-side cell.
struct SegmentMatrices {
  std::array<Index, 16> dofs{};
  Eigen::Matrix<double, 16, 16> consistency = Eigen::Matrix<double, 16, 16>::Zero();
  Eigen::Matrix<double, 16, 16> penalty = Eigen::Matrix<double, 16, 16>::Zero();
};

inline SegmentMatrices segment_matrices(const MeshHierarchy& mesh, const MediaField& media, const CoarseEdge& edge,
                                        const TraceSegment& seg, double weight) {
  const BilinearQuad quad = fine_element(mesh);
  SegmentMatrices out;
  std::array<Mat3, 2> c;
  std::array<Eigen::Matrix2d, 2> d;
  for (int s = 0; s < 2; ++s) {
    const auto& side = seg.sides[static_cast<std::size_t>(s)];
    const auto dofs = mesh.cell_dofs(side.block, side.cell_a, side.cell_b);
    for (int k = 0; k < 8; ++k) out.dofs[8 * s + k] = dofs[k];
    const int cell = mesh.global_cell(side.block, side.cell_a, side.cell_b);
    c[s] = media.voigt(cell);
    d[s] = media.penalty_diagonal(cell);
  }
  const Mat3 c_avg = 0.5 * (c[0] + c[1]);
  const Eigen::Matrix2d d_avg = 0.5 * (d[0] + d[1]);

  const auto rule = gauss_legendre(2);
  const double half_length = 0.5 * seg.length();
  for (int q = 0; q < rule.size; ++q) {
    Eigen::Matrix<double, 3, 16> jump = Eigen::Matrix<double, 3, 16>::Zero();        // [[v]] in Voigt form
    Eigen::Matrix<double, 2, 16> vjump = Eigen::Matrix<double, 2, 16>::Zero();       // v+ - v-
    Eigen::Matrix<double, 3, 16> avg_stress = Eigen::Matrix<double, 3, 16>::Zero();  // {sigma(v)}
    for (int s = 0; s < 2; ++s) {
      const auto& side = seg.sides[static_cast<std::size_t>(s)];
      const auto [xi, eta] = detail::trace_reference(side, edge.orientation, rule.points[q]);
      const Value28 val = BilinearQuad::value_matrix(xi, eta);
      jump.middleCols<8>(8 * s) = normal_voigt(side.normal) * val;
      vjump.middleCols<8>(8 * s) = (s == 0 ? 1.0 : -1.0) * val;
      avg_stress.middleCols<8>(8 * s) = 0.5 * c[s] * quad.strain_matrix(xi, eta);
    }
    const double w = rule.weights[q] * half_length;
    out.consistency.noalias() -= w * (jump.transpose() * avg_stress + avg_stress.transpose() * jump);
    out.penalty.noalias() += (w * weight) * (jump.transpose() * c_avg * jump + vjump.transpose() * d_avg * vjump);
  }
  return out;
}

struct BlockForms {
  SparseOperator stiffness;  // a^j
  SparseOperator mass;       // s^j, unweighted
};

/// Block stiffness and unweighted mass over all block-local DOFs (no boundary conditions).
inline BlockForms assemble_block_forms(const MeshHierarchy& mesh, const MediaField& media, int block) {
  require(block >= 0 && block < mesh.num_blocks(), "block id out of range");
  require(media.matches(mesh), "media grid does not match the fine mesh");
  const BilinearQuad quad = fine_element(mesh);
  const Mat8 m_local = quad.mass(1.0);
  const Index offset = mesh.block_offset(block);
  std::vector<Triplet> kt;
  std::vector<Triplet> mt;
  detail::for_each_cell(mesh, block, [&](int ca, int cb, int cell) {
    const auto dofs = mesh.cell_dofs(block, ca, cb);
    detail::scatter(kt, dofs, quad.stiffness(media.voigt(cell)), offset);
    detail::scatter(mt, dofs, m_local, offset);
  });
  const Index n = mesh.dofs_per_block();
  return {{FormTag::block_stiffness, detail::from_triplets(n, kt)}, {FormTag::block_mass, detail::from_triplets(n, mt)}};
}

namespace detail {

inline void volume_triplets(const MeshHierarchy& mesh, const MediaField& media, std::vector<Triplet>& out) {
  const BilinearQuad quad = fine_element(mesh);
  for (int j = 0; j < mesh.num_blocks(); ++j)
    for_each_cell(mesh, j, [&](int ca, int cb, int cell) {
      scatter(out, mesh.cell_dofs(j, ca, cb), quad.stiffness(media.voigt(cell)));
    });
}

inline void edge_triplets(const MeshHierarchy& mesh, const MediaField& media, const DgOptions& opt,
                          bool with_consistency, std::vector<Triplet>& out) {
  const double weight = penalty_weight(mesh, opt);
  for (int id : mesh.interior_edge_ids()) {
    const auto& edge = mesh.edge(id);
    for (const auto& seg : interface_trace_map(mesh, id)) {
      const auto sm = segment_matrices(mesh, media, edge, seg, weight);
      if (with_consistency) {
        Eigen::Matrix<double, 16, 16> total = sm.consistency + sm.penalty;
        scatter<16>(out, sm.dofs, total);
      } else {
        scatter<16>(out, sm.dofs, sm.penalty);
      }
    }
  }
}

}  // namespace detail

/// Global IPDG stiffness over all fine DOFs.
inline SparseOperator assemble_dg(const MeshHierarchy& mesh, const MediaField& media, const DgOptions& opt = {}) {
  require(media.matches(mesh), "media grid does not match the fine mesh");
  require(opt.gamma > 0.0, "penalty parameter gamma must be positive");
  std::vector<Triplet> t;
  detail::volume_triplets(mesh, media, t);
  detail::edge_triplets(mesh, media, opt, true, t);
  return {FormTag::dg_stiffness, detail::from_triplets(mesh.num_dofs(), t)};
}

/// Operator of the squared DG norm: volume energy plus penalty terms, no consistency terms.
inline SparseOperator assemble_dg_norm_operator(const MeshHierarchy& mesh, const MediaField& media,
                                                const DgOptions& opt = {}) {
  require(media.matches(mesh), "media grid does not match the fine mesh");
  std::vector<Triplet> t;
  detail::volume_triplets(mesh, media, t);
  detail::edge_triplets(mesh, media, opt, false, t);
  return {FormTag::dg_norm, detail::from_triplets(mesh.num_dofs(), t)};
}

/// Rho-weighted mass. The lumped variant is the row-sum diagonal.
inline SparseOperator assemble_mass(const MeshHierarchy& mesh, const MediaField& media,
                                    MassKind kind = MassKind::consistent) {
  require(media.matches(mesh), "media grid does not match the fine mesh");
  const BilinearQuad quad = fine_element(mesh);
  const Mat8 unit = quad.mass(1.0);
  std::vector<Triplet> t;
  for (int j = 0; j < mesh.num_blocks(); ++j)
    detail::for_each_cell(mesh, j, [&](int ca, int cb, int cell) {
      const Mat8 local = media.rho(cell) * unit;
      const auto dofs = mesh.cell_dofs(j, ca, cb);
      if (kind == MassKind::consistent) {
        detail::scatter(t, dofs, local);
      } else {
        for (int a = 0; a < 8; ++a) t.emplace_back(dofs[a], dofs[a], local.row(a).sum());
      }
    });
  return {kind == MassKind::consistent ? FormTag::mass : FormTag::lumped_mass,
          detail::from_triplets(mesh.num_dofs(), t)};
}

/// Unweighted L2 product s(u, v).
inline SparseOperator assemble_l2(const MeshHierarchy& mesh) {
  const Mat8 unit = fine_element(mesh).mass(1.0);
  std::vector<Triplet> t;
  for (int j = 0; j < mesh.num_blocks(); ++j)
    detail::for_each_cell(mesh, j, [&](int ca, int cb, int) { detail::scatter(t, mesh.cell_dofs(j, ca, cb), unit); });
  return {FormTag::l2, detail::from_triplets(mesh.num_dofs(), t)};
}

/// Broken H1 seminorm operator: sum_K int_K grad u : grad v.
inline SparseOperator assemble_broken_h1(const MeshHierarchy& mesh) {
  const Mat8 unit = fine_element(mesh).gradient_gram();
  std::vector<Triplet> t;
  for (int j = 0; j < mesh.num_blocks(); ++j)
    detail::for_each_cell(mesh, j, [&](int ca, int cb, int) { detail::scatter(t, mesh.cell_dofs(j, ca, cb), unit); });
  return {FormTag::broken_h1, detail::from_triplets(mesh.num_dofs(), t)};
}

/// DG norm by direct cell and edge integration of a full fine DOF vector.
inline double dg_norm(const Vector& v, const MeshHierarchy& mesh, const MediaField& media, const DgOptions& opt = {}) {
  require(v.size() == mesh.num_dofs(), "vector length does not match fine DOFs");
  const BilinearQuad quad = fine_element(mesh);
  const auto rule = gauss_legendre(2);
  auto gather = [&](const std::array<Index, 8>& dofs) {
    Eigen::Matrix<double, 8, 1> out;
    for (int k = 0; k < 8; ++k) out(k) = v(dofs[k]);
    return out;
  };

  double total = 0.0;
  for (int j = 0; j < mesh.num_blocks(); ++j)
    detail::for_each_cell(mesh, j, [&](int ca, int cb, int cell) {
      const auto local = gather(mesh.cell_dofs(j, ca, cb));
      const Mat3 c = media.voigt(cell);
      for (int a = 0; a < rule.size; ++a)
        for (int b = 0; b < rule.size; ++b) {
          const Eigen::Vector3d e = quad.strain_matrix(rule.points[a], rule.points[b]) * local;
          total += rule.weights[a] * rule.weights[b] * quad.jacobian() * e.dot(c * e);
        }
    });

  const double weight = penalty_weight(mesh, opt);
  for (int id : mesh.interior_edge_ids()) {
    const auto& edge = mesh.edge(id);
    for (const auto& seg : interface_trace_map(mesh, id)) {
      Mat3 c_avg = Mat3::Zero();
      Eigen::Matrix2d d_avg = Eigen::Matrix2d::Zero();
      for (const auto& side : seg.sides) {
        const int cell = mesh.global_cell(side.block, side.cell_a, side.cell_b);
        c_avg += 0.5 * media.voigt(cell);
        d_avg += 0.5 * media.penalty_diagonal(cell);
      }
      for (int q = 0; q < rule.size; ++q) {
        Eigen::Vector3d jump = Eigen::Vector3d::Zero();
        Vec2 vjump = Vec2::Zero();
        for (std::size_t s = 0; s < 2; ++s) {
          const auto& side = seg.sides[s];
          const auto [xi, eta] = detail::trace_reference(side, edge.orientation, rule.points[q]);
          const Vec2 trace = BilinearQuad::value_matrix(xi, eta) * gather(mesh.cell_dofs(side.block, side.cell_a, side.cell_b));
          jump += normal_voigt(side.normal) * trace;
          vjump += (s == 0 ? 1.0 : -1.0) * trace;
        }
        total += rule.weights[q] * 0.5 * seg.length() * weight * (jump.dot(c_avg * jump) + vjump.dot(d_avg * vjump));
      }
    }
  }
  return std::sqrt(std::max(0.0, total));
}

/// Coordinate-triplet text dump "row col value", one nonzero per line.
inline void write_triplets(const SparseOperator& op, std::ostream& out) {
  char buf[64];
  for (Index k = 0; k < op.matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(op.matrix, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%.17g", it.value());
      out << it.row() << ' ' << it.col() << ' ' << buf << '\n';
    }
}

// ---------------------------------------------------------------------------
// Strong Dirichlet elimination

/// Maps between the full DOF vector and the free DOFs (all copies of nodes on the
/// domain boundary are constrained to zero).
class DirichletMap {
public:
  explicit DirichletMap(const MeshHierarchy& mesh) : full_to_free_(static_cast<std::size_t>(mesh.num_dofs()), -1) {
    block_begin_.reserve(static_cast<std::size_t>(mesh.num_blocks()) + 1);
    for (int j = 0; j < mesh.num_blocks(); ++j) {
      block_begin_.push_back(static_cast<Index>(free_to_full_.size()));
      for (int node = 0; node < mesh.nodes_per_block(); ++node) {
        if (mesh.on_boundary(j, node)) continue;
        for (int c = 0; c < 2; ++c) {
          const Index d = mesh.dof(j, node, c);
          full_to_free_[static_cast<std::size_t>(d)] = static_cast<Index>(free_to_full_.size());
          free_to_full_.push_back(d);
        }
      }
    }
    block_begin_.push_back(static_cast<Index>(free_to_full_.size()));
  }

  Index num_full() const { return static_cast<Index>(full_to_free_.size()); }
  Index num_free() const { return static_cast<Index>(free_to_full_.size()); }
  Index free_index(Index full) const { return full_to_free_[static_cast<std::size_t>(full)]; }
  Index full_index(Index free) const { return free_to_full_[static_cast<std::size_t>(free)]; }

  /// Free DOFs of a block are contiguous: [block_begin(j), block_end(j)).
  Index block_begin(int block) const { return block_begin_[static_cast<std::size_t>(block)]; }
  Index block_end(int block) const { return block_begin_[static_cast<std::size_t>(block) + 1]; }
  Index block_size(int block) const { return block_end(block) - block_begin(block); }

  SparseMatrix restrict_matrix(const SparseMatrix& a) const {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(a.nonZeros()));
    for (Index k = 0; k < a.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
        const Index r = free_index(it.row());
        const Index c = free_index(it.col());
        if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
      }
    SparseMatrix out(num_free(), num_free());
    out.setFromTriplets(t.begin(), t.end());
    out.makeCompressed();
    return out;
  }

  Vector restrict_vector(const Vector& full) const {
    require(full.size() == num_full(), "vector length does not match fine DOFs");
    Vector out(num_free());
    for (Index k = 0; k < num_free(); ++k) out(k) = full(full_index(k));
    return out;
  }

  Vector prolong(const Vector& free) const {
    require(free.size() == num_free(), "vector length does not match free DOFs");
    Vector out = Vector::Zero(num_full());
    for (Index k = 0; k < num_free(); ++k) out(full_index(k)) = free(k);
    return out;
  }

private:
  std::vector<Index> full_to_free_;
  std::vector<Index> free_to_full_;
  std::vector<Index> block_begin_;
};

/// Fine operators restricted to the free DOFs.
struct FineSystem {
  DirichletMap dofs;
  SparseMatrix stiffness;  // a_DG
  SparseMatrix mass;       // rho-weighted, consistent or lumped
  SparseMatrix l2;         // unweighted s
  DgOptions options;
  MassKind mass_kind = MassKind::consistent;
};

inline FineSystem assemble_fine_system(const MeshHierarchy& mesh, const MediaField& media, const DgOptions& opt = {},
                                       MassKind kind = MassKind::consistent) {
  DirichletMap dofs(mesh);
  SparseMatrix a = dofs.restrict_matrix(assemble_dg(mesh, media, opt).matrix);
  SparseMatrix m = dofs.restrict_matrix(assemble_mass(mesh, media, kind).matrix);
  SparseMatrix s = dofs.restrict_matrix(assemble_l2(mesh).matrix);
  return {std::move(dofs), std::move(a), std::move(m), std::move(s), opt, kind};
}

}  // namespace cemwave
