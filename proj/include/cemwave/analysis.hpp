#pragma once

// Error norms, the elliptic projection onto the multiscale space, and
// convergence studies over (coarse_n, oversampling, eigenfunction count).

#include "cemwave/cem_space.hpp"
#include "cemwave/fine_assembly.hpp"
#include "cemwave/simulation.hpp"

#include <Eigen/SparseCholesky>

#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <vector>

namespace cemwave {

struct RunMetadata {
  int coarse_n = 0;
  int fine_per_coarse = 0;
  double H = 0.0;
  double h = 0.0;
  int oversampling = 0;  // Nol
  int nbf = 0;           // eigenfunctions per block
  double gamma = 0.0;
  double tau = 0.0;
  double final_time = 0.0;
  double extent = 0.0;

  bool operator==(const RunMetadata&) const = default;
};

struct ErrorReport {
  double l2 = 0.0;         // |u_H - u_h|_s / |u_h|_s
  double dg = 0.0;         // DG-norm relative error (the "energy" error)
  double broken_h1 = 0.0;  // broken H1 seminorm relative error
  RunMetadata meta;

  bool operator==(const ErrorReport&) const = default;
};

/// Norm operators over the full fine DOF vector.
struct ErrorNorms {
  SparseMatrix l2;
  SparseMatrix dg;
  SparseMatrix broken_h1;

  static ErrorNorms build(const MeshHierarchy& mesh, const MediaField& media, const DgOptions& opt) {
    return {assemble_l2(mesh).matrix, assemble_dg_norm_operator(mesh, media, opt).matrix,
            assemble_broken_h1(mesh).matrix};
  }
};

inline ErrorReport relative_errors(const Vector& u_coarse, const Vector& u_fine, const ErrorNorms& norms,
                                   const RunMetadata& meta = {}) {
  require(u_coarse.size() == u_fine.size() && u_fine.size() == norms.l2.rows(), "error vectors must be full fine DOF vectors");
  const Vector diff = u_coarse - u_fine;
  auto ratio = [&](const SparseMatrix& m) {
    const double ref = u_fine.dot(m * u_fine);
    if (!(ref > 0.0)) throw NumericalError("reference solution has zero norm");
    return std::sqrt(std::max(0.0, diff.dot(m * diff)) / ref);
  };
  ErrorReport r;
  r.l2 = ratio(norms.l2);
  r.dg = ratio(norms.dg);
  r.broken_h1 = ratio(norms.broken_h1);
  r.meta = meta;
  return r;
}

inline ErrorReport relative_errors(const Vector& u_coarse, const Vector& u_fine, const MeshHierarchy& mesh,
                                   const MediaField& media, const DgOptions& opt = {}) {
  return relative_errors(u_coarse, u_fine, ErrorNorms::build(mesh, media, opt));
}

struct EllipticProjection {
  Vector coefficients;
  Vector image;  // F_H v as a free-DOF vector
  double orthogonality_residual = 0.0;  // max_b |a(v - F_H v, phi_b)| / max_b |a(v, phi_b)|
};

/// F_H v in V_cem: a_DG(F_H v, phi) = a_DG(v, phi) for every trial function phi.
inline EllipticProjection elliptic_project(const Vector& v, const SparseMatrix& a_dg, const CemSpace& cem,
                                           const CoarseOperators& coarse) {
  require(v.size() == a_dg.rows(), "vector length does not match the fine system");
  const Vector rhs = cem.basis.transpose() * (a_dg * v);
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(coarse.stiffness);
  if (ldlt.info() != Eigen::Success) throw NumericalError("coarse stiffness is singular");
  EllipticProjection p;
  p.coefficients = ldlt.solve(rhs);
  if (!p.coefficients.allFinite() || (ldlt.vectorD().array() <= 0.0).any())
    throw NumericalError("coarse stiffness is singular or indefinite");
  p.image = reconstruct_fine(p.coefficients, cem);
  const Vector resid = cem.basis.transpose() * (a_dg * (v - p.image));
  const double scale = rhs.cwiseAbs().maxCoeff();
  p.orthogonality_residual = scale > 0.0 ? resid.cwiseAbs().maxCoeff() / scale : resid.cwiseAbs().maxCoeff();
  return p;
}

// ---------------------------------------------------------------------------
// Convergence study

struct StudyLevel {
  int coarse_n = 0;
  int oversampling = 0;
  int nbf = 0;

  bool operator==(const StudyLevel&) const = default;
};

using MediaFactory = std::function<MediaField(const MeshHierarchy&)>;

struct StudySpec {
  double extent = 1.0;
  int fine_cells = 0;       // fixed fine cells per side; 0 means use fine_per_coarse
  int fine_per_coarse = 0;
  MediaFactory media;
  DgOptions dg;
  MassKind mass = MassKind::consistent;
  SourceSpec source;
  TimeConfig time;
  std::vector<StudyLevel> levels;
};

struct StudyRow {
  StudyLevel level;
  ErrorReport errors;
};

struct StudyTable {
  std::vector<StudyRow> rows;
  bool l2_decreasing = true;
  bool dg_decreasing = true;
  double min_l2_reduction = 0.0;  // min over consecutive rows of e_k / e_{k+1}; 0 with fewer than two rows
};

inline int fine_per_coarse_for(const StudySpec& spec, int coarse_n) {
  if (spec.fine_cells > 0) {
    require(spec.fine_cells % coarse_n == 0, "fine_cells must be divisible by every coarse_n in the study");
    return spec.fine_cells / coarse_n;
  }
  require(spec.fine_per_coarse > 0, "study needs fine_cells or fine_per_coarse");
  return spec.fine_per_coarse;
}

inline void update_flags(StudyTable& table) {
  table.l2_decreasing = table.dg_decreasing = true;
  table.min_l2_reduction = 0.0;
  for (std::size_t k = 1; k < table.rows.size(); ++k) {
    const auto& a = table.rows[k - 1].errors;
    const auto& b = table.rows[k].errors;
    table.l2_decreasing = table.l2_decreasing && b.l2 < a.l2;
    table.dg_decreasing = table.dg_decreasing && b.dg < a.dg;
    const double red = b.l2 > 0.0 ? a.l2 / b.l2 : std::numeric_limits<double>::infinity();
    table.min_l2_reduction = k == 1 ? red : std::min(table.min_l2_reduction, red);
  }
}

/// One fine reference per mesh level (cached), one multiscale run per row.
inline StudyTable convergence_study(const StudySpec& spec) {
  require(!spec.levels.empty(), "study needs at least one level");
  require(static_cast<bool>(spec.media), "study needs a media factory");
  struct Reference {
    Vector field;
  };
  std::map<std::pair<int, int>, Reference> references;
  StudyTable table;
  for (const auto& level : spec.levels) {
    require(level.coarse_n >= 1 && level.nbf >= 1 && level.oversampling >= 0, "invalid study level");
    const int nf = fine_per_coarse_for(spec, level.coarse_n);
    const MeshHierarchy mesh(spec.extent, spec.extent, level.coarse_n, nf);
    const MediaField media = spec.media(mesh);
    const FineSystem fine = assemble_fine_system(mesh, media, spec.dg, spec.mass);

    RunOptions opt;
    opt.time = spec.time;
    opt.source = spec.source;

    const auto key = std::make_pair(level.coarse_n, nf);
    auto it = references.find(key);
    if (it == references.end()) it = references.emplace(key, Reference{run_fine(mesh, fine, opt).final_field}).first;

    const MultiscaleModel model = build_multiscale(mesh, media, fine, level.nbf, level.oversampling);
    const RunResult coarse = run_multiscale(mesh, fine, model, opt);

    RunMetadata meta{level.coarse_n, nf, mesh.H(), mesh.h(), level.oversampling, level.nbf, spec.dg.gamma,
                     spec.time.tau, spec.time.final_time, spec.extent};
    const ErrorNorms norms = ErrorNorms::build(mesh, media, spec.dg);
    table.rows.push_back(
        {level, relative_errors(fine.dofs.prolong(coarse.final_field), fine.dofs.prolong(it->second.field), norms, meta)});
  }
  update_flags(table);
  return table;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// CSV with columns Nol, L (= H / extent), Nbf, error_L2, error_H1, then coarse_n,
/// fine_per_coarse and the broken H1 error.
inline void write_table_csv(const StudyTable& table, std::ostream& out) {
  out << "Nol,L,Nbf,error_L2,error_H1,coarse_n,fine_per_coarse,error_H1_broken\n";
  for (const auto& row : table.rows) {
    const auto& m = row.errors.meta;
    out << m.oversampling << ',' << format_double(m.H / m.extent) << ',' << m.nbf << ',' << format_double(row.errors.l2)
        << ',' << format_double(row.errors.dg) << ',' << m.coarse_n << ',' << m.fine_per_coarse << ','
        << format_double(row.errors.broken_h1) << '\n';
  }
}

/// Markdown-compatible aligned table with percentages.
inline void write_table_markdown(const StudyTable& table, std::ostream& out) {
  char buf[160];
  out << "| Nol |      L     | Nbf |  error_L2  |  error_H1  |\n";
  out << "|----:|-----------:|----:|-----------:|-----------:|\n";
  for (const auto& row : table.rows) {
    const auto& m = row.errors.meta;
    std::snprintf(buf, sizeof buf, "| %3d | 1/%-8.4g | %3d | %9.4f%% | %9.4f%% |\n", m.oversampling, m.extent / m.H,
                  m.nbf, 100.0 * row.errors.l2, 100.0 * row.errors.dg);
    out << buf;
  }
}

}  // namespace cemwave
