#pragma once

// Auxiliary space: per coarse block, the lowest eigenfunctions of
//
//   a^j(psi, v) = (lambda / H^2) s^j(psi, v)   for all v in V(K_j),
//
// normalised so that s^j(psi_i, psi_k) = delta_ik, and the s-orthogonal
// projection pi onto their span.

#include "cemwave/common.hpp"
#include "cemwave/fine_assembly.hpp"
#include "cemwave/media.hpp"
#include "cemwave/mesh.hpp"

#include <Eigen/Eigenvalues>

#include <cstdio>
#include <ostream>
#include <sstream>
#include <vector>

namespace cemwave {

struct LocalEigenpairs {
  Vector eigenvalues;  // the requested count, ascending, already multiplied by H^2
  Matrix vectors;      // s-orthonormal columns
  Vector spectrum;     // every eigenvalue of the block (same scaling)
  double max_residual = 0.0;
};

/// Dense generalized symmetric eigensolve (Cholesky of s, then a symmetric QR sweep).
/// Residual per pair must satisfy |a psi - (lambda/H^2) s psi| <= tol * |a psi| + floor,
/// where the floor is 1e-12 * |a|_F * |psi| to stay meaningful for the zero modes.
inline LocalEigenpairs solve_local_spectral(const Matrix& a, const Matrix& s, int count, double H, int block = -1,
                                            double tol = 1e-9) {
  require(a.rows() == a.cols() && s.rows() == s.cols() && a.rows() == s.rows(), "eigenproblem shape mismatch");
  require(count >= 1 && count <= a.rows(), "eigenfunction count must be in [1, block DOFs]");
  require(H > 0.0, "coarse size must be positive");

  // Eigen does not report a failed Cholesky of s through the generalized solver.
  const bool mass_ok = Eigen::LLT<Matrix>(s).info() == Eigen::Success;
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver;
  if (mass_ok) solver.compute(a, s, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (!mass_ok || solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "local eigensolve failed on block " << block << " (mass not positive definite?)";
    throw NumericalError(msg.str());
  }
  LocalEigenpairs out;
  const double h2 = H * H;
  out.spectrum = solver.eigenvalues() * h2;
  out.eigenvalues = out.spectrum.head(count);
  out.vectors = solver.eigenvectors().leftCols(count);

  const double a_norm = a.norm();
  for (int i = 0; i < count; ++i) {
    const Vector psi = out.vectors.col(i);
    const Vector apsi = a * psi;
    const double resid = (apsi - (out.eigenvalues(i) / h2) * (s * psi)).norm();
    const double bound = tol * apsi.norm() + 1e-12 * a_norm * psi.norm();
    out.max_residual = std::max(out.max_residual, resid);
    if (!(resid <= bound)) {
      std::ostringstream msg;
      msg << "eigenpair " << i << " on block " << block << " did not converge: residual " << resid << " > " << bound;
      throw NumericalError(msg.str());
    }
  }
  return out;
}

struct AuxBlock {
  int block = 0;
  Index begin = 0;   // first free DOF of the block
  Index size = 0;    // free DOFs in the block
  Index offset = 0;  // coarse index of the first auxiliary function
  Vector eigenvalues;
  Vector spectrum;
  Matrix psi;  // size x count, block-local over the free DOFs
  double max_residual = 0.0;

  int count() const { return static_cast<int>(psi.cols()); }
};

class AuxSpace {
public:
  AuxSpace(std::vector<AuxBlock> blocks, SparseMatrix l2) : blocks_(std::move(blocks)), l2_(std::move(l2)) {
    std::vector<Triplet> t;
    for (const auto& b : blocks_)
      for (Index i = 0; i < b.psi.cols(); ++i)
        for (Index r = 0; r < b.size; ++r) t.emplace_back(b.begin + r, b.offset + i, b.psi(r, i));
    const Index n = blocks_.empty() ? 0 : blocks_.back().offset + blocks_.back().count();
    basis_.resize(l2_.rows(), n);
    basis_.setFromTriplets(t.begin(), t.end());
    basis_.makeCompressed();
    mass_basis_ = l2_ * basis_;
    mass_basis_.makeCompressed();
  }

  const std::vector<AuxBlock>& blocks() const { return blocks_; }
  const AuxBlock& block(int j) const { return blocks_[static_cast<std::size_t>(j)]; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  /// Total number of auxiliary functions.
  Index size() const { return basis_.cols(); }
  Index num_free() const { return basis_.rows(); }
  Index coarse_index(int block, int i) const { return blocks_[static_cast<std::size_t>(block)].offset + i; }

  /// Columns psi_i^j as fine free-DOF vectors.
  const SparseMatrix& basis() const { return basis_; }
  /// s * basis: column (j, i) is the load functional v -> s(v, psi_i^j).
  const SparseMatrix& mass_basis() const { return mass_basis_; }
  const SparseMatrix& l2() const { return l2_; }

  Vector psi(int block, int i) const { return Vector(basis_.col(coarse_index(block, i))); }

private:
  std::vector<AuxBlock> blocks_;
  SparseMatrix l2_;
  SparseMatrix basis_;
  SparseMatrix mass_basis_;
};

/// Solve every block eigenproblem over the free DOFs with per-block counts.
inline AuxSpace build_aux_space(const MeshHierarchy& mesh, const MediaField& media, const FineSystem& fine,
                                const std::vector<int>& counts) {
  require(static_cast<int>(counts.size()) == mesh.num_blocks(), "need one eigenfunction count per block");
  const auto& dofs = fine.dofs;
  std::vector<AuxBlock> blocks;
  blocks.reserve(counts.size());
  Index offset = 0;
  for (int j = 0; j < mesh.num_blocks(); ++j) {
    const auto forms = assemble_block_forms(mesh, media, j);
    const Matrix a_full = Matrix(forms.stiffness.matrix);
    const Matrix s_full = Matrix(forms.mass.matrix);
    AuxBlock b;
    b.block = j;
    b.begin = dofs.block_begin(j);
    b.size = dofs.block_size(j);
    std::vector<Index> local(static_cast<std::size_t>(b.size));
    for (Index k = 0; k < b.size; ++k)
      local[static_cast<std::size_t>(k)] = dofs.full_index(b.begin + k) - mesh.block_offset(j);
    Matrix a(b.size, b.size);
    Matrix s(b.size, b.size);
    for (Index r = 0; r < b.size; ++r)
      for (Index c = 0; c < b.size; ++c) {
        a(r, c) = a_full(local[static_cast<std::size_t>(r)], local[static_cast<std::size_t>(c)]);
        s(r, c) = s_full(local[static_cast<std::size_t>(r)], local[static_cast<std::size_t>(c)]);
      }
    const int g = counts[static_cast<std::size_t>(j)];
    if (g < 1 || g > b.size) {
      std::ostringstream msg;
      msg << "block " << j << " has " << b.size << " free DOFs; cannot take " << g << " eigenfunctions";
      throw InputError(msg.str());
    }
    auto pairs = solve_local_spectral(a, s, g, mesh.H(), j);
    b.offset = offset;
    b.eigenvalues = std::move(pairs.eigenvalues);
    b.spectrum = std::move(pairs.spectrum);
    b.psi = std::move(pairs.vectors);
    b.max_residual = pairs.max_residual;
    offset += g;
    blocks.push_back(std::move(b));
  }
  return AuxSpace(std::move(blocks), fine.l2);
}

inline AuxSpace build_aux_space(const MeshHierarchy& mesh, const MediaField& media, const FineSystem& fine, int count) {
  return build_aux_space(mesh, media, fine, std::vector<int>(static_cast<std::size_t>(mesh.num_blocks()), count));
}

struct Projection {
  Vector coefficients;  // s(v, psi_i^j) in coarse order
  Vector image;         // pi(v) as a free-DOF vector
};

/// pi(v) = sum_j sum_i s^j(v, psi_i^j) psi_i^j.
inline Projection project_pi(const Vector& v, const AuxSpace& aux) {
  require(v.size() == aux.num_free(), "vector length does not match free DOFs");
  Projection p;
  p.coefficients = aux.mass_basis().transpose() * v;
  p.image = aux.basis() * p.coefficients;
  return p;
}

/// pi'(w, u) = s(pi(w), pi(u)).
inline double pi_prime(const Vector& w, const Vector& u, const AuxSpace& aux) {
  const Vector pw = project_pi(w, aux).image;
  const Vector pu = project_pi(u, aux).image;
  return pw.dot(aux.l2() * pu);
}

/// CSV "block,index,eigenvalue,selected" over each block's full spectrum.
inline void write_eigenvalues_csv(const AuxSpace& aux, std::ostream& out) {
  out << "block,index,eigenvalue,selected\n";
  char buf[64];
  for (const auto& b : aux.blocks())
    for (Index i = 0; i < b.spectrum.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", b.spectrum(i));
      out << b.block << ',' << i << ',' << buf << ',' << (i < b.count() ? 1 : 0) << '\n';
    }
}

}  // namespace cemwave
