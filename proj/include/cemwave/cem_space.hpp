#pragma once

// Constraint-energy-minimising trial basis. For every auxiliary function
// psi_i^j, phi_{i,r}^j minimises a_DG(phi, phi) over V(K_{j,r}) subject to
// s(phi, psi_k^l) = delta_{(j,i),(l,k)} for every auxiliary function supported
// in the oversampling region K_{j,r}. With a multiplier eta over those
// auxiliary functions this is the saddle system
//
//   [ A   B ] [phi]   [0]
//   [ B^T 0 ] [mu ] = [e]        B = s * Psi restricted to K_{j,r}.

#include "cemwave/aux_spectral.hpp"
#include "cemwave/common.hpp"
#include "cemwave/fine_assembly.hpp"
#include "cemwave/mesh.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <vector>

namespace cemwave {

struct CemBasisFunction {
  int block = 0;
  int index = 0;
  int radius = 0;
  SparseVector phi;                          // free-DOF vector supported on K_{j,r}
  std::vector<Index> multiplier_functions;  // coarse indices of the auxiliary functions in K_{j,r}
  Vector multiplier;                         // eta = sum_k multiplier(k) * psi_{multiplier_functions[k]}
  double energy_residual = 0.0;              // |A phi + B mu| / (|A phi| + |B mu|)
  double constraint_residual = 0.0;          // |B^T phi - e|
};

struct CemSpace {
  int radius = 0;
  std::vector<CemBasisFunction> functions;  // coarse order
  SparseMatrix basis;                       // free DOFs x coarse functions

  Index size() const { return basis.cols(); }
  double max_energy_residual() const {
    double r = 0.0;
    for (const auto& f : functions) r = std::max(r, f.energy_residual);
    return r;
  }
  double max_constraint_residual() const {
    double r = 0.0;
    for (const auto& f : functions) r = std::max(r, f.constraint_residual);
    return r;
  }
};

/// ceil(2 ln coarse_n), the default number of oversampling layers.
inline int default_oversampling(int coarse_n) {
  return coarse_n <= 1 ? 0 : static_cast<int>(std::ceil(2.0 * std::log(static_cast<double>(coarse_n))));
}

/// Every basis function of block j on K_{j,r}; one factorisation serves all of them.
inline std::vector<CemBasisFunction> build_cem_block(const MeshHierarchy& mesh, const FineSystem& fine,
                                                     const AuxSpace& aux, int block, int r, double tol = 1e-10) {
  require(block >= 0 && block < mesh.num_blocks(), "block id out of range");
  require(r >= 0, "oversampling radius must be >= 0");
  const auto region = mesh.oversampling(block, r);
  const auto& dofs = fine.dofs;

  std::vector<Index> local_of(static_cast<std::size_t>(dofs.num_free()), -1);
  std::vector<Index> region_dofs;
  for (int l : region)
    for (Index d = dofs.block_begin(l); d < dofs.block_end(l); ++d) {
      local_of[static_cast<std::size_t>(d)] = static_cast<Index>(region_dofs.size());
      region_dofs.push_back(d);
    }
  const Index n = static_cast<Index>(region_dofs.size());

  std::vector<Index> functions;
  for (int l : region)
    for (int i = 0; i < aux.block(l).count(); ++i) functions.push_back(aux.coarse_index(l, i));
  const Index m = static_cast<Index>(functions.size());

  std::vector<Triplet> t;
  for (Index p = 0; p < n; ++p)
    for (SparseMatrix::InnerIterator it(fine.stiffness, region_dofs[static_cast<std::size_t>(p)]); it; ++it) {
      const Index q = local_of[static_cast<std::size_t>(it.row())];
      if (q >= 0) t.emplace_back(q, p, it.value());
    }
  SparseMatrix b_local(n, m);
  {
    std::vector<Triplet> bt;
    for (Index k = 0; k < m; ++k)
      for (SparseMatrix::InnerIterator it(aux.mass_basis(), functions[static_cast<std::size_t>(k)]); it; ++it) {
        const Index q = local_of[static_cast<std::size_t>(it.row())];
        if (q < 0) throw NumericalError("auxiliary function leaks outside its block");
        bt.emplace_back(q, k, it.value());
        t.emplace_back(q, n + k, it.value());
        t.emplace_back(n + k, q, it.value());
      }
    b_local.setFromTriplets(bt.begin(), bt.end());
  }
  SparseMatrix a_local(n, n);
  {
    std::vector<Triplet> at;
    for (const auto& e : t)
      if (e.row() < n && e.col() < n) at.push_back(e);
    a_local.setFromTriplets(at.begin(), at.end());
  }
  SparseMatrix kkt(n + m, n + m);
  kkt.setFromTriplets(t.begin(), t.end());
  kkt.makeCompressed();

  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(kkt);
  if (lu.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "saddle system for block " << block << " (r=" << r << ") is singular: " << lu.lastErrorMessage();
    throw NumericalError(msg.str());
  }

  const int g = aux.block(block).count();
  Matrix rhs = Matrix::Zero(n + m, g);
  for (int i = 0; i < g; ++i) {
    const Index target = aux.coarse_index(block, i);
    for (Index k = 0; k < m; ++k)
      if (functions[static_cast<std::size_t>(k)] == target) rhs(n + k, i) = 1.0;
  }
  Matrix x = lu.solve(rhs);
  x += lu.solve(rhs - kkt * x);  // one step of iterative refinement

  std::vector<CemBasisFunction> out;
  out.reserve(static_cast<std::size_t>(g));
  for (int i = 0; i < g; ++i) {
    const Vector phi = x.col(i).head(n);
    const Vector mu = x.col(i).tail(m);
    const Vector aphi = a_local * phi;
    const Vector bmu = b_local * mu;
    const double scale = aphi.norm() + bmu.norm();
    CemBasisFunction f;
    f.block = block;
    f.index = i;
    f.radius = r;
    f.energy_residual = scale > 0.0 ? (aphi + bmu).norm() / scale : (aphi + bmu).norm();
    f.constraint_residual = (b_local.transpose() * phi - rhs.col(i).tail(m)).norm();
    if (!(f.energy_residual <= tol && f.constraint_residual <= tol)) {
      std::ostringstream msg;
      msg << "saddle solve for basis (" << block << ", " << i << ") missed tolerance: energy residual "
          << f.energy_residual << ", constraint residual " << f.constraint_residual;
      throw NumericalError(msg.str());
    }
    f.phi.resize(dofs.num_free());
    f.phi.reserve(n);
    for (Index p = 0; p < n; ++p)
      if (phi(p) != 0.0) f.phi.insertBack(region_dofs[static_cast<std::size_t>(p)]) = phi(p);
    f.multiplier_functions = functions;
    f.multiplier = mu;
    out.push_back(std::move(f));
  }
  return out;
}

inline CemBasisFunction build_cem_basis(const MeshHierarchy& mesh, const FineSystem& fine, const AuxSpace& aux,
                                        int block, int index, int r) {
  require(index >= 0 && index < aux.block(block).count(), "basis index out of range");
  auto all = build_cem_block(mesh, fine, aux, block, r);
  return std::move(all[static_cast<std::size_t>(index)]);
}

inline SparseMatrix basis_matrix(const std::vector<CemBasisFunction>& functions, Index rows) {
  std::vector<Triplet> t;
  for (std::size_t c = 0; c < functions.size(); ++c)
    for (SparseVector::InnerIterator it(functions[c].phi); it; ++it)
      t.emplace_back(it.index(), static_cast<Index>(c), it.value());
  SparseMatrix b(rows, static_cast<Index>(functions.size()));
  b.setFromTriplets(t.begin(), t.end());
  b.makeCompressed();
  return b;
}

/// All localized basis functions. r >= coarse_n gives the global (non-localized) space.
inline CemSpace build_cem_space(const MeshHierarchy& mesh, const FineSystem& fine, const AuxSpace& aux, int r) {
  CemSpace cem;
  cem.radius = r;
  cem.functions.reserve(static_cast<std::size_t>(aux.size()));
  for (int j = 0; j < mesh.num_blocks(); ++j)
    for (auto& f : build_cem_block(mesh, fine, aux, j, r)) cem.functions.push_back(std::move(f));
  cem.basis = basis_matrix(cem.functions, fine.dofs.num_free());
  return cem;
}

struct CoarseOperators {
  SparseMatrix stiffness;  // a_DG(phi_b, phi_a)
  SparseMatrix mass;       // pi'(phi_b, phi_a)

  /// max |M_c - I| entrywise.
  double mass_identity_defect() const {
    SparseMatrix id(mass.rows(), mass.cols());
    id.setIdentity();
    return max_abs(SparseMatrix(mass - id));
  }
};

inline CoarseOperators assemble_coarse(const CemSpace& cem, const SparseMatrix& a_dg, const AuxSpace& aux) {
  require(a_dg.rows() == cem.basis.rows(), "stiffness does not match the basis");
  CoarseOperators out;
  const SparseMatrix a_phi = a_dg * cem.basis;
  out.stiffness = SparseMatrix(cem.basis.transpose()) * a_phi;
  out.stiffness.makeCompressed();
  // pi(phi) = Psi * (Psi^T s phi); M_c = pi(Phi)^T s pi(Phi).
  const SparseMatrix coeffs = SparseMatrix(aux.mass_basis().transpose()) * cem.basis;
  const SparseMatrix projected = aux.basis() * coeffs;
  out.mass = SparseMatrix(projected.transpose()) * (aux.l2() * projected);
  out.mass.makeCompressed();
  return out;
}

/// Coarse right-hand side: component (j, i) is s(f, psi_i^j) for a nodal free-DOF field f.
inline Vector coarse_load(const Vector& f, const AuxSpace& aux) {
  require(f.size() == aux.num_free(), "load length does not match free DOFs");
  return aux.mass_basis().transpose() * f;
}

/// u_H = sum_(j,i) c_(j,i) phi_{i,r}^j as a free-DOF vector.
inline Vector reconstruct_fine(const Vector& coefficients, const CemSpace& cem) {
  if (coefficients.size() != cem.size()) {
    std::ostringstream msg;
    msg << "coefficient vector has length " << coefficients.size() << ", expected " << cem.size();
    throw InputError(msg.str());
  }
  return cem.basis * coefficients;
}

/// "function dof value" triplets for every basis function.
inline void write_basis_triplets(const CemSpace& cem, std::ostream& out) {
  char buf[64];
  for (Index c = 0; c < cem.basis.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(cem.basis, c); it; ++it) {
      std::snprintf(buf, sizeof buf, "%.17g", it.value());
      out << c << ' ' << it.row() << ' ' << buf << '\n';
    }
}

}  // namespace cemwave
