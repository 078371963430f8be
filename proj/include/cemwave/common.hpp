#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace cemwave {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using SparseVector = Eigen::SparseVector<double>;
using Triplet = Eigen::Triplet<double>;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

/// Bad arguments, malformed input files or configuration. The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Solver breakdown: non-convergence, singular systems, blow-up. The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InputError(message);
}

/// Largest absolute entry of a sparse matrix.
inline double max_abs(const SparseMatrix& m) {
  double out = 0.0;
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) out = std::max(out, std::abs(it.value()));
  return out;
}

/// max |A - A^T| / max |A|, zero for the zero matrix.
inline double symmetry_defect(const SparseMatrix& m) {
  const double scale = max_abs(m);
  if (scale == 0.0) return 0.0;
  SparseMatrix diff = SparseMatrix(m.transpose()) - m;
  return max_abs(diff) / scale;
}

}  // namespace cemwave
