#include "cemwave/aux_spectral.hpp"
#include "support/oracle.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace cemwave;

namespace {

struct Fixture {
  MeshHierarchy mesh;
  MediaField media;
  FineSystem fine;
};

Fixture make(int n, int fpc, unsigned seed, double extent = 1.0) {
  MeshHierarchy mesh(extent, extent, n, fpc);
  std::mt19937_64 rng(seed);
  MediaField media = oracle::random_media(mesh, rng);
  FineSystem fine = assemble_fine_system(mesh, media);
  return {std::move(mesh), std::move(media), std::move(fine)};
}

/// Eigenvalues of s^{-1/2} a s^{-1/2} by a plain symmetric eigensolve.
Vector reference_spectrum(const Matrix& a, const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> se(s);
  const Matrix inv_sqrt = se.eigenvectors() * se.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                          se.eigenvectors().transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> ae(inv_sqrt * a * inv_sqrt);
  return ae.eigenvalues();
}

}  // namespace

TEST(AuxSpectral, MatchesSymmetricReduction) {
  const auto f = make(3, 3, 21);
  const auto aux = build_aux_space(f.mesh, f.media, f.fine, 5);
  for (int j = 0; j < f.mesh.num_blocks(); ++j) {
    const auto& b = aux.block(j);
    const Matrix s = Matrix(f.fine.l2).block(b.begin, b.begin, b.size, b.size);
    Matrix a(b.size, b.size);
    const auto forms = assemble_block_forms(f.mesh, f.media, j);
    const Matrix af = Matrix(forms.stiffness.matrix);
    for (Index r = 0; r < b.size; ++r)
      for (Index c = 0; c < b.size; ++c)
        a(r, c) = af(f.fine.dofs.full_index(b.begin + r) - f.mesh.block_offset(j),
                     f.fine.dofs.full_index(b.begin + c) - f.mesh.block_offset(j));
    const Vector ref = reference_spectrum(a, s) * f.mesh.H() * f.mesh.H();
    const double scale = ref.cwiseAbs().maxCoeff();
    EXPECT_LT((b.spectrum - ref).cwiseAbs().maxCoeff(), 1e-9 * scale) << "block " << j;
    // s-orthonormal eigenvectors
    const Matrix gram = b.psi.transpose() * s * b.psi;
    EXPECT_LT((gram - Matrix::Identity(b.count(), b.count())).cwiseAbs().maxCoeff(), 1e-11);
    EXPECT_LT(b.max_residual, 1e-9 * a.norm());
  }
}

TEST(AuxSpectral, InteriorBlockHasThreeRigidModes) {
  const auto f = make(3, 4, 2);
  const auto aux = build_aux_space(f.mesh, f.media, f.fine, 4);
  const auto& interior = aux.block(4);
  const double lmax = interior.spectrum.maxCoeff();
  int zeros = 0;
  for (Index k = 0; k < interior.spectrum.size(); ++k) zeros += interior.spectrum(k) <= 1e-9 * lmax;
  EXPECT_EQ(zeros, 3);
  // Boundary blocks lose the rigid modes once the Dirichlet nodes are removed.
  const auto& corner = aux.block(0);
  EXPECT_GT(corner.spectrum(0), 1e-6 * corner.spectrum.maxCoeff());
}

TEST(AuxSpectral, NormalisedEigenvaluesInvariantUnderDomainScaling) {
  const auto small = make(2, 3, 9, 1.0);
  const auto large = make(2, 3, 9, 3.0);
  const auto a1 = build_aux_space(small.mesh, small.media, small.fine, 6);
  const auto a2 = build_aux_space(large.mesh, large.media, large.fine, 6);
  for (int j = 0; j < 4; ++j)
    for (int i = 3; i < 6; ++i)
      EXPECT_NEAR(a1.block(j).eigenvalues(i), a2.block(j).eigenvalues(i), 1e-9 * a1.block(j).eigenvalues(i));
}

TEST(AuxSpectral, ProjectionIsIdempotentAndFixesAuxSpace) {
  const auto f = make(2, 3, 4);
  const auto aux = build_aux_space(f.mesh, f.media, f.fine, 3);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  Vector v(aux.num_free());
  for (Index k = 0; k < v.size(); ++k) v(k) = g(rng);
  const auto p = project_pi(v, aux);
  const auto pp = project_pi(p.image, aux);
  EXPECT_LT((pp.image - p.image).norm(), 1e-12 * p.image.norm());
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 3; ++i) {
      const auto q = project_pi(aux.psi(j, i), aux);
      EXPECT_LT((q.image - aux.psi(j, i)).norm(), 1e-12 * aux.psi(j, i).norm());
      for (int l = 0; l < 4; ++l)
        for (int k = 0; k < 3; ++k) {
          const double expected = (j == l && i == k) ? 1.0 : 0.0;
          EXPECT_NEAR(pi_prime(aux.psi(j, i), aux.psi(l, k), aux), expected, 1e-12);
        }
    }
  // pi is s-orthogonal: v - pi v is s-orthogonal to the auxiliary space.
  const Vector residual = aux.mass_basis().transpose() * (v - p.image);
  EXPECT_LT(residual.cwiseAbs().maxCoeff(), 1e-12 * v.norm());
}

TEST(AuxSpectral, CountOutOfRangeIsRejected) {
  const auto f = make(2, 2, 1);
  // Corner blocks of a 2x2 mesh with 2x2 fine cells have 4 free nodes = 8 DOFs.
  EXPECT_NO_THROW(build_aux_space(f.mesh, f.media, f.fine, 8));
  EXPECT_THROW(build_aux_space(f.mesh, f.media, f.fine, 9), InputError);
  EXPECT_THROW(build_aux_space(f.mesh, f.media, f.fine, 0), InputError);
  EXPECT_THROW(build_aux_space(f.mesh, f.media, f.fine, std::vector<int>{1, 2}), InputError);
}

TEST(AuxSpectral, PerBlockCountsAreHonoured) {
  const auto f = make(2, 3, 12);
  const auto aux = build_aux_space(f.mesh, f.media, f.fine, std::vector<int>{1, 2, 3, 4});
  EXPECT_EQ(aux.size(), 10);
  EXPECT_EQ(aux.coarse_index(3, 0), 6);
}

TEST(AuxSpectral, EigenvalueCsvListsFullSpectrum) {
  const auto f = make(2, 2, 3);
  const auto aux = build_aux_space(f.mesh, f.media, f.fine, 2);
  std::stringstream out;
  write_eigenvalues_csv(aux, out);
  std::string line;
  std::getline(out, line);
  EXPECT_EQ(line, "block,index,eigenvalue,selected");
  int rows = 0, selected = 0;
  while (std::getline(out, line)) {
    ++rows;
    selected += line.back() == '1';
  }
  EXPECT_EQ(rows, 4 * 8);
  EXPECT_EQ(selected, 8);
}

TEST(AuxSpectral, ResidualCheckRejectsIndefiniteMass) {
  Matrix a = Matrix::Identity(3, 3);
  Matrix s = Matrix::Identity(3, 3);
  s(2, 2) = -1.0;
  EXPECT_THROW(solve_local_spectral(a, s, 2, 1.0), NumericalError);
}
