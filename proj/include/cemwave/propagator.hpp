#pragma once

// Explicit leapfrog for the fine and coarse systems, initial data, the Ricker
// source, the discrete energy and the CFL check.

#include "cemwave/common.hpp"
#include "cemwave/fine_assembly.hpp"
#include "cemwave/mesh.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace cemwave {

// ---------------------------------------------------------------------------
// Source

struct SourceSpec {
  double f0 = 10.0;             // centre frequency
  double center_x = 0.5;        // normalized coordinates
  double center_y = 0.5;
  double spatial_decay = 100.0;  // exp(-decay * r^2) in normalized coordinates
  double amplitude = 1.0;
  bool x_component = true;
  bool y_component = true;

  void validate() const {
    require(f0 > 0.0, "source centre frequency must be positive");
    require(spatial_decay > 0.0, "source width parameter must be positive");
  }
  bool operator==(const SourceSpec&) const = default;
};

/// Ricker wavelet (1 - 2 pi^2 f0^2 (t - 2/f0)^2) exp(-pi^2 f0^2 (t - 2/f0)^2).
inline double ricker_wavelet(const SourceSpec& s, double t) {
  const double arg = std::numbers::pi * s.f0 * (t - 2.0 / s.f0);
  const double a2 = arg * arg;
  return (1.0 - 2.0 * a2) * std::exp(-a2);
}

inline double ricker_source(const SourceSpec& s, double t, double x, double y) {
  const double dx = x - s.center_x;
  const double dy = y - s.center_y;
  return s.amplitude * std::exp(-s.spatial_decay * (dx * dx + dy * dy)) * ricker_wavelet(s, t);
}

/// Spatial factor of the source at every free node (amplitude and component mask included).
inline Vector source_profile(const SourceSpec& s, const MeshHierarchy& mesh, const DirichletMap& dofs) {
  s.validate();
  Vector out(dofs.num_free());
  for (Index k = 0; k < dofs.num_free(); ++k) {
    const Index full = dofs.full_index(k);
    const int block = static_cast<int>(full / mesh.dofs_per_block());
    const int node = static_cast<int>((full % mesh.dofs_per_block()) / 2);
    const int comp = static_cast<int>(full % 2);
    const Point p = mesh.node_point(block, node);
    const bool active = comp == 0 ? s.x_component : s.y_component;
    const double dx = p.x / mesh.extent_x() - s.center_x;
    const double dy = p.y / mesh.extent_y() - s.center_y;
    out(k) = active ? s.amplitude * std::exp(-s.spatial_decay * (dx * dx + dy * dy)) : 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mass operators

/// Consistent mass with a one-time sparse Cholesky, or a lumped diagonal.
class MassSolver {
public:
  MassSolver(const SparseMatrix& mass, MassKind kind) : matrix_(mass), kind_(kind) {
    if (kind_ == MassKind::lumped) {
      inverse_diagonal_ = mass.diagonal().cwiseInverse();
      if (!inverse_diagonal_.allFinite() || (mass.diagonal().array() <= 0.0).any())
        throw NumericalError("lumped mass has a non-positive diagonal entry");
    } else {
      ldlt_.compute(matrix_);
      if (ldlt_.info() != Eigen::Success) throw NumericalError("mass matrix factorization failed");
    }
  }

  Vector solve(const Vector& b) const {
    if (kind_ == MassKind::lumped) return inverse_diagonal_.cwiseProduct(b);
    return ldlt_.solve(b);
  }
  Vector apply(const Vector& v) const { return matrix_ * v; }
  const SparseMatrix& matrix() const { return matrix_; }
  MassKind kind() const { return kind_; }

private:
  SparseMatrix matrix_;
  MassKind kind_;
  Vector inverse_diagonal_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
};

struct IdentityMass {
  Vector solve(const Vector& b) const { return b; }
  Vector apply(const Vector& v) const { return v; }
};

// ---------------------------------------------------------------------------
// State and stepping

/// Two consecutive time levels: previous = u^{m-1}, current = u^m at t_m = m * tau.
struct WaveState {
  Vector previous;
  Vector current;
  long step = 1;
  double tau = 0.0;

  double time() const { return static_cast<double>(step) * tau; }
};

namespace detail {
inline void check_finite(const Vector& v, long step) {
  if (!v.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite values at step " << step << " (time step above the stability limit?)";
    throw NumericalError(msg.str());
  }
}
}  // namespace detail

/// u^0 = u0, and M u^1 = M (u0 + tau u1) + (tau^2 / 2) (F^0 - A u0).
/// u0 and u1 are nodal fields in the discrete space; load0 is the assembled load s(f^0, .).
template <typename Mass>
WaveState fine_initial_data(const Vector& u0, const Vector& u1, const Vector& load0, const Mass& mass,
                            const SparseMatrix& stiffness, double tau) {
  require(tau > 0.0, "time step must be positive");
  require(u0.size() == stiffness.rows() && u1.size() == u0.size() && load0.size() == u0.size(),
          "initial data length does not match the system");
  WaveState s;
  s.tau = tau;
  s.step = 1;
  s.previous = u0;
  s.current = u0 + tau * u1 + (0.5 * tau * tau) * mass.solve(load0 - stiffness * u0);
  return s;
}

/// M (u^{m+1} - 2 u^m + u^{m-1}) / tau^2 + A u^m = F^m.
template <typename Mass>
void step_fine(WaveState& s, const Mass& mass, const SparseMatrix& stiffness, const Vector& load) {
  Vector next = 2.0 * s.current - s.previous + (s.tau * s.tau) * mass.solve(load - stiffness * s.current);
  detail::check_finite(next, s.step + 1);
  s.previous = std::move(s.current);
  s.current = std::move(next);
  ++s.step;
}

/// Coarse leapfrog with identity mass: c^{m+1} = 2 c^m - c^{m-1} + tau^2 (F_c^m - A_c c^m).
inline void step_coarse(WaveState& s, const SparseMatrix& stiffness, const Vector& load) {
  Vector next = 2.0 * s.current - s.previous + (s.tau * s.tau) * (load - stiffness * s.current);
  detail::check_finite(next, s.step + 1);
  s.previous = std::move(s.current);
  s.current = std::move(next);
  ++s.step;
}

/// Q^{m+1} = |d/tau|_M^2 - (tau/2)^2 a(d/tau, d/tau) + a(w, w), d = u^{m+1} - u^m,
/// w = (u^{m+1} + u^m) / 2. Exactly conserved by the leapfrog recurrence without load.
inline double discrete_energy(const Vector& previous, const Vector& current, const SparseMatrix& stiffness,
                              const SparseMatrix& mass, double tau) {
  const Vector rate = (current - previous) / tau;
  const Vector mid = 0.5 * (current + previous);
  return rate.dot(mass * rate) - 0.25 * tau * tau * rate.dot(stiffness * rate) + mid.dot(stiffness * mid);
}

inline double discrete_energy(const WaveState& s, const SparseMatrix& stiffness, const SparseMatrix& mass) {
  return discrete_energy(s.previous, s.current, stiffness, mass, s.tau);
}

// ---------------------------------------------------------------------------
// Stability

struct StabilityReport {
  bool pass = false;
  double lambda_max = 0.0;  // estimate of the largest eigenvalue of M^{-1} A
  double tau_limit = std::numeric_limits<double>::infinity();  // safety * 2 / sqrt(lambda_max)
  int iterations = 0;
};

/// Power iteration on M^{-1} A with Rayleigh-quotient stopping |l_k - l_{k-1}| <= tol * l_k.
template <typename Mass>
StabilityReport check_stability(const SparseMatrix& stiffness, const Mass& mass, double tau, double safety = 0.9,
                                double tol = 1e-6, int max_iterations = 50000) {
  require(tau > 0.0, "time step must be positive");
  require(safety > 0.0, "CFL safety factor must be positive");
  StabilityReport r;
  const Index n = stiffness.rows();
  if (n == 0) {
    r.pass = true;
    return r;
  }
  std::mt19937_64 rng(20240607);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector x(n);
  for (Index k = 0; k < n; ++k) x(k) = dist(rng);
  x /= std::sqrt(x.dot(mass.apply(x)));

  double lambda = 0.0;
  bool converged = false;
  for (int it = 1; it <= max_iterations; ++it) {
    const Vector ax = stiffness * x;
    const double next = x.dot(ax);  // x is M-normalised
    r.iterations = it;
    if (ax.squaredNorm() == 0.0) {
      lambda = 0.0;
      converged = true;
      break;
    }
    if (it > 1 && std::abs(next - lambda) <= tol * std::abs(next)) {
      lambda = next;
      converged = true;
      break;
    }
    lambda = next;
    x = mass.solve(ax);
    x /= std::sqrt(x.dot(mass.apply(x)));
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "power iteration did not converge in " << max_iterations << " iterations (estimate " << lambda << ")";
    throw NumericalError(msg.str());
  }
  r.lambda_max = std::max(lambda, 0.0);
  r.tau_limit = r.lambda_max > 0.0 ? safety * 2.0 / std::sqrt(r.lambda_max) : std::numeric_limits<double>::infinity();
  r.pass = tau <= r.tau_limit;
  return r;
}

}  // namespace cemwave
