#pragma once

// Fine reference and multiscale runs driven by the Ricker source.

#include "cemwave/aux_spectral.hpp"
#include "cemwave/cem_space.hpp"
#include "cemwave/fine_assembly.hpp"
#include "cemwave/propagator.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

namespace cemwave {

struct TimeConfig {
  double tau = 1e-4;
  double final_time = 0.4;
  int snapshot_stride = 0;  // 0 disables the hook
  double cfl_safety = 0.9;
};

/// Number of steps N_T with N_T * tau reaching final_time.
inline long num_steps(const TimeConfig& t) {
  require(t.tau > 0.0, "time step must be positive");
  require(t.final_time > 0.0, "final time must be positive");
  return static_cast<long>(std::ceil(t.final_time / t.tau - 1e-9));
}

/// Invoked with (step, time, free-DOF fine field).
using SnapshotHook = std::function<void(long, double, const Vector&)>;

struct InitialData {
  Vector u0;  // nodal displacement, free DOFs
  Vector u1;  // nodal velocity, free DOFs
};

struct RunResult {
  Vector final_field;  // free DOFs at t = steps * tau
  Vector final_coefficients;  // coarse runs only
  long steps = 0;
  StabilityReport stability;
  std::vector<double> energy;  // Q^{m+1} for m = 0..steps-1, when recorded
};

struct MultiscaleModel {
  AuxSpace aux;
  CemSpace cem;
  CoarseOperators coarse;
};

inline MultiscaleModel build_multiscale(const MeshHierarchy& mesh, const MediaField& media, const FineSystem& fine,
                                        const std::vector<int>& counts, int radius) {
  AuxSpace aux = build_aux_space(mesh, media, fine, counts);
  CemSpace cem = build_cem_space(mesh, fine, aux, radius);
  CoarseOperators coarse = assemble_coarse(cem, fine.stiffness, aux);
  return {std::move(aux), std::move(cem), std::move(coarse)};
}

inline MultiscaleModel build_multiscale(const MeshHierarchy& mesh, const MediaField& media, const FineSystem& fine,
                                        int count, int radius) {
  return build_multiscale(mesh, media, fine, std::vector<int>(static_cast<std::size_t>(mesh.num_blocks()), count),
                          radius);
}

/// Coarse initial data: s(u_H^0, v) = s(u0, v) and
/// s(u_H^1, v) = s(u0 + tau u1 + tau^2/2 f^0, v) - tau^2/2 a_DG(u_H^0, v) for v in V_cem.
inline WaveState coarse_initial_data(const Vector& u0, const Vector& u1, const Vector& f0, const MultiscaleModel& model,
                                     const SparseMatrix& l2, double tau) {
  require(tau > 0.0, "time step must be positive");
  const SparseMatrix& phi = model.cem.basis;
  const SparseMatrix gram = SparseMatrix(phi.transpose()) * (l2 * phi);
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-14);
  cg.setMaxIterations(static_cast<Index>(10 * gram.rows() + 100));
  cg.compute(gram);
  auto solve = [&](const Vector& rhs) -> Vector {
    if (rhs.squaredNorm() == 0.0) return Vector::Zero(rhs.size());
    Vector x = cg.solve(rhs);
    if (cg.info() != Eigen::Success && (gram * x - rhs).norm() > 1e-10 * rhs.norm())
      throw NumericalError("coarse Gram solve for the initial data did not converge");
    return x;
  };
  WaveState s;
  s.tau = tau;
  s.step = 1;
  s.previous = solve(phi.transpose() * (l2 * u0));
  const Vector rhs1 = phi.transpose() * (l2 * (u0 + tau * u1 + 0.5 * tau * tau * f0)) -
                      0.5 * tau * tau * (model.coarse.stiffness * s.previous);
  s.current = solve(rhs1);
  return s;
}

struct RunOptions {
  TimeConfig time;
  SourceSpec source;
  std::optional<InitialData> initial;  // zero when absent
  bool use_source = true;
  bool record_energy = false;
  bool check_cfl = true;
  SnapshotHook hook;
};

namespace detail {
inline InitialData initial_or_zero(const RunOptions& opt, Index n) {
  if (opt.initial) {
    require(opt.initial->u0.size() == n && opt.initial->u1.size() == n, "initial data length mismatch");
    return *opt.initial;
  }
  return {Vector::Zero(n), Vector::Zero(n)};
}

inline void maybe_snapshot(const RunOptions& opt, long step, double t, const std::function<Vector()>& field) {
  if (opt.hook && opt.time.snapshot_stride > 0 && step % opt.time.snapshot_stride == 0) opt.hook(step, t, field());
}
}  // namespace detail

/// Fine IPDG reference run.
inline RunResult run_fine(const MeshHierarchy& mesh, const FineSystem& fine, const RunOptions& opt) {
  const Index n = fine.dofs.num_free();
  const long steps = num_steps(opt.time);
  const double tau = opt.time.tau;
  const MassSolver mass(fine.mass, fine.mass_kind);

  RunResult result;
  result.steps = steps;
  if (opt.check_cfl) {
    result.stability = check_stability(fine.stiffness, mass, tau, opt.time.cfl_safety);
    if (!result.stability.pass) {
      std::ostringstream msg;
      msg << "fine time step " << tau << " exceeds the CFL limit " << result.stability.tau_limit
          << " (lambda_max " << result.stability.lambda_max << ")";
      throw NumericalError(msg.str());
    }
  }
  const Vector profile = opt.use_source ? source_profile(opt.source, mesh, fine.dofs) : Vector::Zero(n);
  const Vector profile_load = fine.l2 * profile;
  auto load = [&](double t) -> Vector { return ricker_wavelet(opt.source, t) * profile_load; };

  const InitialData init = detail::initial_or_zero(opt, n);
  WaveState s = fine_initial_data(init.u0, init.u1, load(0.0), mass, fine.stiffness, tau);
  detail::maybe_snapshot(opt, 0, 0.0, [&] { return s.previous; });
  if (steps == 0) {
    result.final_field = s.previous;
    return result;
  }
  if (opt.record_energy) result.energy.push_back(discrete_energy(s, fine.stiffness, fine.mass));
  detail::maybe_snapshot(opt, 1, s.time(), [&] { return s.current; });
  while (s.step < steps) {
    step_fine(s, mass, fine.stiffness, load(s.time()));
    if (opt.record_energy) result.energy.push_back(discrete_energy(s, fine.stiffness, fine.mass));
    detail::maybe_snapshot(opt, s.step, s.time(), [&] { return s.current; });
  }
  result.final_field = s.current;
  return result;
}

/// Coarse multiscale run; initial data are projected onto V_cem.
inline RunResult run_multiscale(const MeshHierarchy& mesh, const FineSystem& fine, const MultiscaleModel& model,
                                const RunOptions& opt, double mass_tolerance = 1e-9) {
  const double defect = model.coarse.mass_identity_defect();
  if (!(defect <= mass_tolerance)) {
    std::ostringstream msg;
    msg << "coarse mass deviates from the identity by " << defect;
    throw NumericalError(msg.str());
  }
  const Index n = fine.dofs.num_free();
  const long steps = num_steps(opt.time);
  const double tau = opt.time.tau;
  const SparseMatrix& a_c = model.coarse.stiffness;

  RunResult result;
  result.steps = steps;
  if (opt.check_cfl) {
    result.stability = check_stability(a_c, IdentityMass{}, tau, opt.time.cfl_safety);
    if (!result.stability.pass) {
      std::ostringstream msg;
      msg << "coarse time step " << tau << " exceeds the CFL limit " << result.stability.tau_limit
          << " (lambda_max " << result.stability.lambda_max << ")";
      throw NumericalError(msg.str());
    }
  }
  const Vector profile = opt.use_source ? source_profile(opt.source, mesh, fine.dofs) : Vector::Zero(n);
  const Vector profile_load = coarse_load(profile, model.aux);
  auto load = [&](double t) -> Vector { return ricker_wavelet(opt.source, t) * profile_load; };

  const InitialData init = detail::initial_or_zero(opt, n);
  const double w0 = opt.use_source ? ricker_wavelet(opt.source, 0.0) : 0.0;
  WaveState s = coarse_initial_data(init.u0, init.u1, w0 * profile, model, fine.l2, tau);
  auto field = [&](const Vector& c) { return [&model, &c] { return reconstruct_fine(c, model.cem); }; };
  detail::maybe_snapshot(opt, 0, 0.0, field(s.previous));
  if (steps == 0) {
    result.final_coefficients = s.previous;
    result.final_field = reconstruct_fine(s.previous, model.cem);
    return result;
  }
  if (opt.record_energy) result.energy.push_back(discrete_energy(s, a_c, model.coarse.mass));
  detail::maybe_snapshot(opt, 1, s.time(), field(s.current));
  while (s.step < steps) {
    step_coarse(s, a_c, load(s.time()));
    if (opt.record_energy) result.energy.push_back(discrete_energy(s, a_c, model.coarse.mass));
    detail::maybe_snapshot(opt, s.step, s.time(), field(s.current));
  }
  result.final_coefficients = s.current;
  result.final_field = reconstruct_fine(s.current, model.cem);
  return result;
}

}  // namespace cemwave
