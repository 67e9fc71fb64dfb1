#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "stochns/assembly.hpp"
#include "stochns/noise.hpp"
#include "stochns/saddle_solver.hpp"

namespace stochns {

struct StepperConfig {
  double final_time = 1.0;
  double k = 1.0 / 16.0;
  double nu = 1.0;
  double g_scale = 10.0;
  int modes = 4;
  double picard_tol = 1e-8;
  int picard_max = 50;
  bool body_force = true;
  /// Accept the last Picard iterate instead of throwing PicardError.
  bool permissive = false;
  /// Record per-step norms and the energy identity residual.
  bool diagnostics = true;

  int steps() const;
  /// Throws ConfigError.
  void validate() const;
};

struct PathState {
  int step = 0;
  double time = 0.0;
  Eigen::VectorXd u;
  /// k * sum_{m <= step} p^m.
  Eigen::VectorXd pressure_accum;
};

struct StepDiagnostics {
  int step = 0;
  double time = 0.0;
  int picard_iterations = 0;
  /// Last successive-difference ratio; 0 when a single iteration sufficed.
  double contraction = 0.0;
  bool converged = true;
  double l2_u = 0.0;
  double h1_u = 0.0;
  double pressure_mean = 0.0;
  /// ||B u||_inf / ||u||_L2 (0 when u vanishes).
  double divergence_ratio = 0.0;
  /// Relative residual of the discrete energy identity.
  double energy_residual = 0.0;
};

/// u_h^0 = Q_h u0: L2-orthogonal projection onto discretely divergence-free
/// fields. A null function yields the zero state.
PathState initial_state(const Discretization& disc, const VectorFunction& u0);
PathState initial_state(const Discretization& disc, const Eigen::VectorXd& u0_coeffs);

/// Advances one step of the implicit Euler-Maruyama scheme, resolving the
/// convection term by fixed-point iteration with the constant operator
/// `system` (built for the same nu and k). `increment` is the noise increment
/// over [t_n, t_{n+1}]. Throws PicardError unless config.permissive.
PathState step(const PathState& state, const StepperConfig& config, const Discretization& disc,
               const SaddleSystem& system, const ModeIncrement& increment,
               StepDiagnostics* diagnostics = nullptr);

struct Snapshot {
  int step = 0;
  double time = 0.0;
  Eigen::VectorXd u;
  Eigen::VectorXd pressure_accum;
};

struct Trajectory {
  std::uint64_t path_index = 0;
  double k = 0.0;
  std::vector<Snapshot> snapshots;
  std::vector<StepDiagnostics> steps;
  double max_grad_sq = 0.0;
  double max_divergence_ratio = 0.0;
  double max_energy_residual = 0.0;
  int max_picard_iterations = 0;
  int unconverged_steps = 0;

  const Snapshot& at_step(int step) const;
};

/// Runs config.steps() steps driven by the coarse increments of `path` with
/// the given refinement ratio (k = ratio * k0). Snapshots are stored at the
/// listed step indices (0 allowed). Errors are rethrown with the step attached.
Trajectory run_path(const StepperConfig& config, const Discretization& disc, const SaddleSystem& system,
                    const WienerPath& path, int refinement_ratio, const std::vector<int>& checkpoints,
                    const PathState& initial);

std::vector<int> every_step(int steps, int stride = 1);

/// Columns: path_index,t,norm_L2_u,norm_H1_u,pressure_mean_check,energy_residual
void write_trajectory_csv_header(std::ostream& os);
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace stochns
