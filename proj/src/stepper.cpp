#include "stochns/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "stochns/errors.hpp"

namespace stochns {

int StepperConfig::steps() const { return static_cast<int>(std::llround(final_time / k)); }

void StepperConfig::validate() const {
  if (!(final_time > 0.0)) throw ConfigError("T must be positive");
  if (!(k > 0.0) || k > final_time) throw ConfigError("k must lie in (0, T]");
  const int m = steps();
  if (std::abs(m * k - final_time) > 1e-12 * final_time) {
    throw ConfigError("k = " + std::to_string(k) + " does not divide T = " + std::to_string(final_time));
  }
  if (!(nu > 0.0)) throw ConfigError("nu must be positive");
  if (modes < 1) throw ConfigError("J must be >= 1");
  if (!(picard_tol > 0.0)) throw ConfigError("picard_tol must be positive");
  if (picard_max < 1) throw ConfigError("picard_max must be >= 1");
}

namespace {

// Solves (Q_h u0, phi) = load(phi) over discretely divergence-free phi.
PathState project_load(const Discretization& disc, const Eigen::VectorXd& load) {
  PathState s;
  s.pressure_accum = Eigen::VectorXd::Zero(disc.dofs.num_pressure_dofs());
  if (load.size() == 0 || load.isZero(0.0)) {
    s.u = Eigen::VectorXd::Zero(disc.dofs.num_velocity_dofs());
    return s;
  }
  const SaddleSystem projector(disc.forms, disc.dofs, SaddleCoefficients{1.0, 0.0, 1.0});
  Eigen::VectorXd p;
  projector.solve(load, s.u, p);
  return s;
}

}  // namespace

PathState initial_state(const Discretization& disc, const Eigen::VectorXd& u0_coeffs) {
  if (u0_coeffs.size() == 0) return project_load(disc, u0_coeffs);
  return project_load(disc, disc.forms.mass * u0_coeffs);
}

PathState initial_state(const Discretization& disc, const VectorFunction& u0) {
  if (!u0) return project_load(disc, Eigen::VectorXd());
  return project_load(disc, assemble_load(disc.dofs, disc.tables, u0));
}

PathState step(const PathState& state, const StepperConfig& config, const Discretization& disc,
               const SaddleSystem& system, const ModeIncrement& increment, StepDiagnostics* diag) {
  const double k = config.k;
  const double t_next = (state.step + 1) * k;
  const AssembledForms& forms = disc.forms;

  Eigen::VectorXd noise;
  stochastic_load(forms, increment, config.g_scale, noise);
  Eigen::VectorXd force;
  if (config.body_force) {
    disc.body_force_load(t_next, force);
    force *= k;
  } else {
    force.setZero(state.u.size());
  }
  const Eigen::VectorXd base = forms.mass * state.u + force + noise;

  VelocityField prev{state.u};
  VelocityField next;
  Eigen::VectorXd p, conv, rhs;
  double last_change = 0.0, ratio = 0.0;
  bool converged = false;
  int iter = 0;
  while (iter < config.picard_max) {
    ++iter;
    disc.convection.rhs(prev, prev, conv);
    rhs = base - k * conv;
    system.solve(rhs, next.coeffs, p);
    const double change = disc.l2_norm(next.coeffs - prev.coeffs);
    if (iter > 1 && last_change > 0.0) ratio = change / last_change;
    last_change = change;
    std::swap(prev.coeffs, next.coeffs);
    if (change <= config.picard_tol * std::max(1.0, disc.l2_norm(prev.coeffs))) {
      converged = true;
      break;
    }
  }
  if (!converged && !config.permissive) {
    throw PicardError("fixed-point iteration did not converge at step " + std::to_string(state.step + 1) +
                          " (last change " + std::to_string(last_change) + ", ratio " +
                          std::to_string(ratio) + ")",
                      state.step + 1, iter, ratio, last_change);
  }

  PathState out;
  out.step = state.step + 1;
  out.time = t_next;
  out.u = std::move(prev.coeffs);
  out.pressure_accum = state.pressure_accum + k * p;

  if (diag) {
    *diag = StepDiagnostics{};
    diag->step = out.step;
    diag->time = out.time;
    diag->picard_iterations = iter;
    diag->contraction = ratio;
    diag->converged = converged;
    if (config.diagnostics) {
      const double l2sq = out.u.dot(forms.mass * out.u);
      const double h1sq = out.u.dot(forms.stiffness * out.u);
      const Eigen::VectorXd du = out.u - state.u;
      const double residual = l2sq - state.u.dot(forms.mass * state.u) + du.dot(forms.mass * du) +
                              2.0 * config.nu * k * h1sq - 2.0 * noise.dot(out.u) - 2.0 * force.dot(out.u);
      diag->l2_u = std::sqrt(std::max(0.0, l2sq));
      diag->h1_u = std::sqrt(std::max(0.0, h1sq));
      diag->energy_residual = std::abs(residual) / std::max(1.0, l2sq);
      diag->pressure_mean = std::abs(forms.mean_vector.dot(out.pressure_accum));
      const double div = (forms.divergence * out.u).lpNorm<Eigen::Infinity>();
      diag->divergence_ratio = div == 0.0 ? 0.0 : div / diag->l2_u;
    }
  }
  return out;
}

const Snapshot& Trajectory::at_step(int step) const {
  for (const auto& s : snapshots) {
    if (s.step == step) return s;
  }
  throw std::out_of_range("Trajectory: no snapshot at step " + std::to_string(step));
}

std::vector<int> every_step(int steps, int stride) {
  std::vector<int> out;
  for (int s = 0; s <= steps; s += stride) out.push_back(s);
  return out;
}

Trajectory run_path(const StepperConfig& config, const Discretization& disc, const SaddleSystem& system,
                    const WienerPath& path, int ratio, const std::vector<int>& checkpoints,
                    const PathState& initial) {
  config.validate();
  const int steps = config.steps();
  if (ratio < 1 || path.fine_steps != steps * ratio) {
    throw ConfigError("run_path: path has " + std::to_string(path.fine_steps) + " fine steps, expected " +
                      std::to_string(steps) + " x " + std::to_string(ratio));
  }
  if (path.modes != disc.forms.noise_modes || config.modes != disc.forms.noise_modes) {
    throw ConfigError("run_path: noise mode count mismatch");
  }
  if (std::abs(system.coefficients().pressure - config.k) > 1e-14 * config.k ||
      std::abs(system.coefficients().stiffness - config.nu * config.k) > 1e-14 * config.nu * config.k) {
    throw ConfigError("run_path: saddle system was built for a different (nu, k)");
  }

  Trajectory traj;
  traj.path_index = path.path_index;
  traj.k = config.k;
  std::vector<int> wanted(checkpoints);
  std::sort(wanted.begin(), wanted.end());
  auto next_cp = wanted.begin();
  auto record = [&](const PathState& s) {
    while (next_cp != wanted.end() && *next_cp < s.step) ++next_cp;
    if (next_cp != wanted.end() && *next_cp == s.step) {
      traj.snapshots.push_back({s.step, s.time, s.u, s.pressure_accum});
      ++next_cp;
    }
  };

  PathState state = initial;
  state.step = 0;
  state.time = 0.0;
  traj.max_grad_sq = state.u.dot(disc.forms.stiffness * state.u);
  record(state);
  traj.steps.reserve(steps);
  for (int n = 0; n < steps; ++n) {
    StepDiagnostics d;
    try {
      state = step(state, config, disc, system, coarse_mode_increment(path, n, ratio), &d);
    } catch (const PicardError&) {
      throw;
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at step " + std::to_string(n + 1));
    }
    traj.max_grad_sq = std::max(traj.max_grad_sq, d.h1_u * d.h1_u);
    traj.max_divergence_ratio = std::max(traj.max_divergence_ratio, d.divergence_ratio);
    traj.max_energy_residual = std::max(traj.max_energy_residual, d.energy_residual);
    traj.max_picard_iterations = std::max(traj.max_picard_iterations, d.picard_iterations);
    if (!d.converged) ++traj.unconverged_steps;
    traj.steps.push_back(d);
    record(state);
  }
  return traj;
}

void write_trajectory_csv_header(std::ostream& os) {
  os << "path_index,t,norm_L2_u,norm_H1_u,pressure_mean_check,energy_residual\n";
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const auto flags = os.flags();
  const auto prec = os.precision(17);
  for (const auto& d : traj.steps) {
    os << traj.path_index << ',' << d.time << ',' << d.l2_u << ',' << d.h1_u << ',' << d.pressure_mean << ','
       << d.energy_residual << '\n';
  }
  os.precision(prec);
  os.flags(flags);
}

}  // namespace stochns
