#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stochns/assembly.hpp"
#include "stochns/stepper.hpp"

namespace stochns {

struct StudyConfig {
  std::uint64_t master_seed = 20240601;
  int num_paths = 100;
  int modes = 4;
  int mesh_n = 16;
  double final_time = 1.0;
  double nu = 1.0;
  double g_scale = 10.0;
  /// Coarse steps, each an integer multiple of k0.
  std::vector<double> k_list = {1.0 / 16, 1.0 / 32, 1.0 / 64};
  double k0 = 1.0 / 512;
  std::vector<double> q_list = {2, 4, 8};
  double picard_tol = 1e-8;
  int picard_max = 50;
  bool permissive = false;
  /// Stop at the first failed path; otherwise failed paths are reported and
  /// excluded from the moments.
  bool abort_on_failure = true;
  /// 0 selects the hardware concurrency.
  int workers = 0;
  /// sigma of the exponential moment diagnostic E[exp(sigma max_n ||grad u^n||^2)].
  double exp_sigma = 1e-3;

  int fine_steps() const;
  int refinement_ratio(double k) const;
  StepperConfig stepper(double k) const;
  /// Throws ConfigError.
  void validate() const;
};

/// q-th power mean ((1/N) sum s^q)^(1/q); throws on empty input or q < 1.
double moment_error(std::span<const double> samples, double q);

/// order_i = log2(e_i / e_{i+1}) for consecutive halvings of k.
std::vector<double> fit_rate(std::span<const double> errors);
/// order_i = log(e_i / e_{i+1}) / log(k_i / k_{i+1}).
std::vector<double> fit_rate(std::span<const double> errors, std::span<const double> ks);
/// Least-squares slope of log(error) against log(k) over the whole ladder.
double fit_slope(std::span<const double> errors, std::span<const double> ks);

struct VelocityPathError {
  double l2 = 0.0;      ///< ||u_ref(T) - u_k(T)||_L2
  double energy = 0.0;  ///< (nu k sum_n ||grad(u_ref(t_n) - u_k^n)||^2)^(1/2)
};

/// The coarse trajectory needs snapshots at steps 1..M; the reference needs
/// snapshots at the same physical times. Throws std::invalid_argument otherwise.
VelocityPathError velocity_path_error(const Trajectory& coarse, const Trajectory& reference,
                                      const Discretization& disc, double nu);

/// ||P_ref - P_coarse||_L2 for time-averaged pressures at the same time.
double pressure_path_error(const Snapshot& coarse, const Snapshot& reference, const Discretization& disc);

struct PathErrors {
  std::uint64_t path_index = 0;
  bool ok = true;
  std::string failure;
  /// Indexed like StudyConfig::k_list.
  std::vector<double> l2;
  std::vector<double> energy;
  std::vector<double> pressure;
  double max_grad_sq = 0.0;
  double max_divergence_ratio = 0.0;
  double max_energy_residual = 0.0;
  int max_picard_iterations = 0;
};

struct ErrorRow {
  double k = 0.0;
  double q = 0.0;
  double e_u = 0.0;
  double e_energy = 0.0;
  double e_p = 0.0;
  std::optional<double> order_u;
  std::optional<double> order_p;
};

struct ErrorReport {
  StudyConfig config;
  std::vector<PathErrors> paths;
  /// Grouped by q (in q_list order), then k (in k_list order).
  std::vector<ErrorRow> rows;
  std::vector<std::string> failures;
  double max_divergence_ratio = 0.0;
  double max_energy_residual = 0.0;
  double exp_moment = 0.0;
  double exp_moment_bound = 0.0;
  double seconds = 0.0;

  const ErrorRow& row(double k, double q) const;
  /// Samples of successful paths for k_list[k_index].
  std::vector<double> velocity_samples(std::size_t k_index) const;
  std::vector<double> pressure_samples(std::size_t k_index) const;
  std::vector<double> energy_samples(std::size_t k_index) const;
};

using ProgressFn = std::function<void(int done, int total)>;

/// Shared pieces of one study: discretization plus one factorization per step size.
class StudyContext {
 public:
  explicit StudyContext(const StudyConfig& config);
  const StudyConfig& config() const { return config_; }
  const Discretization& disc() const { return *disc_; }
  /// Reference run at k0 and one coarse run per k on the same Brownian path.
  PathErrors run_path_errors(std::uint64_t path_index) const;

 private:
  StudyConfig config_;
  std::shared_ptr<const Discretization> disc_;
  std::unique_ptr<SaddleSystem> reference_system_;
  std::vector<std::unique_ptr<SaddleSystem>> coarse_systems_;
};

/// Evaluates fn(i) for i in [0, count) on `workers` threads. Results are
/// stored by index, so the outcome does not depend on scheduling.
void parallel_for(int count, int workers, const std::function<void(int)>& fn, const ProgressFn& progress = {});

ErrorReport run_convergence_study(const StudyConfig& config, const ProgressFn& progress = {});

/// Moments from an existing report; throws if the report has no successful path.
void fill_rows(ErrorReport& report);

struct QSweepRow {
  double q = 0.0;
  double e_u = 0.0;
  double e_p = 0.0;
};
/// Moments for every q at k_list[k_index] of an existing report.
std::vector<QSweepRow> q_sweep_from_report(const ErrorReport& report, std::size_t k_index,
                                           std::span<const double> q_values);
/// Runs a study at the single step config.k_list.front() and sweeps q.
std::vector<QSweepRow> run_q_sweep(const StudyConfig& config, std::span<const double> q_values,
                                   const ProgressFn& progress = {});

struct PathwiseSeries {
  std::uint64_t path_index = 0;
  std::vector<double> err_u;
  std::vector<double> err_p;
  std::vector<double> order_u;
  std::vector<double> order_p;
  double slope_u = 0.0;
  double slope_p = 0.0;
};
struct PathwiseReport {
  std::vector<double> k_list;
  std::vector<PathwiseSeries> series;
};
PathwiseReport run_pathwise_study(const StudyConfig& config, std::span<const std::uint64_t> path_indices,
                                  const ProgressFn& progress = {});

/// Manufactured steady Stokes solution on the unit square:
/// u = curl(sin^2(pi x) sin^2(pi y)), p = sin(pi x) cos(pi y), f = -nu lap u + grad p.
struct ManufacturedStokes {
  double nu = 1.0;
  Vec2 velocity(const Point& x) const;
  Mat2 velocity_gradient(const Point& x) const;
  double pressure(const Point& x) const;
  Vec2 force(const Point& x) const;
};

struct StokesRow {
  int n = 0;
  double h = 0.0;
  double err_u_l2 = 0.0;
  double err_u_h1 = 0.0;
  double err_p_l2 = 0.0;
  std::optional<double> order_u_l2;
  std::optional<double> order_u_h1;
  std::optional<double> order_p_l2;
};
std::vector<StokesRow> run_stokes_verification(std::span<const int> mesh_ladder, double nu = 1.0);

/// CSV writers; all numbers use 12 significant digits.
void write_convergence_csv(std::ostream& os, const ErrorReport& report);
void write_qsweep_csv(std::ostream& os, std::span<const QSweepRow> rows);
void write_pathwise_csv(std::ostream& os, const PathwiseReport& report);
void write_stokes_csv(std::ostream& os, std::span<const StokesRow> rows);

/// Tables 5.1/5.2 style summary: one block per quantity with k and per-q
/// error/order columns.
void print_convergence_summary(std::ostream& os, const ErrorReport& report);

}  // namespace stochns
