#include "stochns/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "stochns/errors.hpp"

namespace stochns {

using std::numbers::pi;

namespace {

int ratio_of(double k, double k0) { return static_cast<int>(std::llround(k / k0)); }

std::string format_step(double k) {
  const double inv = 1.0 / k;
  if (std::abs(inv - std::round(inv)) < 1e-9 * inv) {
    return "1/" + std::to_string(std::llround(inv));
  }
  std::ostringstream os;
  os << k;
  return os.str();
}

std::ostream& csv_number(std::ostream& os, double v) { return os << v; }

}  // namespace

int StudyConfig::fine_steps() const { return static_cast<int>(std::llround(final_time / k0)); }

int StudyConfig::refinement_ratio(double k) const { return ratio_of(k, k0); }

StepperConfig StudyConfig::stepper(double k) const {
  StepperConfig s;
  s.final_time = final_time;
  s.k = k;
  s.nu = nu;
  s.g_scale = g_scale;
  s.modes = modes;
  s.picard_tol = picard_tol;
  s.picard_max = picard_max;
  s.permissive = permissive;
  s.diagnostics = true;
  return s;
}

void StudyConfig::validate() const {
  if (num_paths < 2) throw ConfigError("paths must be >= 2");
  if (mesh_n < 1) throw ConfigError("n must be >= 1");
  if (k_list.empty()) throw ConfigError("k list is empty");
  if (q_list.empty()) throw ConfigError("q list is empty");
  for (double q : q_list) {
    if (!(q >= 1.0)) throw ConfigError("every q must be >= 1");
  }
  if (!(exp_sigma >= 0.0)) throw ConfigError("exp_sigma must be nonnegative");
  stepper(k0).validate();
  for (double k : k_list) {
    stepper(k).validate();
    const int r = refinement_ratio(k);
    if (r < 1 || std::abs(r * k0 - k) > 1e-12 * k) {
      throw ConfigError("k = " + std::to_string(k) + " is not an integer multiple of k0 = " + std::to_string(k0));
    }
  }
}

double moment_error(std::span<const double> samples, double q) {
  if (samples.empty()) throw std::invalid_argument("moment_error: no samples");
  if (!(q >= 1.0)) throw std::invalid_argument("moment_error: q must be >= 1");
  // Scale by the largest sample so high powers neither overflow nor underflow.
  const double scale = *std::max_element(samples.begin(), samples.end(),
                                         [](double a, double b) { return std::abs(a) < std::abs(b); });
  const double s = std::abs(scale);
  if (s == 0.0) return 0.0;
  double sum = 0.0;
  for (double v : samples) sum += std::pow(std::abs(v) / s, q);
  return s * std::pow(sum / static_cast<double>(samples.size()), 1.0 / q);
}

std::vector<double> fit_rate(std::span<const double> errors) {
  std::vector<double> ks(errors.size());
  for (std::size_t i = 0; i < ks.size(); ++i) ks[i] = std::ldexp(1.0, -static_cast<int>(i));
  return fit_rate(errors, ks);
}

std::vector<double> fit_rate(std::span<const double> errors, std::span<const double> ks) {
  if (errors.size() != ks.size()) throw std::invalid_argument("fit_rate: size mismatch");
  for (double e : errors) {
    if (!(e > 0.0)) throw std::invalid_argument("fit_rate: errors must be positive");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    out.push_back(std::log(errors[i] / errors[i + 1]) / std::log(ks[i] / ks[i + 1]));
  }
  return out;
}

double fit_slope(std::span<const double> errors, std::span<const double> ks) {
  if (errors.size() != ks.size() || errors.size() < 2) throw std::invalid_argument("fit_slope: need >= 2 matched points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(errors.size());
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(errors[i] > 0.0) || !(ks[i] > 0.0)) throw std::invalid_argument("fit_slope: values must be positive");
    mx += std::log(ks[i]) / n;
    my += std::log(errors[i]) / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const double dx = std::log(ks[i]) - mx;
    sxy += dx * (std::log(errors[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_slope: step sizes must differ");
  return sxy / sxx;
}

VelocityPathError velocity_path_error(const Trajectory& coarse, const Trajectory& reference,
                                      const Discretization& disc, double nu) {
  if (coarse.snapshots.empty()) throw std::invalid_argument("velocity_path_error: coarse trajectory is empty");
  const int last = coarse.snapshots.back().step;
  VelocityPathError err;
  double energy_sq = 0.0;
  int counted = 0;
  for (const auto& snap : coarse.snapshots) {
    if (snap.step == 0) continue;
    const long long m = std::llround(snap.time / reference.k);
    if (std::abs(static_cast<double>(m) * reference.k - snap.time) > 1e-12 * std::max(1.0, snap.time)) {
      throw std::invalid_argument("velocity_path_error: coarse time " + std::to_string(snap.time) +
                                  " is not on the reference grid");
    }
    const Snapshot* ref = nullptr;
    try {
      ref = &reference.at_step(static_cast<int>(m));
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("velocity_path_error: reference has no snapshot at t = " +
                                  std::to_string(snap.time));
    }
    const Eigen::VectorXd d = ref->u - snap.u;
    energy_sq += d.dot(disc.forms.stiffness * d);
    ++counted;
    if (snap.step == last) err.l2 = disc.l2_norm(d);
  }
  if (counted != last) {
    throw std::invalid_argument("velocity_path_error: coarse trajectory must hold every step");
  }
  err.energy = std::sqrt(nu * coarse.k * energy_sq);
  return err;
}

double pressure_path_error(const Snapshot& coarse, const Snapshot& reference, const Discretization& disc) {
  if (std::abs(coarse.time - reference.time) > 1e-12 * std::max(1.0, coarse.time)) {
    throw std::invalid_argument("pressure_path_error: snapshots at different times");
  }
  return disc.pressure_l2_norm(reference.pressure_accum - coarse.pressure_accum);
}

StudyContext::StudyContext(const StudyConfig& config)
    : config_(config), disc_(make_discretization(config.mesh_n, config.modes)) {
  config_.validate();
  reference_system_ = build_system(disc_->forms, disc_->dofs, config_.nu, config_.k0);
  for (double k : config_.k_list) {
    coarse_systems_.push_back(build_system(disc_->forms, disc_->dofs, config_.nu, k));
  }
}

PathErrors StudyContext::run_path_errors(std::uint64_t path_index) const {
  const StudyConfig& c = config_;
  const Discretization& disc = *disc_;
  PathErrors out;
  out.path_index = path_index;
  const int fine = c.fine_steps();
  int stride = 0;
  for (double k : c.k_list) stride = std::gcd(stride, c.refinement_ratio(k));

  try {
    const WienerPath path = generate_path(c.master_seed, path_index, fine, c.modes, c.final_time);
    const PathState start = initial_state(disc, Eigen::VectorXd());
    std::vector<int> ref_checkpoints = every_step(fine, stride);
    const Trajectory ref =
        run_path(c.stepper(c.k0), disc, *reference_system_, path, 1, ref_checkpoints, start);
    out.max_grad_sq = ref.max_grad_sq;
    out.max_divergence_ratio = ref.max_divergence_ratio;
    out.max_energy_residual = ref.max_energy_residual;
    out.max_picard_iterations = ref.max_picard_iterations;
    for (std::size_t i = 0; i < c.k_list.size(); ++i) {
      const StepperConfig sc = c.stepper(c.k_list[i]);
      const int r = c.refinement_ratio(c.k_list[i]);
      const Trajectory coarse =
          run_path(sc, disc, *coarse_systems_[i], path, r, every_step(sc.steps()), start);
      const VelocityPathError ve = velocity_path_error(coarse, ref, disc, c.nu);
      out.l2.push_back(ve.l2);
      out.energy.push_back(ve.energy);
      out.pressure.push_back(pressure_path_error(coarse.snapshots.back(), ref.snapshots.back(), disc));
      out.max_divergence_ratio = std::max(out.max_divergence_ratio, coarse.max_divergence_ratio);
      out.max_energy_residual = std::max(out.max_energy_residual, coarse.max_energy_residual);
      out.max_picard_iterations = std::max(out.max_picard_iterations, coarse.max_picard_iterations);
    }
  } catch (const PicardError& e) {
    out.ok = false;
    out.failure = "seed " + std::to_string(c.master_seed) + " path " + std::to_string(path_index) +
                  " step " + std::to_string(e.step) + ": " + e.what();
  } catch (const NumericalError& e) {
    out.ok = false;
    out.failure = "seed " + std::to_string(c.master_seed) + " path " + std::to_string(path_index) + ": " + e.what();
  }
  return out;
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn, const ProgressFn& progress) {
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::max(1, std::min(workers, count));
  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex mutex;
  std::exception_ptr error;
  auto body = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
      const int finished = ++done;
      if (progress) {
        std::lock_guard lock(mutex);
        progress(finished, count);
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

const ErrorRow& ErrorReport::row(double k, double q) const {
  for (const auto& r : rows) {
    if (std::abs(r.k - k) <= 1e-14 * k && r.q == q) return r;
  }
  throw std::out_of_range("ErrorReport: no row for k = " + std::to_string(k) + ", q = " + std::to_string(q));
}

namespace {

std::vector<double> collect(const std::vector<PathErrors>& paths, std::size_t i,
                            std::vector<double> PathErrors::*member) {
  std::vector<double> out;
  for (const auto& p : paths) {
    if (p.ok) out.push_back((p.*member)[i]);
  }
  return out;
}

}  // namespace

std::vector<double> ErrorReport::velocity_samples(std::size_t i) const { return collect(paths, i, &PathErrors::l2); }
std::vector<double> ErrorReport::pressure_samples(std::size_t i) const { return collect(paths, i, &PathErrors::pressure); }
std::vector<double> ErrorReport::energy_samples(std::size_t i) const { return collect(paths, i, &PathErrors::energy); }

void fill_rows(ErrorReport& report) {
  const StudyConfig& c = report.config;
  report.rows.clear();
  for (double q : c.q_list) {
    std::vector<double> eu, ep;
    for (std::size_t i = 0; i < c.k_list.size(); ++i) {
      ErrorRow row;
      row.k = c.k_list[i];
      row.q = q;
      row.e_u = moment_error(report.velocity_samples(i), q);
      row.e_energy = moment_error(report.energy_samples(i), q);
      row.e_p = moment_error(report.pressure_samples(i), q);
      eu.push_back(row.e_u);
      ep.push_back(row.e_p);
      report.rows.push_back(row);
    }
    const std::size_t first = report.rows.size() - c.k_list.size();
    for (std::size_t i = 0; i + 1 < c.k_list.size(); ++i) {
      const double ks[2] = {c.k_list[i], c.k_list[i + 1]};
      if (eu[i] > 0.0 && eu[i + 1] > 0.0) {
        const double e[2] = {eu[i], eu[i + 1]};
        report.rows[first + i + 1].order_u = fit_rate(e, ks).front();
      }
      if (ep[i] > 0.0 && ep[i + 1] > 0.0) {
        const double e[2] = {ep[i], ep[i + 1]};
        report.rows[first + i + 1].order_p = fit_rate(e, ks).front();
      }
    }
  }
}

ErrorReport run_convergence_study(const StudyConfig& config, const ProgressFn& progress) {
  const auto start = std::chrono::steady_clock::now();
  const StudyContext ctx(config);
  ErrorReport report;
  report.config = config;
  report.paths.resize(config.num_paths);
  parallel_for(
      config.num_paths, config.workers,
      [&](int i) { report.paths[i] = ctx.run_path_errors(static_cast<std::uint64_t>(i)); }, progress);

  int ok = 0;
  double grad_mean = 0.0;
  for (const auto& p : report.paths) {
    if (!p.ok) {
      report.failures.push_back(p.failure);
      continue;
    }
    ++ok;
    report.max_divergence_ratio = std::max(report.max_divergence_ratio, p.max_divergence_ratio);
    report.max_energy_residual = std::max(report.max_energy_residual, p.max_energy_residual);
    report.exp_moment += std::exp(config.exp_sigma * p.max_grad_sq);
    grad_mean += p.max_grad_sq;
  }
  if (!report.failures.empty() && config.abort_on_failure) {
    throw NumericalError("study aborted: " + report.failures.front());
  }
  if (ok == 0) throw NumericalError("study produced no successful path");
  report.exp_moment /= ok;
  grad_mean /= ok;
  // Zero initial state, so the initial gradient term vanishes.
  report.exp_moment_bound = 10.0 * std::exp(config.exp_sigma * grad_mean);
  fill_rows(report);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<QSweepRow> q_sweep_from_report(const ErrorReport& report, std::size_t k_index,
                                           std::span<const double> q_values) {
  const auto u = report.velocity_samples(k_index);
  const auto p = report.pressure_samples(k_index);
  std::vector<QSweepRow> rows;
  for (double q : q_values) rows.push_back({q, moment_error(u, q), moment_error(p, q)});
  return rows;
}

std::vector<QSweepRow> run_q_sweep(const StudyConfig& config, std::span<const double> q_values,
                                   const ProgressFn& progress) {
  StudyConfig c = config;
  c.k_list = {config.k_list.front()};
  c.q_list.assign(q_values.begin(), q_values.end());
  const ErrorReport report = run_convergence_study(c, progress);
  return q_sweep_from_report(report, 0, q_values);
}

PathwiseReport run_pathwise_study(const StudyConfig& config, std::span<const std::uint64_t> path_indices,
                                  const ProgressFn& progress) {
  StudyConfig c = config;
  c.num_paths = std::max<int>(2, static_cast<int>(path_indices.size()));
  const StudyContext ctx(c);
  std::vector<PathErrors> results(path_indices.size());
  parallel_for(
      static_cast<int>(path_indices.size()), c.workers,
      [&](int i) { results[i] = ctx.run_path_errors(path_indices[i]); }, progress);
  PathwiseReport report;
  report.k_list = c.k_list;
  for (const auto& r : results) {
    if (!r.ok) throw NumericalError("pathwise study failed: " + r.failure);
    PathwiseSeries s;
    s.path_index = r.path_index;
    s.err_u = r.l2;
    s.err_p = r.pressure;
    s.order_u = fit_rate(s.err_u, c.k_list);
    s.order_p = fit_rate(s.err_p, c.k_list);
    if (c.k_list.size() >= 2) {
      s.slope_u = fit_slope(s.err_u, c.k_list);
      s.slope_p = fit_slope(s.err_p, c.k_list);
    }
    report.series.push_back(std::move(s));
  }
  return report;
}

Vec2 ManufacturedStokes::velocity(const Point& p) const {
  const double sx = std::sin(pi * p.x), sy = std::sin(pi * p.y);
  return {pi * sx * sx * std::sin(2 * pi * p.y), -pi * std::sin(2 * pi * p.x) * sy * sy};
}

Mat2 ManufacturedStokes::velocity_gradient(const Point& p) const {
  const double sx = std::sin(pi * p.x), sy = std::sin(pi * p.y);
  const double s2x = std::sin(2 * pi * p.x), s2y = std::sin(2 * pi * p.y);
  const double c2x = std::cos(2 * pi * p.x), c2y = std::cos(2 * pi * p.y);
  Mat2 g;
  // d/dx sin^2(pi x) = pi sin(2 pi x)
  g(0, 0) = pi * pi * s2x * s2y;
  g(0, 1) = 2 * pi * pi * sx * sx * c2y;
  g(1, 0) = -2 * pi * pi * c2x * sy * sy;
  g(1, 1) = -pi * pi * s2x * s2y;
  return g;
}

double ManufacturedStokes::pressure(const Point& p) const { return std::sin(pi * p.x) * std::cos(pi * p.y); }

Vec2 ManufacturedStokes::force(const Point& p) const {
  const double x = p.x, y = p.y;
  const double pi3 = pi * pi * pi;
  const double lap_u1 = 2 * pi3 * std::sin(2 * pi * y) * (2 * std::cos(2 * pi * x) - 1);
  const double lap_u2 = -2 * pi3 * std::sin(2 * pi * x) * (2 * std::cos(2 * pi * y) - 1);
  const double dpx = pi * std::cos(pi * x) * std::cos(pi * y);
  const double dpy = -pi * std::sin(pi * x) * std::sin(pi * y);
  return {-nu * lap_u1 + dpx, -nu * lap_u2 + dpy};
}

std::vector<StokesRow> run_stokes_verification(std::span<const int> mesh_ladder, double nu) {
  const ManufacturedStokes exact{nu};
  std::vector<StokesRow> rows;
  for (int n : mesh_ladder) {
    const Mesh mesh = build_uniform_mesh(n);
    const DofMap dofs(mesh);
    const QuadratureTables qt(mesh, degree5_rule());
    const AssembledForms forms = assemble_bilinear_forms(dofs, qt);
    const SaddleSystem system(forms, dofs, SaddleCoefficients{0.0, nu, 1.0});
    const Eigen::VectorXd load = assemble_load(dofs, qt, [&](const Point& x) { return exact.force(x); });
    const SaddleSolution sol = system.solve(load);
    StokesRow row;
    row.n = n;
    row.h = mesh.h();
    row.err_u_l2 = velocity_l2_error(sol.u, dofs, qt, [&](const Point& x) { return exact.velocity(x); });
    row.err_u_h1 = velocity_h1_seminorm_error(sol.u, dofs, qt,
                                              [&](const Point& x) { return exact.velocity_gradient(x); });
    row.err_p_l2 = pressure_l2_error(sol.p, dofs, qt, [&](const Point& x) { return exact.pressure(x); });
    if (!rows.empty()) {
      const StokesRow& prev = rows.back();
      const double lr = std::log(prev.h / row.h);
      row.order_u_l2 = std::log(prev.err_u_l2 / row.err_u_l2) / lr;
      row.order_u_h1 = std::log(prev.err_u_h1 / row.err_u_h1) / lr;
      row.order_p_l2 = std::log(prev.err_p_l2 / row.err_p_l2) / lr;
    }
    rows.push_back(row);
  }
  return rows;
}

namespace {

struct PrecisionGuard {
  explicit PrecisionGuard(std::ostream& os) : os(os), flags(os.flags()), prec(os.precision(12)) {}
  ~PrecisionGuard() {
    os.flags(flags);
    os.precision(prec);
  }
  std::ostream& os;
  std::ios::fmtflags flags;
  std::streamsize prec;
};

void optional_cell(std::ostream& os, const std::optional<double>& v) {
  if (v) csv_number(os, *v);
}

}  // namespace

void write_convergence_csv(std::ostream& os, const ErrorReport& report) {
  PrecisionGuard guard(os);
  os << "k,q,E_u_q,E_energy,E_P_q,order_u,order_P\n";
  for (const auto& r : report.rows) {
    csv_number(os, r.k) << ',';
    csv_number(os, r.q) << ',';
    csv_number(os, r.e_u) << ',';
    csv_number(os, r.e_energy) << ',';
    csv_number(os, r.e_p) << ',';
    optional_cell(os, r.order_u);
    os << ',';
    optional_cell(os, r.order_p);
    os << '\n';
  }
}

void write_qsweep_csv(std::ostream& os, std::span<const QSweepRow> rows) {
  PrecisionGuard guard(os);
  os << "q,E_u_q,E_P_q\n";
  for (const auto& r : rows) {
    csv_number(os, r.q) << ',';
    csv_number(os, r.e_u) << ',';
    csv_number(os, r.e_p) << '\n';
  }
}

void write_pathwise_csv(std::ostream& os, const PathwiseReport& report) {
  PrecisionGuard guard(os);
  os << "seed,k,err_u_L2,err_P_L2\n";
  for (const auto& s : report.series) {
    for (std::size_t i = 0; i < report.k_list.size(); ++i) {
      os << s.path_index << ',';
      csv_number(os, report.k_list[i]) << ',';
      csv_number(os, s.err_u[i]) << ',';
      csv_number(os, s.err_p[i]) << '\n';
    }
  }
}

void write_stokes_csv(std::ostream& os, std::span<const StokesRow> rows) {
  PrecisionGuard guard(os);
  os << "n,h,err_u_L2,err_u_H1,err_p_L2,order_u_L2,order_u_H1,order_p_L2\n";
  for (const auto& r : rows) {
    os << r.n << ',';
    csv_number(os, r.h) << ',';
    csv_number(os, r.err_u_l2) << ',';
    csv_number(os, r.err_u_h1) << ',';
    csv_number(os, r.err_p_l2) << ',';
    optional_cell(os, r.order_u_l2);
    os << ',';
    optional_cell(os, r.order_u_h1);
    os << ',';
    optional_cell(os, r.order_p_l2);
    os << '\n';
  }
}

void print_convergence_summary(std::ostream& os, const ErrorReport& report) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  const auto& c = report.config;
  auto block = [&](const char* title, double ErrorRow::*value, std::optional<double> ErrorRow::*order) {
    os << title << '\n' << std::left << std::setw(8) << "k";
    for (double q : c.q_list) {
      std::ostringstream head;
      head << "q=" << q;
      os << std::setw(14) << head.str() << std::setw(8) << "order";
    }
    os << '\n';
    for (double k : c.k_list) {
      os << std::setw(8) << format_step(k);
      for (double q : c.q_list) {
        const ErrorRow& r = report.row(k, q);
        os << std::setw(14) << std::setprecision(6) << r.*value;
        if (r.*order) {
          std::ostringstream o;
          o << std::fixed << std::setprecision(4) << *(r.*order);
          os << std::setw(8) << o.str();
        } else {
          os << std::setw(8) << "";
        }
      }
      os << '\n';
    }
  };
  block("velocity L2 error at T", &ErrorRow::e_u, &ErrorRow::order_u);
  os << '\n';
  block("time-averaged pressure L2 error at T", &ErrorRow::e_p, &ErrorRow::order_p);
  os.flags(flags);
  os.precision(prec);
}

}  // namespace stochns
