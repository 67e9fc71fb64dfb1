// stochns: command-line driver for the stochastic Navier-Stokes studies.
//
//   stochns [--config FILE] [options] <mesh-info|run-single|convergence|q-sweep|pathwise|stokes-verify>
//
// Exit codes: 0 success, 1 configuration/validation, 2 numerical failure, 3 I/O.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stochns/assembly.hpp"
#include "stochns/errors.hpp"
#include "stochns/experiments.hpp"
#include "stochns/noise.hpp"
#include "stochns/saddle_solver.hpp"
#include "stochns/stepper.hpp"

namespace {

using namespace stochns;

enum ExitCode { kOk = 0, kConfig = 1, kNumerical = 2, kIo = 3 };

struct RunConfig {
  StudyConfig study;
  double k = 1.0 / 16;             // run-single step
  bool body_force = true;          // run-single only
  std::uint64_t path_index = 0;    // run-single path
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::vector<double> q_values = {2, 4, 8, 16, 24};
  std::vector<int> ladder = {4, 8, 16, 32};
  std::string out = ".";
  bool quiet = false;
};

std::ofstream open_output(const RunConfig& rc, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(rc.out, ec);
  const auto path = std::filesystem::path(rc.out) / name;
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  return f;
}

void close_output(std::ofstream& f, const std::string& name) {
  f.close();
  if (!f) throw IoError("failed writing " + name);
}

ProgressFn progress(const RunConfig& rc, const char* label) {
  if (rc.quiet) return {};
  return [label](int done, int total) { std::cerr << label << ": " << done << '/' << total << " paths\n"; };
}

int mesh_info(const RunConfig& rc) {
  const int n = rc.study.mesh_n;
  if (n < 1) throw ConfigError("mesh_n must be >= 1 (got " + std::to_string(n) + ")");
  const Mesh mesh = build_uniform_mesh(n);
  const DofMap dofs(mesh);
  int dirichlet = 0;
  for (bool b : dofs.dirichlet_mask()) dirichlet += b;
  std::cout << "n " << n << "\nh " << mesh.h() << "\nvertices " << mesh.num_vertices() << "\nedges "
            << mesh.num_edges() << "\ntriangles " << mesh.num_triangles() << "\nvelocity_dofs "
            << dofs.num_velocity_dofs() << "\nfree_velocity_dofs " << dofs.num_velocity_dofs() - dirichlet
            << "\npressure_dofs " << dofs.num_pressure_dofs() << '\n';
  return kOk;
}

int run_single(const RunConfig& rc) {
  StepperConfig sc = rc.study.stepper(rc.k);
  sc.body_force = rc.body_force;
  sc.validate();
  const auto disc = make_discretization(rc.study.mesh_n, rc.study.modes);
  const auto system = build_system(disc->forms, disc->dofs, sc.nu, sc.k);
  const WienerPath path = generate_path(rc.study.master_seed, rc.path_index, sc.steps(), sc.modes, sc.final_time);
  const Trajectory t = run_path(sc, *disc, *system, path, 1, {}, initial_state(*disc, VectorFunction{}));
  auto f = open_output(rc, "trajectory.csv");
  write_trajectory_csv_header(f);
  write_trajectory_csv(f, t);
  close_output(f, "trajectory.csv");
  const auto& last = t.steps.back();
  std::cout << "path " << rc.path_index << " steps " << t.steps.size() << " final ||u||_L2 " << last.l2_u
            << " ||grad u|| " << last.h1_u << " max Picard iterations " << t.max_picard_iterations
            << " unconverged " << t.unconverged_steps << '\n';
  return kOk;
}

int convergence(const RunConfig& rc) {
  const ErrorReport r = run_convergence_study(rc.study, progress(rc, "convergence"));
  auto f = open_output(rc, "convergence.csv");
  write_convergence_csv(f, r);
  close_output(f, "convergence.csv");
  print_convergence_summary(std::cout, r);
  return kOk;
}

int q_sweep(const RunConfig& rc) {
  const auto rows = run_q_sweep(rc.study, rc.q_values, progress(rc, "q-sweep"));
  auto f = open_output(rc, "qsweep.csv");
  write_qsweep_csv(f, rows);
  close_output(f, "qsweep.csv");
  std::cout << "q-sweep at k = " << rc.study.k_list.front() << "\n";
  write_qsweep_csv(std::cout, rows);
  return kOk;
}

int pathwise(const RunConfig& rc) {
  const PathwiseReport r = run_pathwise_study(rc.study, rc.seeds, progress(rc, "pathwise"));
  auto f = open_output(rc, "pathwise.csv");
  write_pathwise_csv(f, r);
  close_output(f, "pathwise.csv");
  std::cout << "seed  slope_u  slope_P\n";
  for (const auto& s : r.series) std::cout << s.path_index << "  " << s.slope_u << "  " << s.slope_p << '\n';
  return kOk;
}

int stokes_verify(const RunConfig& rc) {
  const auto rows = run_stokes_verification(rc.ladder, rc.study.nu);
  auto f = open_output(rc, "stokes.csv");
  write_stokes_csv(f, rows);
  close_output(f, "stokes.csv");
  write_stokes_csv(std::cout, rows);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Navier-Stokes solver: Taylor-Hood FEM, implicit Euler-Maruyama, Monte Carlo studies"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; keys mirror the long option names");

  RunConfig rc;
  StudyConfig& s = rc.study;
  app.add_option("--master_seed,--seed", s.master_seed, "Master RNG seed")->capture_default_str();
  app.add_option("--num_paths,--paths", s.num_paths, "Monte Carlo sample count")->capture_default_str();
  app.add_option("--workers", s.workers, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--out", rc.out, "Output directory for CSV files")->capture_default_str();
  app.add_option("--mesh_n,-n", s.mesh_n, "Mesh subdivisions per side")->capture_default_str();
  app.add_option("--modes,-J", s.modes, "Noise mode cutoff J")->capture_default_str();
  app.add_option("--final_time", s.final_time, "Final time T")->capture_default_str();
  app.add_option("--nu", s.nu, "Viscosity")->capture_default_str();
  app.add_option("--g_scale", s.g_scale, "Noise amplitude g")->capture_default_str();
  app.add_option("--k_list", s.k_list, "Coarse time steps")->capture_default_str()->delimiter(',');
  app.add_option("--k0", s.k0, "Reference time step")->capture_default_str();
  app.add_option("--q_list", s.q_list, "Moment exponents for the convergence table")->capture_default_str()->delimiter(',');
  app.add_option("--picard_tol", s.picard_tol, "Picard relative tolerance")->capture_default_str();
  app.add_option("--picard_max", s.picard_max, "Picard iteration cap")->capture_default_str();
  app.add_flag("--permissive,!--strict", s.permissive, "Accept unconverged Picard steps with a warning");
  app.add_flag("--abort_on_failure,!--continue_on_failure", s.abort_on_failure, "Abort the study on a failed path");
  app.add_option("--exp_sigma", s.exp_sigma, "Sigma of the exponential-moment diagnostic")->capture_default_str();
  app.add_option("--k", rc.k, "Time step for run-single")->capture_default_str();
  app.add_flag("--body_force,!--no_body_force", rc.body_force, "Include the body force (run-single)");
  app.add_option("--path_index", rc.path_index, "Path index for run-single")->capture_default_str();
  app.add_option("--seeds", rc.seeds, "Path indices for pathwise")->capture_default_str()->delimiter(',');
  app.add_option("--q_values", rc.q_values, "Exponents for q-sweep")->capture_default_str()->delimiter(',');
  app.add_option("--ladder", rc.ladder, "Mesh ladder for stokes-verify")->capture_default_str()->delimiter(',');
  app.add_flag("--quiet", rc.quiet, "Suppress progress on stderr");

  int (*action)(const RunConfig&) = nullptr;
  auto sub = [&](const char* name, const char* help, int (*fn)(const RunConfig&)) {
    app.add_subcommand(name, help)->callback([&action, fn] { action = fn; });
  };
  sub("mesh-info", "Print mesh and dof statistics", mesh_info);
  sub("run-single", "Run one sample path and write trajectory.csv", run_single);
  sub("convergence", "Monte Carlo temporal convergence study (convergence.csv)", convergence);
  sub("q-sweep", "Moment growth in q at the first k (qsweep.csv)", q_sweep);
  sub("pathwise", "Per-path errors over the k ladder (pathwise.csv)", pathwise);
  sub("stokes-verify", "Manufactured Stokes spatial convergence (stokes.csv)", stokes_verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (action != mesh_info && action != stokes_verify && action != run_single) s.validate();
    return action(rc);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const PicardError& e) {
    std::cerr << "numerical error (Picard, step " << e.step << "): " << e.what() << '\n';
    return kNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
}
