#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stochns/assembly.hpp"
#include "stochns/errors.hpp"
#include "stochns/experiments.hpp"
#include "stochns/mesh.hpp"
#include "stochns/noise.hpp"
#include "stochns/saddle_solver.hpp"
#include "stochns/stepper.hpp"

namespace py = pybind11;
using namespace stochns;

namespace {

py::dict row_dict(const ErrorRow& r) {
  py::dict d;
  d["k"] = r.k;
  d["q"] = r.q;
  d["E_u"] = r.e_u;
  d["E_energy"] = r.e_energy;
  d["E_P"] = r.e_p;
  d["order_u"] = r.order_u ? py::cast(*r.order_u) : py::none();
  d["order_P"] = r.order_p ? py::cast(*r.order_p) : py::none();
  return d;
}

py::dict trajectory_dict(const Trajectory& t) {
  std::vector<double> time, l2, h1, energy, picard;
  for (const auto& s : t.steps) {
    time.push_back(s.time);
    l2.push_back(s.l2_u);
    h1.push_back(s.h1_u);
    energy.push_back(s.energy_residual);
    picard.push_back(s.picard_iterations);
  }
  py::dict d;
  d["path_index"] = t.path_index;
  d["t"] = time;
  d["norm_L2_u"] = l2;
  d["norm_H1_u"] = h1;
  d["energy_residual"] = energy;
  d["picard_iterations"] = picard;
  d["max_divergence_ratio"] = t.max_divergence_ratio;
  d["unconverged_steps"] = t.unconverged_steps;
  d["u_final"] = t.snapshots.empty() ? Eigen::VectorXd() : t.snapshots.back().u;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stochastic Navier-Stokes solver core (Taylor-Hood P2/P1, implicit Euler-Maruyama)";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::class_<Mesh>(m, "Mesh")
      .def_property_readonly("n", &Mesh::subdivisions)
      .def_property_readonly("h", &Mesh::h)
      .def_property_readonly("num_vertices", &Mesh::num_vertices)
      .def_property_readonly("num_edges", &Mesh::num_edges)
      .def_property_readonly("num_triangles", &Mesh::num_triangles)
      .def("locate", [](const Mesh& mesh, double x, double y) {
        const Location loc = mesh.locate({x, y});
        return py::make_tuple(loc.triangle, loc.bary);
      });
  m.def("build_uniform_mesh", &build_uniform_mesh, py::arg("n"));

  py::class_<Discretization, std::shared_ptr<Discretization>>(m, "Discretization")
      .def(py::init<int, int>(), py::arg("n"), py::arg("modes") = 4)
      .def_property_readonly("mesh", [](const Discretization& d) -> const Mesh& { return d.mesh; },
                             py::return_value_policy::reference_internal)
      .def_property_readonly("num_velocity_dofs", [](const Discretization& d) { return d.dofs.num_velocity_dofs(); })
      .def_property_readonly("num_pressure_dofs", [](const Discretization& d) { return d.dofs.num_pressure_dofs(); })
      .def("l2_norm", &Discretization::l2_norm)
      .def("h1_seminorm", &Discretization::h1_seminorm)
      .def("pressure_l2_norm", &Discretization::pressure_l2_norm)
      .def("btilde",
           [](const Discretization& d, const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
             return d.convection.btilde({a}, {b}, {c});
           })
      .def("interpolate_velocity",
           [](const Discretization& d, const std::function<std::pair<double, double>(double, double)>& f) {
             return interpolate_velocity(d.dofs, [&](const Point& x) {
                      const auto v = f(x.x, x.y);
                      return Vec2(v.first, v.second);
                    }).coeffs;
           })
      .def("apply_dirichlet",
           [](const Discretization& d, Eigen::VectorXd u) {
             VelocityField f{std::move(u)};
             apply_dirichlet(d.dofs, f);
             return f.coeffs;
           })
      .def("inf_sup_constant", [](const Discretization& d) { return inf_sup_constant(d.forms, d.dofs).beta; });

  m.def("mode_weight", &mode_weight, py::arg("j1"), py::arg("j2"));
  m.def(
      "wiener_draws",
      [](std::uint64_t seed, std::uint64_t path, int fine_steps, int modes) {
        const WienerPath p = generate_path(seed, path, fine_steps, modes);
        py::array_t<double> out({fine_steps, modes, modes});
        std::copy(p.xi.begin(), p.xi.end(), out.mutable_data());
        return out;
      },
      py::arg("master_seed"), py::arg("path_index"), py::arg("fine_steps"), py::arg("modes"),
      "Standard normal draws xi[step, j1-1, j2-1] of one path.");
  m.def(
      "coarse_increment",
      [](std::uint64_t seed, std::uint64_t path, int fine_steps, int modes, int coarse_step, int ratio) {
        return Eigen::MatrixXd(coarse_mode_increment(generate_path(seed, path, fine_steps, modes), coarse_step, ratio));
      },
      py::arg("master_seed"), py::arg("path_index"), py::arg("fine_steps"), py::arg("modes"),
      py::arg("coarse_step"), py::arg("ratio"));

  m.def("moment_error", [](const std::vector<double>& s, double q) { return moment_error(s, q); },
        py::arg("samples"), py::arg("q"));
  m.def("fit_rate", [](const std::vector<double>& e, std::optional<std::vector<double>> ks) {
        return ks ? fit_rate(e, *ks) : fit_rate(e);
      }, py::arg("errors"), py::arg("ks") = py::none());
  m.def("fit_slope", [](const std::vector<double>& e, const std::vector<double>& ks) { return fit_slope(e, ks); },
        py::arg("errors"), py::arg("ks"));

  py::class_<StudyConfig>(m, "StudyConfig")
      .def(py::init<>())
      .def_readwrite("master_seed", &StudyConfig::master_seed)
      .def_readwrite("num_paths", &StudyConfig::num_paths)
      .def_readwrite("modes", &StudyConfig::modes)
      .def_readwrite("mesh_n", &StudyConfig::mesh_n)
      .def_readwrite("final_time", &StudyConfig::final_time)
      .def_readwrite("nu", &StudyConfig::nu)
      .def_readwrite("g_scale", &StudyConfig::g_scale)
      .def_readwrite("k_list", &StudyConfig::k_list)
      .def_readwrite("k0", &StudyConfig::k0)
      .def_readwrite("q_list", &StudyConfig::q_list)
      .def_readwrite("picard_tol", &StudyConfig::picard_tol)
      .def_readwrite("picard_max", &StudyConfig::picard_max)
      .def_readwrite("permissive", &StudyConfig::permissive)
      .def_readwrite("abort_on_failure", &StudyConfig::abort_on_failure)
      .def_readwrite("workers", &StudyConfig::workers)
      .def_readwrite("exp_sigma", &StudyConfig::exp_sigma)
      .def("validate", &StudyConfig::validate);

  m.def(
      "run_single",
      [](const StudyConfig& c, double k, std::uint64_t path_index, bool body_force) {
        StepperConfig sc = c.stepper(k);
        sc.body_force = body_force;
        py::gil_scoped_release release;
        sc.validate();
        const auto disc = make_discretization(c.mesh_n, c.modes);
        const auto sys = build_system(disc->forms, disc->dofs, sc.nu, sc.k);
        const WienerPath path = generate_path(c.master_seed, path_index, sc.steps(), sc.modes, sc.final_time);
        const Trajectory t =
            run_path(sc, *disc, *sys, path, 1, {sc.steps()}, initial_state(*disc, VectorFunction{}));
        py::gil_scoped_acquire acquire;
        return trajectory_dict(t);
      },
      py::arg("config"), py::arg("k"), py::arg("path_index") = 0, py::arg("body_force") = true,
      "Run one sample path from rest; returns per-step diagnostics.");

  m.def(
      "run_convergence_study",
      [](const StudyConfig& c) {
        ErrorReport r;
        {
          py::gil_scoped_release release;
          r = run_convergence_study(c);
        }
        py::list rows;
        for (const auto& row : r.rows) rows.append(row_dict(row));
        py::dict d;
        d["rows"] = rows;
        d["max_divergence_ratio"] = r.max_divergence_ratio;
        d["max_energy_residual"] = r.max_energy_residual;
        d["exp_moment"] = r.exp_moment;
        d["exp_moment_bound"] = r.exp_moment_bound;
        d["failures"] = r.failures;
        d["seconds"] = r.seconds;
        return d;
      },
      py::arg("config"));

  m.def(
      "run_q_sweep",
      [](const StudyConfig& c, const std::vector<double>& qs) {
        std::vector<QSweepRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_q_sweep(c, qs);
        }
        py::list out;
        for (const auto& r : rows) out.append(py::dict(py::arg("q") = r.q, py::arg("E_u") = r.e_u, py::arg("E_P") = r.e_p));
        return out;
      },
      py::arg("config"), py::arg("q_values"));

  m.def(
      "run_pathwise_study",
      [](const StudyConfig& c, const std::vector<std::uint64_t>& seeds) {
        PathwiseReport r;
        {
          py::gil_scoped_release release;
          r = run_pathwise_study(c, seeds);
        }
        py::list out;
        for (const auto& s : r.series) {
          out.append(py::dict(py::arg("path_index") = s.path_index, py::arg("err_u") = s.err_u,
                              py::arg("err_P") = s.err_p, py::arg("slope_u") = s.slope_u,
                              py::arg("slope_P") = s.slope_p));
        }
        return out;
      },
      py::arg("config"), py::arg("path_indices"));

  m.def(
      "run_stokes_verification",
      [](const std::vector<int>& ladder, double nu) {
        std::vector<StokesRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_stokes_verification(ladder, nu);
        }
        py::list out;
        auto opt = [](const std::optional<double>& v) { return v ? py::cast(*v) : py::none(); };
        for (const auto& r : rows) {
          out.append(py::dict(py::arg("n") = r.n, py::arg("h") = r.h, py::arg("err_u_L2") = r.err_u_l2,
                              py::arg("err_u_H1") = r.err_u_h1, py::arg("err_p_L2") = r.err_p_l2,
                              py::arg("order_u_L2") = opt(r.order_u_l2), py::arg("order_u_H1") = opt(r.order_u_h1),
                              py::arg("order_p_L2") = opt(r.order_p_l2)));
        }
        return out;
      },
      py::arg("ladder"), py::arg("nu") = 1.0);
}
