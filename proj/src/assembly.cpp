#include "stochns/assembly.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stochns {

using Triplet = Eigen::Triplet<double>;
using std::numbers::pi;

AssembledForms assemble_bilinear_forms(const DofMap& dofs, const QuadratureTables& qt) {
  const int nv = dofs.num_velocity_dofs();
  const int np = dofs.num_pressure_dofs();
  const int nt = qt.num_triangles();

  std::vector<Triplet> mass, stiff, div, pmass;
  mass.reserve(static_cast<std::size_t>(nt) * 72);
  stiff.reserve(static_cast<std::size_t>(nt) * 72);
  div.reserve(static_cast<std::size_t>(nt) * 36);
  pmass.reserve(static_cast<std::size_t>(nt) * 9);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(np);

  for (int t = 0; t < nt; ++t) {
    const auto& vn = dofs.velocity_nodes(t);
    const auto& pn = dofs.pressure_nodes(t);
    Eigen::Matrix<double, 6, 6> m_loc = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 6> k_loc = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 3, 12> b_loc = Eigen::Matrix<double, 3, 12>::Zero();
    Eigen::Matrix3d mp_loc = Eigen::Matrix3d::Zero();
    for (int q = 0; q < qt.num_points(); ++q) {
      const double w = qt.weight(t, q);
      for (int i = 0; i < 6; ++i) {
        const auto& gi = qt.p2_grad(t, q, i);
        for (int j = 0; j < 6; ++j) {
          const auto& gj = qt.p2_grad(t, q, j);
          m_loc(i, j) += w * qt.p2_value(q, i) * qt.p2_value(q, j);
          k_loc(i, j) += w * (gi[0] * gj[0] + gi[1] * gj[1]);
        }
      }
      for (int a = 0; a < 3; ++a) {
        const double psi = qt.p1_value(q, a);
        mean[pn[a]] += w * psi;
        for (int b = 0; b < 3; ++b) mp_loc(a, b) += w * psi * qt.p1_value(q, b);
        for (int j = 0; j < 6; ++j) {
          const auto& gj = qt.p2_grad(t, q, j);
          b_loc(a, j) += w * psi * gj[0];
          b_loc(a, 6 + j) += w * psi * gj[1];
        }
      }
    }
    for (int c = 0; c < 2; ++c) {
      for (int i = 0; i < 6; ++i) {
        const int row = dofs.velocity_dof(c, vn[i]);
        for (int j = 0; j < 6; ++j) {
          const int col = dofs.velocity_dof(c, vn[j]);
          mass.emplace_back(row, col, m_loc(i, j));
          stiff.emplace_back(row, col, k_loc(i, j));
        }
      }
    }
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) pmass.emplace_back(pn[a], pn[b], mp_loc(a, b));
      for (int c = 0; c < 2; ++c) {
        for (int j = 0; j < 6; ++j) {
          div.emplace_back(pn[a], dofs.velocity_dof(c, vn[j]), b_loc(a, 6 * c + j));
        }
      }
    }
  }

  AssembledForms forms;
  forms.mass.resize(nv, nv);
  forms.mass.setFromTriplets(mass.begin(), mass.end());
  forms.stiffness.resize(nv, nv);
  forms.stiffness.setFromTriplets(stiff.begin(), stiff.end());
  forms.divergence.resize(np, nv);
  forms.divergence.setFromTriplets(div.begin(), div.end());
  forms.pressure_mass.resize(np, np);
  forms.pressure_mass.setFromTriplets(pmass.begin(), pmass.end());
  forms.mean_vector = std::move(mean);
  return forms;
}

Eigen::VectorXd assemble_load(const DofMap& dofs, const QuadratureTables& qt, const VectorFunction& f) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dofs.num_velocity_dofs());
  for (int t = 0; t < qt.num_triangles(); ++t) {
    const auto& vn = dofs.velocity_nodes(t);
    for (int q = 0; q < qt.num_points(); ++q) {
      const Vec2 fv = f(qt.point(t, q)) * qt.weight(t, q);
      for (int i = 0; i < 6; ++i) {
        const double phi = qt.p2_value(q, i);
        out[dofs.velocity_dof(0, vn[i])] += fv[0] * phi;
        out[dofs.velocity_dof(1, vn[i])] += fv[1] * phi;
      }
    }
  }
  return out;
}

Vec2 noise_mode(int j1, int j2, const Point& x) {
  const double s = std::sin(j1 * pi * x.x) * std::sin(j2 * pi * x.y);
  return {s, s};
}

std::vector<Eigen::VectorXd> assemble_noise_loads(const DofMap& dofs, const QuadratureTables& qt,
                                                  int modes) {
  if (modes < 1) throw std::invalid_argument("assemble_noise_loads: J must be >= 1");
  std::vector<Eigen::VectorXd> loads;
  loads.reserve(static_cast<std::size_t>(modes) * modes);
  for (int j1 = 1; j1 <= modes; ++j1) {
    for (int j2 = 1; j2 <= modes; ++j2) {
      loads.push_back(assemble_load(dofs, qt, [j1, j2](const Point& x) { return noise_mode(j1, j2, x); }));
    }
  }
  return loads;
}

Vec2 body_force(const Point& p, double t) {
  const double x = p.x, y = p.y;
  const double ct = std::cos(t), st = std::sin(t);
  const double sx = std::sin(pi * x), sy = std::sin(pi * y);
  const double f1 = pi * ct * std::sin(2 * pi * y) * sx * sx -
                    2 * pi * pi * pi * st * std::sin(2 * pi * y) * (2 * std::cos(2 * pi * x) - 1) -
                    pi * st * sx * sy;
  const double f2 = -pi * ct * std::sin(2 * pi * x) * sy * sy -
                    2 * pi * pi * pi * st * std::sin(2 * pi * x) * (1 - 2 * std::cos(2 * pi * y)) +
                    pi * st * std::cos(pi * x) * std::cos(pi * y);
  return {f1, f2};
}

BodyForceParts body_force_parts(const Point& p) {
  const double x = p.x, y = p.y;
  const double sx = std::sin(pi * x), sy = std::sin(pi * y);
  BodyForceParts parts;
  parts.cos_part = {pi * std::sin(2 * pi * y) * sx * sx, -pi * std::sin(2 * pi * x) * sy * sy};
  parts.sin_part = {-2 * pi * pi * pi * std::sin(2 * pi * y) * (2 * std::cos(2 * pi * x) - 1) - pi * sx * sy,
                    -2 * pi * pi * pi * std::sin(2 * pi * x) * (1 - 2 * std::cos(2 * pi * y)) +
                        pi * std::cos(pi * x) * std::cos(pi * y)};
  return parts;
}

Eigen::VectorXd assemble_body_force(const DofMap& dofs, const QuadratureTables& qt, double t) {
  return assemble_load(dofs, qt, [t](const Point& x) { return body_force(x, t); });
}

ConvectionForm::ConvectionForm(const DofMap& dofs, const QuadratureTables& qt)
    : num_nodes_(dofs.num_velocity_nodes()), num_points_(qt.num_points()) {
  nodes_.resize(qt.num_triangles());
  points_.resize(static_cast<std::size_t>(qt.num_triangles()) * num_points_);
  for (int t = 0; t < qt.num_triangles(); ++t) {
    nodes_[t] = dofs.velocity_nodes(t);
    for (int q = 0; q < num_points_; ++q) {
      auto& pd = points_[static_cast<std::size_t>(t) * num_points_ + q];
      pd.weight = qt.weight(t, q);
      for (int i = 0; i < 6; ++i) {
        pd.value[i] = qt.p2_value(q, i);
        pd.grad[i] = qt.p2_grad(t, q, i);
      }
    }
  }
}

// Calls visit(t, point_data, convective, c_coef) at each quadrature point where
// convective = a . grad b + 1/2 (div a) b.
template <typename Visit>
void ConvectionForm::for_each_point(const VelocityField& a, const VelocityField& b, Visit&& visit) const {
  const double* ax = a.coeffs.data();
  const double* ay = ax + num_nodes_;
  const double* bx = b.coeffs.data();
  const double* by = bx + num_nodes_;
  for (std::size_t t = 0; t < nodes_.size(); ++t) {
    const auto& nd = nodes_[t];
    double lax[6], lay[6], lbx[6], lby[6];
    for (int i = 0; i < 6; ++i) {
      lax[i] = ax[nd[i]];
      lay[i] = ay[nd[i]];
      lbx[i] = bx[nd[i]];
      lby[i] = by[nd[i]];
    }
    for (int q = 0; q < num_points_; ++q) {
      const PointData& pd = points_[t * num_points_ + q];
      double va0 = 0, va1 = 0, vb0 = 0, vb1 = 0;
      double diva = 0, db00 = 0, db01 = 0, db10 = 0, db11 = 0;
      for (int i = 0; i < 6; ++i) {
        const double phi = pd.value[i];
        const double gx = pd.grad[i][0], gy = pd.grad[i][1];
        va0 += lax[i] * phi;
        va1 += lay[i] * phi;
        vb0 += lbx[i] * phi;
        vb1 += lby[i] * phi;
        diva += lax[i] * gx + lay[i] * gy;
        db00 += lbx[i] * gx;
        db01 += lbx[i] * gy;
        db10 += lby[i] * gx;
        db11 += lby[i] * gy;
      }
      const double conv0 = va0 * db00 + va1 * db01 + 0.5 * diva * vb0;
      const double conv1 = va0 * db10 + va1 * db11 + 0.5 * diva * vb1;
      visit(nd, pd, conv0, conv1);
    }
  }
}

double ConvectionForm::btilde(const VelocityField& a, const VelocityField& b, const VelocityField& c) const {
  const double* cx = c.coeffs.data();
  const double* cy = cx + num_nodes_;
  double sum = 0.0;
  for_each_point(a, b, [&](const std::array<int, 6>& nd, const PointData& pd, double conv0, double conv1) {
    double vc0 = 0, vc1 = 0;
    for (int i = 0; i < 6; ++i) {
      vc0 += cx[nd[i]] * pd.value[i];
      vc1 += cy[nd[i]] * pd.value[i];
    }
    sum += pd.weight * (conv0 * vc0 + conv1 * vc1);
  });
  return sum;
}

void ConvectionForm::rhs(const VelocityField& a, const VelocityField& b, Eigen::VectorXd& out) const {
  out.setZero(2 * num_nodes_);
  double* ox = out.data();
  double* oy = ox + num_nodes_;
  for_each_point(a, b, [&](const std::array<int, 6>& nd, const PointData& pd, double conv0, double conv1) {
    const double w0 = pd.weight * conv0;
    const double w1 = pd.weight * conv1;
    for (int i = 0; i < 6; ++i) {
      ox[nd[i]] += w0 * pd.value[i];
      oy[nd[i]] += w1 * pd.value[i];
    }
  });
}

Eigen::VectorXd ConvectionForm::rhs(const VelocityField& a, const VelocityField& b) const {
  Eigen::VectorXd out;
  rhs(a, b, out);
  return out;
}

Discretization::Discretization(int n, int modes)
    : mesh(build_uniform_mesh(n)),
      dofs(mesh),
      tables(mesh, degree5_rule()),
      forms(assemble_bilinear_forms(dofs, tables)),
      convection(dofs, tables) {
  forms.noise_modes = modes;
  forms.noise_loads = assemble_noise_loads(dofs, tables, modes);
  body_force_cos = assemble_load(dofs, tables, [](const Point& x) { return body_force_parts(x).cos_part; });
  body_force_sin = assemble_load(dofs, tables, [](const Point& x) { return body_force_parts(x).sin_part; });
}

void Discretization::body_force_load(double t, Eigen::VectorXd& out) const {
  out = std::cos(t) * body_force_cos + std::sin(t) * body_force_sin;
}

double Discretization::l2_norm(const Eigen::VectorXd& u) const {
  return std::sqrt(std::max(0.0, u.dot(forms.mass * u)));
}

double Discretization::h1_seminorm(const Eigen::VectorXd& u) const {
  return std::sqrt(std::max(0.0, u.dot(forms.stiffness * u)));
}

double Discretization::pressure_l2_norm(const Eigen::VectorXd& p) const {
  return std::sqrt(std::max(0.0, p.dot(forms.pressure_mass * p)));
}

std::shared_ptr<const Discretization> make_discretization(int n, int modes) {
  return std::make_shared<const Discretization>(n, modes);
}

}  // namespace stochns
