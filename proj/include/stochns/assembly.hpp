#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "stochns/fem.hpp"
#include "stochns/mesh.hpp"

namespace stochns {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Global operators over all velocity dofs (Dirichlet rows included).
struct AssembledForms {
  SparseMatrix mass;           ///< (phi_j, phi_i)
  SparseMatrix stiffness;      ///< (grad phi_j, grad phi_i), component Laplacian
  SparseMatrix divergence;     ///< rows pressure, cols velocity: (div phi_j, q_i)
  SparseMatrix pressure_mass;  ///< (q_j, q_i)
  Eigen::VectorXd mean_vector; ///< (1, q_i)

  int noise_modes = 0;
  /// Entry [(j1-1)*J + (j2-1)] holds (e_{j1,j2}, phi_i).
  std::vector<Eigen::VectorXd> noise_loads;

  const Eigen::VectorXd& noise_load(int j1, int j2) const {
    return noise_loads[(j1 - 1) * noise_modes + (j2 - 1)];
  }
};

/// Assembly runs serially over triangles in index order, so the operators are
/// bitwise reproducible.
AssembledForms assemble_bilinear_forms(const DofMap& dofs, const QuadratureTables& qt);

/// (f, phi_i) for an analytic vector function.
Eigen::VectorXd assemble_load(const DofMap& dofs, const QuadratureTables& qt, const VectorFunction& f);

/// Spectral noise shape e_{j1,j2}(x) = (sin(j1 pi x) sin(j2 pi y), same).
Vec2 noise_mode(int j1, int j2, const Point& x);
std::vector<Eigen::VectorXd> assemble_noise_loads(const DofMap& dofs, const QuadratureTables& qt,
                                                  int modes);

/// Body force of the stochastic experiments at time t.
Vec2 body_force(const Point& x, double t);
/// f(x, t) = cos(t) cos_part(x) + sin(t) sin_part(x).
struct BodyForceParts {
  Vec2 cos_part;
  Vec2 sin_part;
};
BodyForceParts body_force_parts(const Point& x);
Eigen::VectorXd assemble_body_force(const DofMap& dofs, const QuadratureTables& qt, double t);

/// Skew-symmetrized convection form
///   b(a, b, c) = (a . grad b, c) + 1/2 ([div a] b, c).
/// With the degree-5 rule the integrals are exact for P2 fields.
class ConvectionForm {
 public:
  ConvectionForm(const DofMap& dofs, const QuadratureTables& qt);

  double btilde(const VelocityField& a, const VelocityField& b, const VelocityField& c) const;

  /// out[i] = b(a, b, phi_i) for every velocity dof i.
  void rhs(const VelocityField& a, const VelocityField& b, Eigen::VectorXd& out) const;
  Eigen::VectorXd rhs(const VelocityField& a, const VelocityField& b) const;

 private:
  struct PointData {
    double weight;
    std::array<double, 6> value;
    std::array<std::array<double, 2>, 6> grad;
  };
  template <typename Visit>
  void for_each_point(const VelocityField& a, const VelocityField& b, Visit&& visit) const;

  int num_nodes_ = 0;
  int num_points_ = 0;
  std::vector<std::array<int, 6>> nodes_;
  std::vector<PointData> points_;
};

/// Everything derived from (n, J) that the time stepper needs, built once and
/// shared read-only between workers.
struct Discretization {
  Discretization(int n, int modes);
  Discretization(const Discretization&) = delete;
  Discretization& operator=(const Discretization&) = delete;

  Mesh mesh;
  DofMap dofs;
  QuadratureTables tables;
  AssembledForms forms;
  ConvectionForm convection;
  /// The body force is cos(t) F_c(x) + sin(t) F_s(x); both loads are cached.
  Eigen::VectorXd body_force_cos;
  Eigen::VectorXd body_force_sin;

  /// (f(t), phi_i) from the cached parts.
  void body_force_load(double t, Eigen::VectorXd& out) const;
  double l2_norm(const Eigen::VectorXd& u) const;
  double h1_seminorm(const Eigen::VectorXd& u) const;
  double pressure_l2_norm(const Eigen::VectorXd& p) const;
};

std::shared_ptr<const Discretization> make_discretization(int n, int modes);

}  // namespace stochns
