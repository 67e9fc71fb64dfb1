#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "stochns/mesh.hpp"

namespace stochns {

using Vec2 = Eigen::Vector2d;
/// Row c holds the gradient of component c.
using Mat2 = Eigen::Matrix2d;

/// Quadrature on the reference triangle {(xi, eta): xi, eta >= 0, xi + eta <= 1}.
/// Points are barycentric (lambda0, lambda1, lambda2) with lambda1 = xi,
/// lambda2 = eta; weights sum to the reference area 1/2.
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;
};

/// Seven-point symmetric rule, exact for total degree <= 5.
const QuadratureRule& degree5_rule();

struct P2Values {
  std::array<double, 6> values{};
  /// Gradients with respect to the reference coordinates (xi, eta).
  std::array<std::array<double, 2>, 6> grads{};
};

struct P1Values {
  std::array<double, 3> values{};
  std::array<std::array<double, 2>, 3> grads{};
};

/// Quadratic Lagrange basis. Functions 0..2 belong to the vertices, 3 + i to
/// the midpoint of the edge opposite vertex i.
P2Values p2_basis(const std::array<double, 3>& bary);
P1Values p1_basis(const std::array<double, 3>& bary);

/// Taylor-Hood numbering.
///
/// Velocity scalar nodes are the mesh vertices (0 .. V-1) followed by the edge
/// midpoints (V .. V+E-1). Velocity dofs are component-blocked: the x
/// component of node i is dof i and the y component is dof num_velocity_nodes() + i.
/// Pressure dofs are the mesh vertices.
class DofMap {
 public:
  explicit DofMap(const Mesh& mesh);

  int num_velocity_nodes() const { return num_nodes_; }
  int num_velocity_dofs() const { return 2 * num_nodes_; }
  int num_pressure_dofs() const { return num_pressure_; }

  int velocity_dof(int component, int node) const { return component * num_nodes_ + node; }

  /// Six velocity nodes of triangle t in local basis order.
  const std::array<int, 6>& velocity_nodes(int t) const { return tri_nodes_[t]; }
  const std::array<int, 3>& pressure_nodes(int t) const { return tri_pressure_[t]; }

  const Point& node_coordinate(int node) const { return node_coords_[node]; }
  /// One flag per velocity dof; true where the node lies on the boundary.
  const std::vector<bool>& dirichlet_mask() const { return dirichlet_; }
  std::vector<int> free_velocity_dofs() const;

 private:
  int num_nodes_ = 0;
  int num_pressure_ = 0;
  std::vector<std::array<int, 6>> tri_nodes_;
  std::vector<std::array<int, 3>> tri_pressure_;
  std::vector<Point> node_coords_;
  std::vector<bool> dirichlet_;
};

struct VelocityField {
  Eigen::VectorXd coeffs;
};

struct PressureField {
  Eigen::VectorXd coeffs;
};

/// Geometry and basis data at the quadrature points of every triangle.
///
/// Affine triangles only: physical gradients are constant maps of reference
/// gradients, so they are stored per triangle and quadrature point.
class QuadratureTables {
 public:
  QuadratureTables(const Mesh& mesh, const QuadratureRule& rule);

  int num_triangles() const { return num_triangles_; }
  int num_points() const { return num_points_; }

  /// Physical weight (reference weight times |det J|).
  double weight(int t, int q) const { return weights_[t * num_points_ + q]; }
  const Point& point(int t, int q) const { return points_[t * num_points_ + q]; }

  double p2_value(int q, int i) const { return p2_values_[q * 6 + i]; }
  double p1_value(int q, int i) const { return p1_values_[q * 3 + i]; }
  /// Physical gradient of local P2 basis i at point q of triangle t.
  const std::array<double, 2>& p2_grad(int t, int q, int i) const {
    return p2_grads_[(t * num_points_ + q) * 6 + i];
  }
  const std::array<double, 2>& p1_grad(int t, int i) const { return p1_grads_[t * 3 + i]; }

 private:
  int num_triangles_ = 0;
  int num_points_ = 0;
  std::vector<double> weights_;
  std::vector<Point> points_;
  std::vector<double> p2_values_;
  std::vector<double> p1_values_;
  std::vector<std::array<double, 2>> p2_grads_;
  std::vector<std::array<double, 2>> p1_grads_;
};

using VectorFunction = std::function<Vec2(const Point&)>;
using ScalarFunction = std::function<double(const Point&)>;
using GradientFunction = std::function<Mat2(const Point&)>;

/// Nodal interpolation; the Dirichlet mask is not applied.
VelocityField interpolate_velocity(const DofMap& dofs, const VectorFunction& f);
PressureField interpolate_pressure(const Mesh& mesh, const ScalarFunction& f);

/// Zeroes the masked velocity dofs.
void apply_dirichlet(const DofMap& dofs, VelocityField& u);

Vec2 evaluate_velocity(const VelocityField& u, const Mesh& mesh, const DofMap& dofs, Point x);
Mat2 evaluate_velocity_gradient(const VelocityField& u, const Mesh& mesh, const DofMap& dofs, Point x);
double evaluate_pressure(const PressureField& p, const Mesh& mesh, Point x);

/// Quadrature-based error norms against analytic functions.
double velocity_l2_error(const VelocityField& u, const DofMap& dofs, const QuadratureTables& qt,
                         const VectorFunction& exact);
double velocity_h1_seminorm_error(const VelocityField& u, const DofMap& dofs,
                                  const QuadratureTables& qt, const GradientFunction& exact_grad);
double pressure_l2_error(const PressureField& p, const DofMap& dofs, const QuadratureTables& qt,
                         const ScalarFunction& exact);

}  // namespace stochns
