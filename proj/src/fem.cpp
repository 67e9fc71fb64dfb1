#include "stochns/fem.hpp"

#include <cmath>

namespace stochns {

namespace {

struct AffineMap {
  Point origin;
  // Inverse transpose of the Jacobian [x1-x0, x2-x0; y1-y0, y2-y0].
  double inv_t[2][2];
  double det;
};

AffineMap affine_map(const Mesh& mesh, int t) {
  const auto& tri = mesh.triangles()[t];
  const auto& a = mesh.vertices()[tri[0]];
  const auto& b = mesh.vertices()[tri[1]];
  const auto& c = mesh.vertices()[tri[2]];
  const double j00 = b.x - a.x, j01 = c.x - a.x;
  const double j10 = b.y - a.y, j11 = c.y - a.y;
  AffineMap m;
  m.origin = a;
  m.det = j00 * j11 - j01 * j10;
  const double inv = 1.0 / m.det;
  // J^{-1} = [j11, -j01; -j10, j00] / det, stored transposed.
  m.inv_t[0][0] = j11 * inv;
  m.inv_t[0][1] = -j10 * inv;
  m.inv_t[1][0] = -j01 * inv;
  m.inv_t[1][1] = j00 * inv;
  return m;
}

std::array<double, 2> to_physical(const AffineMap& m, const std::array<double, 2>& g) {
  return {m.inv_t[0][0] * g[0] + m.inv_t[0][1] * g[1], m.inv_t[1][0] * g[0] + m.inv_t[1][1] * g[1]};
}

constexpr std::array<std::array<double, 2>, 3> kBaryGrad = {{{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}}};

}  // namespace

const QuadratureRule& degree5_rule() {
  static const QuadratureRule rule = [] {
    const double s15 = std::sqrt(15.0);
    const double a1 = (9.0 - 2.0 * s15) / 21.0, b1 = (6.0 + s15) / 21.0;
    const double a2 = (9.0 + 2.0 * s15) / 21.0, b2 = (6.0 - s15) / 21.0;
    const double w0 = 9.0 / 80.0;
    const double w1 = (155.0 + s15) / 2400.0;
    const double w2 = (155.0 - s15) / 2400.0;
    QuadratureRule r;
    r.degree = 5;
    r.points = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
                {a1, b1, b1}, {b1, a1, b1}, {b1, b1, a1},
                {a2, b2, b2}, {b2, a2, b2}, {b2, b2, a2}};
    r.weights = {w0, w1, w1, w1, w2, w2, w2};
    return r;
  }();
  return rule;
}

P2Values p2_basis(const std::array<double, 3>& l) {
  P2Values out;
  for (int i = 0; i < 3; ++i) {
    out.values[i] = l[i] * (2.0 * l[i] - 1.0);
    const double s = 4.0 * l[i] - 1.0;
    out.grads[i] = {s * kBaryGrad[i][0], s * kBaryGrad[i][1]};
  }
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int k = (i + 2) % 3;
    out.values[3 + i] = 4.0 * l[j] * l[k];
    out.grads[3 + i] = {4.0 * (l[k] * kBaryGrad[j][0] + l[j] * kBaryGrad[k][0]),
                        4.0 * (l[k] * kBaryGrad[j][1] + l[j] * kBaryGrad[k][1])};
  }
  return out;
}

P1Values p1_basis(const std::array<double, 3>& l) {
  P1Values out;
  out.values = l;
  out.grads = kBaryGrad;
  return out;
}

DofMap::DofMap(const Mesh& mesh)
    : num_nodes_(static_cast<int>(mesh.num_vertices() + mesh.num_edges())),
      num_pressure_(static_cast<int>(mesh.num_vertices())) {
  const int nv = static_cast<int>(mesh.num_vertices());
  tri_nodes_.resize(mesh.num_triangles());
  tri_pressure_ = mesh.triangles();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const auto& te = mesh.triangle_edges()[t];
    tri_nodes_[t] = {tri[0], tri[1], tri[2], nv + te[0], nv + te[1], nv + te[2]};
  }
  node_coords_ = mesh.vertices();
  std::vector<bool> boundary_node(mesh.boundary_vertex());
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    node_coords_.push_back(mesh.edge_midpoint(static_cast<int>(e)));
    boundary_node.push_back(mesh.boundary_edge()[e]);
  }
  dirichlet_.resize(2 * num_nodes_);
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < num_nodes_; ++i) {
      dirichlet_[velocity_dof(c, i)] = boundary_node[i];
    }
  }
}

std::vector<int> DofMap::free_velocity_dofs() const {
  std::vector<int> out;
  for (int d = 0; d < num_velocity_dofs(); ++d) {
    if (!dirichlet_[d]) out.push_back(d);
  }
  return out;
}

QuadratureTables::QuadratureTables(const Mesh& mesh, const QuadratureRule& rule)
    : num_triangles_(static_cast<int>(mesh.num_triangles())),
      num_points_(static_cast<int>(rule.points.size())) {
  const auto nt = static_cast<std::size_t>(num_triangles_);
  const auto nq = static_cast<std::size_t>(num_points_);
  weights_.resize(nt * nq);
  points_.resize(nt * nq);
  p2_values_.resize(nq * 6);
  p1_values_.resize(nq * 3);
  p2_grads_.resize(nt * nq * 6);
  p1_grads_.resize(nt * 3);

  std::vector<P2Values> ref(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    ref[q] = p2_basis(rule.points[q]);
    for (int i = 0; i < 6; ++i) p2_values_[q * 6 + i] = ref[q].values[i];
    for (int i = 0; i < 3; ++i) p1_values_[q * 3 + i] = rule.points[q][i];
  }
  for (int t = 0; t < num_triangles_; ++t) {
    const AffineMap m = affine_map(mesh, t);
    const auto& tri = mesh.triangles()[t];
    for (int i = 0; i < 3; ++i) p1_grads_[t * 3 + i] = to_physical(m, kBaryGrad[i]);
    for (int q = 0; q < num_points_; ++q) {
      const auto& l = rule.points[q];
      const auto idx = static_cast<std::size_t>(t) * nq + q;
      weights_[idx] = rule.weights[q] * std::abs(m.det);
      Point x{0.0, 0.0};
      for (int i = 0; i < 3; ++i) {
        x.x += l[i] * mesh.vertices()[tri[i]].x;
        x.y += l[i] * mesh.vertices()[tri[i]].y;
      }
      points_[idx] = x;
      for (int i = 0; i < 6; ++i) p2_grads_[idx * 6 + i] = to_physical(m, ref[q].grads[i]);
    }
  }
}

VelocityField interpolate_velocity(const DofMap& dofs, const VectorFunction& f) {
  VelocityField u{Eigen::VectorXd::Zero(dofs.num_velocity_dofs())};
  for (int i = 0; i < dofs.num_velocity_nodes(); ++i) {
    const Vec2 v = f(dofs.node_coordinate(i));
    u.coeffs[dofs.velocity_dof(0, i)] = v[0];
    u.coeffs[dofs.velocity_dof(1, i)] = v[1];
  }
  return u;
}

PressureField interpolate_pressure(const Mesh& mesh, const ScalarFunction& f) {
  PressureField p{Eigen::VectorXd(static_cast<Eigen::Index>(mesh.num_vertices()))};
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    p.coeffs[static_cast<Eigen::Index>(v)] = f(mesh.vertices()[v]);
  }
  return p;
}

void apply_dirichlet(const DofMap& dofs, VelocityField& u) {
  const auto& mask = dofs.dirichlet_mask();
  for (int d = 0; d < dofs.num_velocity_dofs(); ++d) {
    if (mask[d]) u.coeffs[d] = 0.0;
  }
}

Vec2 evaluate_velocity(const VelocityField& u, const Mesh& mesh, const DofMap& dofs, Point x) {
  const Location loc = mesh.locate(x);
  const P2Values b = p2_basis(loc.bary);
  const auto& nodes = dofs.velocity_nodes(loc.triangle);
  Vec2 out = Vec2::Zero();
  for (int i = 0; i < 6; ++i) {
    out[0] += b.values[i] * u.coeffs[dofs.velocity_dof(0, nodes[i])];
    out[1] += b.values[i] * u.coeffs[dofs.velocity_dof(1, nodes[i])];
  }
  return out;
}

Mat2 evaluate_velocity_gradient(const VelocityField& u, const Mesh& mesh, const DofMap& dofs,
                                Point x) {
  const Location loc = mesh.locate(x);
  const AffineMap m = affine_map(mesh, loc.triangle);
  const P2Values b = p2_basis(loc.bary);
  const auto& nodes = dofs.velocity_nodes(loc.triangle);
  Mat2 out = Mat2::Zero();
  for (int i = 0; i < 6; ++i) {
    const auto g = to_physical(m, b.grads[i]);
    for (int c = 0; c < 2; ++c) {
      const double coef = u.coeffs[dofs.velocity_dof(c, nodes[i])];
      out(c, 0) += coef * g[0];
      out(c, 1) += coef * g[1];
    }
  }
  return out;
}

double evaluate_pressure(const PressureField& p, const Mesh& mesh, Point x) {
  const Location loc = mesh.locate(x);
  const auto& tri = mesh.triangles()[loc.triangle];
  double out = 0.0;
  for (int i = 0; i < 3; ++i) out += loc.bary[i] * p.coeffs[tri[i]];
  return out;
}

double velocity_l2_error(const VelocityField& u, const DofMap& dofs, const QuadratureTables& qt,
                         const VectorFunction& exact) {
  double sum = 0.0;
  for (int t = 0; t < qt.num_triangles(); ++t) {
    const auto& nodes = dofs.velocity_nodes(t);
    for (int q = 0; q < qt.num_points(); ++q) {
      Vec2 uh = Vec2::Zero();
      for (int i = 0; i < 6; ++i) {
        uh[0] += qt.p2_value(q, i) * u.coeffs[dofs.velocity_dof(0, nodes[i])];
        uh[1] += qt.p2_value(q, i) * u.coeffs[dofs.velocity_dof(1, nodes[i])];
      }
      sum += qt.weight(t, q) * (uh - exact(qt.point(t, q))).squaredNorm();
    }
  }
  return std::sqrt(sum);
}

double velocity_h1_seminorm_error(const VelocityField& u, const DofMap& dofs,
                                  const QuadratureTables& qt, const GradientFunction& exact_grad) {
  double sum = 0.0;
  for (int t = 0; t < qt.num_triangles(); ++t) {
    const auto& nodes = dofs.velocity_nodes(t);
    for (int q = 0; q < qt.num_points(); ++q) {
      Mat2 g = Mat2::Zero();
      for (int i = 0; i < 6; ++i) {
        const auto& dphi = qt.p2_grad(t, q, i);
        for (int c = 0; c < 2; ++c) {
          const double coef = u.coeffs[dofs.velocity_dof(c, nodes[i])];
          g(c, 0) += coef * dphi[0];
          g(c, 1) += coef * dphi[1];
        }
      }
      sum += qt.weight(t, q) * (g - exact_grad(qt.point(t, q))).squaredNorm();
    }
  }
  return std::sqrt(sum);
}

double pressure_l2_error(const PressureField& p, const DofMap& dofs, const QuadratureTables& qt,
                         const ScalarFunction& exact) {
  double sum = 0.0;
  for (int t = 0; t < qt.num_triangles(); ++t) {
    const auto& nodes = dofs.pressure_nodes(t);
    for (int q = 0; q < qt.num_points(); ++q) {
      double ph = 0.0;
      for (int i = 0; i < 3; ++i) ph += qt.p1_value(q, i) * p.coeffs[nodes[i]];
      const double d = ph - exact(qt.point(t, q));
      sum += qt.weight(t, q) * d * d;
    }
  }
  return std::sqrt(sum);
}

}  // namespace stochns
