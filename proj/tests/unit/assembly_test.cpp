#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "stochns/assembly.hpp"
#include "test_support.hpp"

namespace stochns {
namespace {

constexpr double pi = std::numbers::pi;

struct Forms {
  explicit Forms(int n) : mesh(build_uniform_mesh(n)), dofs(mesh), qt(mesh, degree5_rule()) {
    forms = assemble_bilinear_forms(dofs, qt);
  }
  Mesh mesh;
  DofMap dofs;
  QuadratureTables qt;
  AssembledForms forms;
};

// Independent oracle: evaluates fields through point location and the
// reference basis, integrates with a collapsed Gauss rule per triangle.
template <typename Integrand>
double oracle_integral(const Forms& s, Integrand&& g) {
  double total = 0.0;
  for (std::size_t t = 0; t < s.mesh.num_triangles(); ++t) {
    const auto& tri = s.mesh.triangles()[t];
    const auto rule = testing::collapsed_rule(s.mesh.vertices()[tri[0]], s.mesh.vertices()[tri[1]],
                                              s.mesh.vertices()[tri[2]]);
    for (std::size_t q = 0; q < rule.points.size(); ++q) total += rule.weights[q] * g(rule.points[q]);
  }
  return total;
}

double dense_min_eigenvalue(const SparseMatrix& a) {
  const Eigen::MatrixXd d(a);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(d).eigenvalues().minCoeff();
}

TEST(Assembly, MassOfConstantsIsTwo) {
  const Forms s(4);
  const VelocityField one = interpolate_velocity(s.dofs, [](const Point&) { return Vec2(1.0, 1.0); });
  EXPECT_NEAR(one.coeffs.dot(s.forms.mass * one.coeffs), 2.0, 1e-13);
}

TEST(Assembly, StiffnessOfUnitGradientIsOne) {
  const Forms s(4);
  const VelocityField u = interpolate_velocity(s.dofs, [](const Point& x) { return Vec2(x.x, 0.0); });
  EXPECT_NEAR(u.coeffs.dot(s.forms.stiffness * u.coeffs), 1.0, 1e-13);
}

TEST(Assembly, DivergenceOfConstantsVanishes) {
  const Forms s(4);
  const VelocityField c = interpolate_velocity(s.dofs, [](const Point&) { return Vec2(0.7, -1.3); });
  EXPECT_LT((s.forms.divergence * c.coeffs).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Assembly, Shapes) {
  const Forms s(3);
  EXPECT_EQ(s.forms.mass.rows(), 98);
  EXPECT_EQ(s.forms.stiffness.cols(), 98);
  EXPECT_EQ(s.forms.divergence.rows(), 16);
  EXPECT_EQ(s.forms.divergence.cols(), 98);
  EXPECT_EQ(s.forms.pressure_mass.rows(), 16);
  EXPECT_EQ(s.forms.mean_vector.size(), 16);
  EXPECT_NEAR(s.forms.mean_vector.sum(), 1.0, 1e-14);
}

TEST(Assembly, SymmetricAndPositive) {
  const Forms s(2);
  for (const SparseMatrix* a : {&s.forms.mass, &s.forms.stiffness, &s.forms.pressure_mass}) {
    const Eigen::MatrixXd d(*a);
    EXPECT_LT((d - d.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  }
  EXPECT_GT(dense_min_eigenvalue(s.forms.mass), 0.0);
  EXPECT_GT(dense_min_eigenvalue(s.forms.pressure_mass), 0.0);
  // K is only semidefinite on the full space; on free dofs it is definite.
  const auto free = s.dofs.free_velocity_dofs();
  const Eigen::MatrixXd k(s.forms.stiffness);
  Eigen::MatrixXd kf(free.size(), free.size());
  for (std::size_t i = 0; i < free.size(); ++i)
    for (std::size_t j = 0; j < free.size(); ++j) kf(i, j) = k(free[i], free[j]);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(kf).eigenvalues().minCoeff(), 1e-3);
  EXPECT_NEAR(dense_min_eigenvalue(s.forms.stiffness), 0.0, 1e-12);
}

TEST(Assembly, TransposeDivergenceAnnihilatesConstantPressureOnFreeDofs) {
  const Forms s(4);
  const Eigen::VectorXd bt1 = s.forms.divergence.transpose() * Eigen::VectorXd::Ones(25);
  for (int d : s.dofs.free_velocity_dofs()) EXPECT_NEAR(bt1[d], 0.0, 1e-12);
}

TEST(Assembly, OperatorsMatchCollapsedRuleOracle) {
  const Forms s(3);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const VelocityField u = testing::random_velocity(s.dofs, rng, false);
    const VelocityField v = testing::random_velocity(s.dofs, rng, false);
    const PressureField p{testing::random_vector(s.dofs.num_pressure_dofs(), rng)};
    const PressureField r{testing::random_vector(s.dofs.num_pressure_dofs(), rng)};
    const double scale = 1.0 + u.coeffs.norm() * v.coeffs.norm();

    const double m_op = v.coeffs.dot(s.forms.mass * u.coeffs);
    const double m_or = oracle_integral(s, [&](const Point& x) {
      return evaluate_velocity(u, s.mesh, s.dofs, x).dot(evaluate_velocity(v, s.mesh, s.dofs, x));
    });
    EXPECT_NEAR(m_op, m_or, 1e-12 * scale);

    const double k_op = v.coeffs.dot(s.forms.stiffness * u.coeffs);
    const double k_or = oracle_integral(s, [&](const Point& x) {
      return (evaluate_velocity_gradient(u, s.mesh, s.dofs, x)
                  .cwiseProduct(evaluate_velocity_gradient(v, s.mesh, s.dofs, x)))
          .sum();
    });
    EXPECT_NEAR(k_op, k_or, 1e-11 * scale);

    const double b_op = p.coeffs.dot(s.forms.divergence * u.coeffs);
    const double b_or = oracle_integral(s, [&](const Point& x) {
      return evaluate_velocity_gradient(u, s.mesh, s.dofs, x).trace() * evaluate_pressure(p, s.mesh, x);
    });
    EXPECT_NEAR(b_op, b_or, 1e-12 * (1.0 + u.coeffs.norm() * p.coeffs.norm()));

    const double mp_op = r.coeffs.dot(s.forms.pressure_mass * p.coeffs);
    const double mp_or = oracle_integral(
        s, [&](const Point& x) { return evaluate_pressure(p, s.mesh, x) * evaluate_pressure(r, s.mesh, x); });
    EXPECT_NEAR(mp_op, mp_or, 1e-13 * (1.0 + p.coeffs.norm() * r.coeffs.norm()));
  }
}

TEST(Convection, MatchesCollapsedRuleOracle) {
  const Forms s(2);
  const ConvectionForm conv(s.dofs, s.qt);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const VelocityField a = testing::random_velocity(s.dofs, rng, false);
    const VelocityField b = testing::random_velocity(s.dofs, rng, false);
    const VelocityField c = testing::random_velocity(s.dofs, rng, false);
    // Integrand has degree 2+1+2 = 5; the collapsed rule is exact to degree 7.
    const double oracle = oracle_integral(s, [&](const Point& x) {
      const Vec2 av = evaluate_velocity(a, s.mesh, s.dofs, x);
      const Mat2 ag = evaluate_velocity_gradient(a, s.mesh, s.dofs, x);
      const Vec2 bv = evaluate_velocity(b, s.mesh, s.dofs, x);
      const Mat2 bg = evaluate_velocity_gradient(b, s.mesh, s.dofs, x);
      const Vec2 cv = evaluate_velocity(c, s.mesh, s.dofs, x);
      return (bg * av).dot(cv) + 0.5 * ag.trace() * bv.dot(cv);
    });
    const double scale = a.coeffs.norm() * b.coeffs.norm() * c.coeffs.norm();
    EXPECT_NEAR(conv.btilde(a, b, c), oracle, 1e-12 * scale);
  }
}

TEST(Convection, SkewSymmetryOnMaskedFields) {
  for (int n : {4, 8}) {
    const auto disc = make_discretization(n, 1);
    std::mt19937_64 rng(100 + n);
    for (int trial = 0; trial < 10; ++trial) {
      const VelocityField u = testing::random_velocity(disc->dofs, rng);
      const VelocityField v = testing::random_velocity(disc->dofs, rng);
      const VelocityField w = testing::random_velocity(disc->dofs, rng);
      const double hu = std::sqrt(disc->l2_norm(u.coeffs) * disc->l2_norm(u.coeffs) +
                                  disc->h1_seminorm(u.coeffs) * disc->h1_seminorm(u.coeffs));
      const double hv = std::sqrt(disc->l2_norm(v.coeffs) * disc->l2_norm(v.coeffs) +
                                  disc->h1_seminorm(v.coeffs) * disc->h1_seminorm(v.coeffs));
      const double hw = std::sqrt(disc->l2_norm(w.coeffs) * disc->l2_norm(w.coeffs) +
                                  disc->h1_seminorm(w.coeffs) * disc->h1_seminorm(w.coeffs));
      EXPECT_LE(std::abs(disc->convection.btilde(u, v, v)), 1e-12 * hu * hv * hv);
      EXPECT_LE(std::abs(disc->convection.btilde(u, v, w) + disc->convection.btilde(u, w, v)),
                1e-12 * hu * hv * hw);
    }
  }
}

TEST(Convection, ZeroAdvectorGivesExactZero) {
  const Forms s(3);
  const ConvectionForm conv(s.dofs, s.qt);
  std::mt19937_64 rng(2);
  const VelocityField zero{Eigen::VectorXd::Zero(s.dofs.num_velocity_dofs())};
  const VelocityField b = testing::random_velocity(s.dofs, rng);
  EXPECT_EQ(conv.btilde(zero, b, b), 0.0);
  EXPECT_EQ(conv.rhs(zero, b).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(conv.rhs(zero, zero).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Convection, RhsIsConsistentWithTrilinearForm) {
  const Forms s(4);
  const ConvectionForm conv(s.dofs, s.qt);
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const VelocityField a = testing::random_velocity(s.dofs, rng, false);
    const VelocityField b = testing::random_velocity(s.dofs, rng, false);
    const VelocityField c = testing::random_velocity(s.dofs, rng, false);
    const double scale = a.coeffs.norm() * b.coeffs.norm() * c.coeffs.norm();
    EXPECT_NEAR(conv.rhs(a, b).dot(c.coeffs), conv.btilde(a, b, c), 1e-12 * scale);
  }
}

TEST(Convection, ConstantAdvectorAndXIndependentFieldGiveZero) {
  const Forms s(4);
  const ConvectionForm conv(s.dofs, s.qt);
  const VelocityField a = interpolate_velocity(s.dofs, [](const Point&) { return Vec2(1.0, 0.0); });
  const VelocityField b =
      interpolate_velocity(s.dofs, [](const Point& x) { return Vec2(x.y * x.y, 1.0 - 3.0 * x.y); });
  EXPECT_LT(conv.rhs(a, b).lpNorm<Eigen::Infinity>(), 1e-13);
}

TEST(Convection, BilinearInEachSlot) {
  const Forms s(3);
  const ConvectionForm conv(s.dofs, s.qt);
  std::mt19937_64 rng(21);
  const VelocityField a = testing::random_velocity(s.dofs, rng, false);
  const VelocityField a2 = testing::random_velocity(s.dofs, rng, false);
  const VelocityField b = testing::random_velocity(s.dofs, rng, false);
  const VelocityField c = testing::random_velocity(s.dofs, rng, false);
  const VelocityField mix{2.0 * a.coeffs - 0.5 * a2.coeffs};
  EXPECT_NEAR(conv.btilde(mix, b, c), 2.0 * conv.btilde(a, b, c) - 0.5 * conv.btilde(a2, b, c), 1e-11);
}

TEST(BodyForce, TimeZeroKeepsOnlyCosineTerms) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const Point x{u(rng), u(rng)};
    const Vec2 f = body_force(x, 0.0);
    const double sx = std::sin(pi * x.x), sy = std::sin(pi * x.y);
    EXPECT_NEAR(f[0], pi * std::sin(2 * pi * x.y) * sx * sx, 1e-13);
    EXPECT_NEAR(f[1], -pi * std::sin(2 * pi * x.x) * sy * sy, 1e-13);
  }
}

TEST(BodyForce, PartsRecombine) {
  const Point x{0.31, 0.77};
  const BodyForceParts parts = body_force_parts(x);
  for (double t : {0.0, 0.3, 1.0, 2.5}) {
    const Vec2 f = body_force(x, t);
    const Vec2 g = std::cos(t) * parts.cos_part + std::sin(t) * parts.sin_part;
    EXPECT_NEAR((f - g).norm(), 0.0, 1e-12);
  }
}

TEST(BodyForce, LoadAgreesWithPointwiseQuadratureAndIsDeterministic) {
  const Forms s(4);
  const Eigen::VectorXd l0 = assemble_body_force(s.dofs, s.qt, 0.0);
  const Eigen::VectorXd l1 = assemble_body_force(s.dofs, s.qt, 0.7);
  const Eigen::VectorXd l1b = assemble_body_force(s.dofs, s.qt, 0.7);
  EXPECT_EQ((l1 - l1b).cwiseAbs().maxCoeff(), 0.0);
  // (f(t), 1-vector field) via direct quadrature.
  const VelocityField one = interpolate_velocity(s.dofs, [](const Point&) { return Vec2(1.0, 0.0); });
  const double oracle = oracle_integral(s, [](const Point& x) { return body_force(x, 0.7)[0]; });
  EXPECT_NEAR(l1.dot(one.coeffs), oracle, 1e-4);
  const auto disc = make_discretization(4, 1);
  Eigen::VectorXd cached;
  disc->body_force_load(0.0, cached);
  EXPECT_LT((cached - l0).cwiseAbs().maxCoeff(), 1e-13);
  disc->body_force_load(0.7, cached);
  EXPECT_LT((cached - l1).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Noise, ModeValues) {
  EXPECT_NEAR(noise_mode(1, 1, {0.5, 0.5})[0], 1.0, 1e-15);
  EXPECT_NEAR(noise_mode(1, 1, {0.5, 0.5})[1], 1.0, 1e-15);
  for (double y : {0.0, 0.2, 0.9}) EXPECT_NEAR(noise_mode(2, 1, {0.5, y}).norm(), 0.0, 1e-15);
}

TEST(Noise, LoadsCountAndSelfInnerProduct) {
  const auto disc = make_discretization(16, 2);
  EXPECT_EQ(disc->forms.noise_modes, 2);
  EXPECT_EQ(disc->forms.noise_loads.size(), 4u);
  const VelocityField e11 =
      interpolate_velocity(disc->dofs, [](const Point& x) { return noise_mode(1, 1, x); });
  EXPECT_NEAR(disc->forms.noise_load(1, 1).dot(e11.coeffs), 0.5, 1e-3);
  EXPECT_THROW(assemble_noise_loads(disc->dofs, disc->tables, 0), std::invalid_argument);
}

TEST(Discretization, NormsMatchMatrixForms) {
  const auto disc = make_discretization(4, 1);
  const VelocityField u = interpolate_velocity(disc->dofs, [](const Point& x) { return Vec2(x.x, 2.0 * x.y); });
  EXPECT_NEAR(disc->l2_norm(u.coeffs), std::sqrt(1.0 / 3.0 + 4.0 / 3.0), 1e-13);
  EXPECT_NEAR(disc->h1_seminorm(u.coeffs), std::sqrt(5.0), 1e-13);
  const PressureField p = interpolate_pressure(disc->mesh, [](const Point&) { return 3.0; });
  EXPECT_NEAR(disc->pressure_l2_norm(p.coeffs), 3.0, 1e-13);
  const double q = velocity_l2_error(u, disc->dofs, disc->tables, [](const Point&) { return Vec2(0, 0); });
  EXPECT_NEAR(q, disc->l2_norm(u.coeffs), 1e-13);
}

}  // namespace
}  // namespace stochns
