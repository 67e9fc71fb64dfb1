#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "stochns/assembly.hpp"
#include "stochns/fem.hpp"

namespace stochns {

/// Coefficients of the velocity-pressure problem
///   mass (u, phi) + stiffness (grad u, grad phi) - pressure (p, div phi) = r(phi),
///   (div u, q) = 0,
/// with homogeneous Dirichlet velocity and mean-zero pressure.
struct SaddleCoefficients {
  double mass = 1.0;
  double stiffness = 1.0;
  double pressure = 1.0;
};

struct SaddleSolution {
  VelocityField u;
  PressureField p;
};

struct SaddleResidual {
  double momentum = 0.0;    ///< ||A u - pressure B^T p - r|| over free dofs
  double divergence = 0.0;  ///< ||B u||
  double mean = 0.0;        ///< |(p, 1)|
};

/// Solver for the bordered system
///   [A  B^T 0] [u ]   [r]
///   [B  0   m] [p~] = [0]
///   [0  m^T 0] [c ]   [0]
/// over the free velocity dofs, with p~ = -pressure * p. The multiplier c
/// vanishes for every consistent right-hand side since (div u, 1) = 0.
///
/// A = mass M + stiffness K is SPD and acts identically on both velocity
/// components, so it is factored once as a scalar sparse Cholesky. The
/// pressure block is eliminated through the dense bordered Schur complement
///   [B A^{-1} B^T  m; m^T  0],
/// factored with partial pivoting. All factorizations happen in the
/// constructor; solve() is const and reentrant. Every solve is checked
/// against the assembled bordered matrix.
class SaddleSystem {
 public:
  SaddleSystem(const AssembledForms& forms, const DofMap& dofs, SaddleCoefficients coeffs,
               double tolerance = 1e-10);

  /// r_u is a full velocity load; entries on Dirichlet dofs are ignored.
  /// Throws NumericalError when the residual contract is violated.
  SaddleSolution solve(const Eigen::VectorXd& r_u) const;
  void solve(const Eigen::VectorXd& r_u, Eigen::VectorXd& u, Eigen::VectorXd& p) const;

  SaddleResidual residual(const Eigen::VectorXd& r_u, const SaddleSolution& sol) const;

  double tolerance() const { return tolerance_; }
  const SaddleCoefficients& coefficients() const { return coeffs_; }
  int num_free_velocity_dofs() const { return static_cast<int>(free_.size()); }

 private:
  const AssembledForms* forms_;
  SaddleCoefficients coeffs_;
  double tolerance_;
  int num_velocity_ = 0;
  int num_pressure_ = 0;
  std::vector<int> free_;
  int num_free_nodes_ = 0;
  std::vector<int> free_nodes_;
  Eigen::SparseMatrix<double> kkt_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> velocity_factor_;
  /// Divergence restricted to the free nodes of each velocity component.
  std::array<Eigen::SparseMatrix<double>, 2> div_;
  Eigen::PartialPivLU<Eigen::MatrixXd> schur_factor_;
};

/// Implicit Euler step operator: A = M + nu k K, pressure coefficient k.
std::unique_ptr<SaddleSystem> build_system(const AssembledForms& forms, const DofMap& dofs, double nu,
                                           double k, double tolerance = 1e-10);

/// Discrete inf-sup constant: square root of the smallest nonzero eigenvalue
/// of Mp^{-1} B K^{-1} B^T over mean-zero pressures, K the stiffness on free
/// dofs. Dense eigensolve; meant for n <= 16.
struct InfSupResult {
  double beta = 0.0;
  double null_eigenvalue = 0.0;  ///< eigenvalue of the constant pressure mode
};
InfSupResult inf_sup_constant(const AssembledForms& forms, const DofMap& dofs);

}  // namespace stochns
