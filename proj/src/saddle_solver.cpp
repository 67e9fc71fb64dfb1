#include "stochns/saddle_solver.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "stochns/errors.hpp"

namespace stochns {

namespace {

using Triplet = Eigen::Triplet<double>;

std::vector<int> free_index_map(const std::vector<int>& free, int num_velocity) {
  std::vector<int> map(num_velocity, -1);
  for (std::size_t i = 0; i < free.size(); ++i) map[free[i]] = static_cast<int>(i);
  return map;
}

}  // namespace

SaddleSystem::SaddleSystem(const AssembledForms& forms, const DofMap& dofs, SaddleCoefficients coeffs,
                           double tolerance)
    : forms_(&forms),
      coeffs_(coeffs),
      tolerance_(tolerance),
      num_velocity_(dofs.num_velocity_dofs()),
      num_pressure_(dofs.num_pressure_dofs()),
      free_(dofs.free_velocity_dofs()) {
  if (!(coeffs.pressure != 0.0) || !(tolerance > 0.0)) {
    throw ConfigError("SaddleSystem: pressure coefficient must be nonzero and tolerance positive");
  }
  const auto map = free_index_map(free_, num_velocity_);
  const int nf = static_cast<int>(free_.size());
  const int size = nf + num_pressure_ + 1;
  const int num_nodes = dofs.num_velocity_nodes();
  for (int d : free_) {
    if (d < num_nodes) free_nodes_.push_back(d);
  }
  num_free_nodes_ = static_cast<int>(free_nodes_.size());
  if (2 * num_free_nodes_ != nf) throw NumericalError("SaddleSystem: component masks differ");

  std::vector<Triplet> trip, scalar;
  trip.reserve(static_cast<std::size_t>(2 * forms.mass.nonZeros() + 2 * forms.divergence.nonZeros() +
                                        2 * num_pressure_));
  for (int row = 0; row < num_velocity_; ++row) {
    const int fr = map[row];
    if (fr < 0) continue;
    for (const SparseMatrix* op : {&forms.mass, &forms.stiffness}) {
      const double c = op == &forms.mass ? coeffs.mass : coeffs.stiffness;
      if (c == 0.0) continue;
      for (SparseMatrix::InnerIterator it(*op, row); it; ++it) {
        const int fc = map[it.col()];
        if (fc < 0) continue;
        trip.emplace_back(fr, fc, c * it.value());
        if (row < num_nodes) scalar.emplace_back(fr, fc, c * it.value());
      }
    }
  }
  std::array<std::vector<Triplet>, 2> div_trip;
  for (int q = 0; q < num_pressure_; ++q) {
    for (SparseMatrix::InnerIterator it(forms.divergence, q); it; ++it) {
      const int fc = map[it.col()];
      if (fc < 0) continue;
      trip.emplace_back(nf + q, fc, it.value());
      trip.emplace_back(fc, nf + q, it.value());
      const int comp = fc < num_free_nodes_ ? 0 : 1;
      div_trip[comp].emplace_back(q, fc - comp * num_free_nodes_, it.value());
    }
    trip.emplace_back(nf + q, size - 1, forms.mean_vector[q]);
    trip.emplace_back(size - 1, nf + q, forms.mean_vector[q]);
  }
  kkt_.resize(size, size);
  kkt_.setFromTriplets(trip.begin(), trip.end());
  kkt_.makeCompressed();

  Eigen::SparseMatrix<double> a(num_free_nodes_, num_free_nodes_);
  a.setFromTriplets(scalar.begin(), scalar.end());
  velocity_factor_.compute(a);
  if (velocity_factor_.info() != Eigen::Success) {
    throw NumericalError("SaddleSystem: velocity block is not positive definite");
  }

  Eigen::MatrixXd bordered = Eigen::MatrixXd::Zero(num_pressure_ + 1, num_pressure_ + 1);
  for (int c = 0; c < 2; ++c) {
    div_[c].resize(num_pressure_, num_free_nodes_);
    div_[c].setFromTriplets(div_trip[c].begin(), div_trip[c].end());
    const Eigen::MatrixXd bt = Eigen::MatrixXd(div_[c].transpose());
    const Eigen::MatrixXd ainv_bt = velocity_factor_.solve(bt);
    bordered.topLeftCorner(num_pressure_, num_pressure_) += div_[c] * ainv_bt;
  }
  bordered.col(num_pressure_).head(num_pressure_) = forms.mean_vector;
  bordered.row(num_pressure_).head(num_pressure_) = forms.mean_vector.transpose();
  schur_factor_.compute(bordered);
  if (!std::isfinite(schur_factor_.rcond()) || schur_factor_.rcond() < 1e-14) {
    throw NumericalError("SaddleSystem: pressure Schur complement is singular (rcond " +
                         std::to_string(schur_factor_.rcond()) + ")");
  }
}

void SaddleSystem::solve(const Eigen::VectorXd& r_u, Eigen::VectorXd& u, Eigen::VectorXd& p) const {
  const int nf = static_cast<int>(free_.size());
  const int ns = num_free_nodes_;
  Eigen::MatrixXd r(ns, 2);
  for (int i = 0; i < ns; ++i) {
    r(i, 0) = r_u[free_[i]];
    r(i, 1) = r_u[free_[ns + i]];
  }
  const Eigen::MatrixXd y = velocity_factor_.solve(r);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(num_pressure_ + 1);
  b.head(num_pressure_) = div_[0] * y.col(0) + div_[1] * y.col(1);
  const Eigen::VectorXd pc = schur_factor_.solve(b);
  const auto ptilde = pc.head(num_pressure_);
  r.col(0) -= div_[0].transpose() * ptilde;
  r.col(1) -= div_[1].transpose() * ptilde;
  const Eigen::MatrixXd uf = velocity_factor_.solve(r);

  Eigen::VectorXd x(kkt_.rows()), rhs = Eigen::VectorXd::Zero(kkt_.rows());
  x.head(ns) = uf.col(0);
  x.segment(ns, ns) = uf.col(1);
  x.segment(nf, num_pressure_) = ptilde;
  x[nf + num_pressure_] = -pc[num_pressure_];
  for (int i = 0; i < nf; ++i) rhs[i] = r_u[free_[i]];
  const Eigen::VectorXd res = kkt_ * x - rhs;
  const double scale = std::max(rhs.norm(), 1e-300);
  const double rel = res.norm() / scale;
  if (!(rel <= tolerance_)) {
    throw NumericalError("SaddleSystem::solve: relative residual " + std::to_string(rel) +
                         " exceeds tolerance " + std::to_string(tolerance_));
  }

  u.setZero(num_velocity_);
  for (int i = 0; i < nf; ++i) u[free_[i]] = x[i];
  p = ptilde * (-1.0 / coeffs_.pressure);
}

SaddleSolution SaddleSystem::solve(const Eigen::VectorXd& r_u) const {
  SaddleSolution sol;
  solve(r_u, sol.u.coeffs, sol.p.coeffs);
  return sol;
}

SaddleResidual SaddleSystem::residual(const Eigen::VectorXd& r_u, const SaddleSolution& sol) const {
  const AssembledForms& f = *forms_;
  const Eigen::VectorXd& u = sol.u.coeffs;
  const Eigen::VectorXd& p = sol.p.coeffs;
  Eigen::VectorXd mom = coeffs_.mass * (f.mass * u) + coeffs_.stiffness * (f.stiffness * u) -
                        coeffs_.pressure * (f.divergence.transpose() * p) - r_u;
  double mom2 = 0.0;
  for (int d : free_) mom2 += mom[d] * mom[d];
  SaddleResidual r;
  r.momentum = std::sqrt(mom2);
  r.divergence = (f.divergence * u).norm();
  r.mean = std::abs(f.mean_vector.dot(p));
  return r;
}

std::unique_ptr<SaddleSystem> build_system(const AssembledForms& forms, const DofMap& dofs, double nu,
                                           double k, double tolerance) {
  if (!(nu > 0.0) || !(k > 0.0)) throw ConfigError("build_system: nu and k must be positive");
  return std::make_unique<SaddleSystem>(forms, dofs, SaddleCoefficients{1.0, nu * k, k}, tolerance);
}

InfSupResult inf_sup_constant(const AssembledForms& forms, const DofMap& dofs) {
  const auto free = dofs.free_velocity_dofs();
  const auto map = free_index_map(free, dofs.num_velocity_dofs());
  const int nf = static_cast<int>(free.size());
  const int np = dofs.num_pressure_dofs();

  std::vector<Triplet> ktrip;
  for (int row = 0; row < dofs.num_velocity_dofs(); ++row) {
    if (map[row] < 0) continue;
    for (SparseMatrix::InnerIterator it(forms.stiffness, row); it; ++it) {
      if (map[it.col()] >= 0) ktrip.emplace_back(map[row], map[it.col()], it.value());
    }
  }
  Eigen::SparseMatrix<double> k(nf, nf);
  k.setFromTriplets(ktrip.begin(), ktrip.end());

  Eigen::MatrixXd bt = Eigen::MatrixXd::Zero(nf, np);
  for (int q = 0; q < np; ++q) {
    for (SparseMatrix::InnerIterator it(forms.divergence, q); it; ++it) {
      if (map[it.col()] >= 0) bt(map[it.col()], q) = it.value();
    }
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(k);
  if (chol.info() != Eigen::Success) throw NumericalError("inf_sup_constant: stiffness factorization failed");
  const Eigen::MatrixXd kinv_bt = chol.solve(bt);
  Eigen::MatrixXd schur = bt.transpose() * kinv_bt;
  schur = 0.5 * (schur + schur.transpose()).eval();
  const Eigen::MatrixXd mp = Eigen::MatrixXd(forms.pressure_mass);

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(schur, mp, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("inf_sup_constant: eigensolve failed");
  const auto& ev = eig.eigenvalues();
  InfSupResult r;
  r.null_eigenvalue = ev[0];
  r.beta = std::sqrt(std::max(0.0, ev[1]));
  return r;
}

}  // namespace stochns
