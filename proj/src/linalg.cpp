#include "minimax/linalg.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>

#include "minimax/errors.hpp"

namespace minimax {

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

bool is_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

SymmetricEigen sym_eig(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(a));
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigendecomposition did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Matrix sym_apply(const SymmetricEigen& eig, const std::function<double(double)>& f) {
  Vector mapped = eig.values.unaryExpr(f);
  return eig.vectors * mapped.asDiagonal() * eig.vectors.transpose();
}

Matrix sym_sqrt(const Matrix& a) {
  return sym_apply(sym_eig(a), [](double v) { return std::sqrt(std::max(v, 0.0)); });
}

Matrix sym_inv_sqrt(const Matrix& a) {
  SymmetricEigen eig = sym_eig(a);
  if (eig.values.size() > 0 && eig.values(0) <= 0.0) {
    throw NumericalError(
        fmt::format("inverse square root of a matrix with eigenvalue {:.6g}", eig.values(0)));
  }
  return sym_apply(eig, [](double v) { return 1.0 / std::sqrt(v); });
}

double min_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(a), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

std::pair<double, Vector> top_eigenpair(const Matrix& a) {
  SymmetricEigen eig = sym_eig(a);
  const Eigen::Index last = eig.values.size() - 1;
  return {eig.values(last), eig.vectors.col(last)};
}

}  // namespace minimax
