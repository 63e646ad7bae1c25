#pragma once

#include <Eigen/Dense>

#include <functional>

namespace minimax {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// (A + Aᵀ)/2.
Matrix symmetrize(const Matrix& a);

/// True when ‖A − Aᵀ‖_max ≤ rel_tol · max(1, ‖A‖_max).
bool is_symmetric(const Matrix& a, double rel_tol = 1e-10);

/// Eigendecomposition of the symmetrized input, eigenvalues ascending.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};
SymmetricEigen sym_eig(const Matrix& a);

/// U f(Λ) Uᵀ for a symmetric matrix.
Matrix sym_apply(const SymmetricEigen& eig, const std::function<double(double)>& f);

/// Symmetric square root; negative roundoff eigenvalues are clamped to zero.
Matrix sym_sqrt(const Matrix& a);

/// Inverse symmetric square root. Throws NumericalError when A is not PD.
Matrix sym_inv_sqrt(const Matrix& a);

/// Smallest eigenvalue of the symmetrized input.
double min_eigenvalue(const Matrix& a);

/// Largest eigenvalue and its unit eigenvector.
std::pair<double, Vector> top_eigenpair(const Matrix& a);

/// ⟨A, B⟩ = tr(Aᵀ B).
inline double frobenius_inner(const Matrix& a, const Matrix& b) {
  return (a.array() * b.array()).sum();
}

}  // namespace minimax
