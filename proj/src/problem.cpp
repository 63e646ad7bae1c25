#include "minimax/problem.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "minimax/errors.hpp"

namespace minimax {

namespace {

void validate_metric(const Matrix& m, const char* name) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw ValidationError(
        fmt::format("{} must be a non-empty square matrix, got {}x{}", name, m.rows(), m.cols()));
  }
  if (!m.allFinite()) throw ValidationError(fmt::format("{} has non-finite entries", name));
  if (!is_symmetric(m, 1e-10)) {
    Eigen::Index r = 0, c = 0;
    (m - m.transpose()).cwiseAbs().maxCoeff(&r, &c);
    throw ValidationError(fmt::format("{} is not symmetric: entry ({},{}) = {:.6g} vs ({},{}) = {:.6g}",
                                      name, r, c, m(r, c), c, r, m(c, r)));
  }
  SymmetricEigen eig = sym_eig(m);
  if (eig.values(0) <= 0.0) {
    throw ValidationError(
        fmt::format("{} is not positive definite: eigenvalue index 0 = {:.6g}", name, eig.values(0)));
  }
}

}  // namespace

EllipticalProblem EllipticalProblem::create(const Matrix& error_metric,
                                            const Matrix& constraint_metric, double radius,
                                            double sigma) {
  validate_metric(error_metric, "error metric K_e");
  validate_metric(constraint_metric, "constraint metric K_c");
  if (error_metric.rows() != constraint_metric.rows()) {
    throw ValidationError(fmt::format("dimension mismatch: K_e is {}x{}, K_c is {}x{}",
                                      error_metric.rows(), error_metric.cols(),
                                      constraint_metric.rows(), constraint_metric.cols()));
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ValidationError(fmt::format("radius must be positive and finite, got {}", radius));
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ValidationError(fmt::format("sigma must be positive and finite, got {}", sigma));
  }

  EllipticalProblem p;
  p.error_metric_ = symmetrize(error_metric);
  p.constraint_metric_ = symmetrize(constraint_metric);
  p.error_sqrt_ = sym_sqrt(p.error_metric_);
  SymmetricEigen kc = sym_eig(p.constraint_metric_);
  p.constraint_sqrt_ = sym_apply(kc, [](double v) { return std::sqrt(v); });
  p.constraint_inv_sqrt_ = sym_apply(kc, [](double v) { return 1.0 / std::sqrt(v); });
  p.radius_ = radius;
  p.sigma_ = sigma;
  return p;
}

EllipticalProblem EllipticalProblem::isotropic(int dim, double radius, double sigma) {
  if (dim < 1) throw ValidationError(fmt::format("dimension must be >= 1, got {}", dim));
  return create(Matrix::Identity(dim, dim), Matrix::Identity(dim, dim), radius, sigma);
}

double EllipticalProblem::eigen_floor() const { return 1e-10 * radius_ * radius_ / dim(); }

Matrix EllipticalProblem::whiten(const Matrix& omega) const {
  return symmetrize(constraint_inv_sqrt_ * omega * constraint_inv_sqrt_);
}

Matrix EllipticalProblem::unwhiten(const Matrix& whitened) const {
  return symmetrize(constraint_sqrt_ * whitened * constraint_sqrt_);
}

EllipticalProblem EllipticalProblem::with_radius(double radius) const {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ValidationError(fmt::format("radius must be positive and finite, got {}", radius));
  }
  EllipticalProblem p = *this;
  p.radius_ = radius;
  return p;
}

double EllipticalProblem::constraint_norm_sq(const Vector& theta) const {
  if (theta.size() != dim()) {
    throw ValidationError(fmt::format("theta has length {}, expected {}", theta.size(), dim()));
  }
  return (constraint_inv_sqrt_ * theta).squaredNorm();
}

PriorCovariance::PriorCovariance(Matrix omega, double floor) : floor_(floor) {
  if (omega.rows() == 0 || omega.rows() != omega.cols()) {
    throw ValidationError("prior covariance must be a non-empty square matrix");
  }
  if (!is_symmetric(omega, 1e-10)) throw ValidationError("prior covariance is not symmetric");
  matrix_ = symmetrize(omega);
  const double lo = min_eigenvalue(matrix_);
  if (!(lo > 0.0)) {
    throw ValidationError(
        fmt::format("prior covariance is not positive definite: min eigenvalue {:.6g}", lo));
  }
  if (floor_ < 0.0) throw ValidationError("eigenvalue floor must be nonnegative");
}

double PriorCovariance::whitened_trace(const EllipticalProblem& problem) const {
  if (matrix_.rows() != problem.dim()) {
    throw ValidationError(fmt::format("prior has dimension {}, problem has {}", matrix_.rows(),
                                      problem.dim()));
  }
  return problem.whiten(matrix_).trace();
}

bool PriorCovariance::is_feasible(const EllipticalProblem& problem) const {
  const double cap = problem.radius() * problem.radius();
  return whitened_trace(problem) <= cap * (1.0 + 1e-8);
}

Vector project_spectrum(const Vector& values, double floor, double cap) {
  const Eigen::Index n = values.size();
  if (floor * static_cast<double>(n) > cap * (1.0 + 1e-12)) {
    throw ValidationError(
        fmt::format("empty feasible set: floor {} times dimension {} exceeds cap {}", floor, n, cap));
  }
  Vector clipped = values.cwiseMax(floor);
  if (clipped.sum() <= cap) return clipped;

  // h(θ) = Σ max(v_i − θ, floor) is piecewise linear and decreasing; coordinate
  // i leaves the active set at θ = v_i − floor.
  std::vector<double> breaks(values.data(), values.data() + n);
  std::sort(breaks.begin(), breaks.end(), std::greater<>());
  double active_sum = 0.0;
  double shift = 0.0;
  for (Eigen::Index m = 1; m <= n; ++m) {
    active_sum += breaks[m - 1];
    shift = (active_sum + static_cast<double>(n - m) * floor - cap) / static_cast<double>(m);
    const double next = (m < n) ? breaks[m] - floor : -std::numeric_limits<double>::infinity();
    if (shift >= next) break;
  }
  return (values.array() - shift).cwiseMax(floor).matrix();
}

Matrix project_whitened(const Matrix& whitened, double floor, double cap) {
  SymmetricEigen eig = sym_eig(whitened);
  Vector projected = project_spectrum(eig.values, floor, cap);
  return symmetrize(eig.vectors * projected.asDiagonal() * eig.vectors.transpose());
}

PriorCovariance feasible_project(const EllipticalProblem& problem, const Matrix& omega) {
  if (omega.rows() != problem.dim() || omega.cols() != problem.dim()) {
    throw ValidationError(fmt::format("Omega is {}x{}, problem dimension is {}", omega.rows(),
                                      omega.cols(), problem.dim()));
  }
  if (!is_symmetric(omega, 1e-8)) throw ValidationError("Omega is not symmetric");
  const double cap = problem.radius() * problem.radius();
  Matrix whitened = project_whitened(problem.whiten(omega), problem.eigen_floor(), cap);
  return PriorCovariance(problem.unwhiten(whitened), problem.eigen_floor());
}

}  // namespace minimax
