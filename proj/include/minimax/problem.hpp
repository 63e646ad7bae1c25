#pragma once

#include "minimax/linalg.hpp"

namespace minimax {

/// One estimation instance: error metric K_e, constraint metric K_c, radius ρ
/// of the ellipse {θ : θᵀ K_c⁻¹ θ ≤ ρ²} and isotropic noise level σ
/// (Σ_w = σ² I). Immutable; symmetric roots are computed once at construction.
class EllipticalProblem {
 public:
  /// Validates and caches K_e^{1/2}, K_c^{±1/2}. Throws ValidationError on
  /// non-square, mismatched, non-symmetric or non-PD metrics and on ρ, σ ≤ 0.
  static EllipticalProblem create(const Matrix& error_metric, const Matrix& constraint_metric,
                                  double radius, double sigma);

  /// Identity metrics in dimension d.
  static EllipticalProblem isotropic(int dim, double radius, double sigma);

  int dim() const { return static_cast<int>(error_metric_.rows()); }
  const Matrix& error_metric() const { return error_metric_; }
  const Matrix& constraint_metric() const { return constraint_metric_; }
  double radius() const { return radius_; }
  double sigma() const { return sigma_; }

  const Matrix& error_sqrt() const { return error_sqrt_; }
  const Matrix& constraint_sqrt() const { return constraint_sqrt_; }
  const Matrix& constraint_inv_sqrt() const { return constraint_inv_sqrt_; }

  /// Eigenvalue floor ε = 1e-10 · ρ²/d applied in whitened coordinates.
  double eigen_floor() const;

  /// Ω ↦ K_c^{-1/2} Ω K_c^{-1/2}.
  Matrix whiten(const Matrix& omega) const;
  /// Ω̃ ↦ K_c^{1/2} Ω̃ K_c^{1/2}.
  Matrix unwhiten(const Matrix& whitened) const;

  /// Same metrics and noise with a different radius.
  EllipticalProblem with_radius(double radius) const;

  /// ‖θ‖²_{K_c⁻¹}.
  double constraint_norm_sq(const Vector& theta) const;

 private:
  EllipticalProblem() = default;

  Matrix error_metric_;
  Matrix constraint_metric_;
  Matrix error_sqrt_;
  Matrix constraint_sqrt_;
  Matrix constraint_inv_sqrt_;
  double radius_ = 1.0;
  double sigma_ = 1.0;
};

/// Symmetric positive definite prior covariance Ω, together with the
/// whitened-coordinate eigenvalue floor used when it was produced (0 for
/// user-supplied matrices).
class PriorCovariance {
 public:
  /// Wraps an SPD matrix. Throws ValidationError unless symmetric and PD.
  explicit PriorCovariance(Matrix omega, double floor = 0.0);

  const Matrix& matrix() const { return matrix_; }
  double floor() const { return floor_; }

  /// Trace of the whitened matrix K_c^{-1/2} Ω K_c^{-1/2}.
  double whitened_trace(const EllipticalProblem& problem) const;

  /// tr(K_c^{-1/2} Ω K_c^{-1/2}) ≤ ρ² (1 + 1e-8).
  bool is_feasible(const EllipticalProblem& problem) const;

 private:
  Matrix matrix_;
  double floor_ = 0.0;
};

/// Euclidean projection of a vector of eigenvalues onto
/// {x : x_i ≥ floor, Σ x_i ≤ cap}; solved exactly by a breakpoint scan.
/// Requires floor · n ≤ cap.
Vector project_spectrum(const Vector& values, double floor, double cap);

/// Frobenius projection of a symmetric Ω onto the feasible set in whitened
/// coordinates, {Ω̃ ⪰ εI, tr Ω̃ ≤ ρ²}, mapped back. Idempotent.
PriorCovariance feasible_project(const EllipticalProblem& problem, const Matrix& omega);

/// Projection carried out entirely in whitened coordinates.
Matrix project_whitened(const Matrix& whitened, double floor, double cap);

}  // namespace minimax
