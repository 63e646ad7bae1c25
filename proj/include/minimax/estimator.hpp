#pragma once

#include <cstdint>

#include "minimax/ensembles.hpp"
#include "minimax/problem.hpp"
#include "minimax/stats.hpp"

namespace minimax {

/// θ̂ = (Ω⁻¹ + G)⁻¹ Xᵀ y / σ² with G = XᵀX/σ², i.e. the minimizer of
/// ‖y − Xϑ‖²/σ² + ‖ϑ‖²_{Ω⁻¹}.
class RidgeEstimator {
 public:
  /// Throws ValidationError if the prior's dimension differs from the problem's.
  RidgeEstimator(EllipticalProblem problem, PriorCovariance prior);

  const EllipticalProblem& problem() const { return problem_; }
  const PriorCovariance& prior() const { return prior_; }

  Vector fit(const DesignMatrix& x, const Vector& y) const;

  /// θ̂ = H b with H = S (I + S G S)⁻¹ S = (Ω⁻¹ + G)⁻¹, S = Ω^{1/2}.
  Vector fit_from_moments(const Matrix& gram, const Vector& moment) const;

  /// H = (Ω⁻¹ + G)⁻¹ without forming Ω⁻¹.
  Matrix posterior_covariance(const Matrix& gram) const;

 private:
  EllipticalProblem problem_;
  PriorCovariance prior_;
  Matrix prior_sqrt_;
};

struct WorstCaseRisk {
  double value = 0.0;     // bias + variance
  double bias = 0.0;      // ρ² λ_max(K_c^{1/2} B̄ K_c^{1/2})
  double variance = 0.0;  // tr(K_e^{1/2} E[C G Cᵀ] K_e^{1/2})
  Vector worst_theta;     // ρ K_c^{1/2} v for the top eigenvector v
  Matrix bias_matrix;     // B̄ = E[(CG − I)ᵀ K_e (CG − I)]
};

/// Supremum of the ensemble-averaged K_e risk over {‖θ‖_{K_c⁻¹} ≤ ρ}.
WorstCaseRisk worst_case_risk(const RidgeEstimator& est, const GramEnsemble& ensemble);

struct MonteCarloRisk {
  Estimate risk;
  bool feasible = true;  // ‖θ*‖_{K_c⁻¹} ≤ ρ (1 + 1e-8)
};

/// Fresh design from `sampler` and fresh N(0, σ² I) noise per trial; trial i
/// uses the sub-seed derive_seed(seed, i). Infeasible θ* is evaluated anyway
/// and flagged.
MonteCarloRisk mc_risk(const RidgeEstimator& est, const Vector& theta_star,
                       const SamplerSpec& sampler, double noise_sigma, int trials,
                       std::uint64_t seed);

/// Bayes risk of the posterior mean under θ* ~ N(0, Ω): trial k uses ensemble
/// member k mod N, draws θ* and the sufficient statistic b = Gθ* + G^{1/2} ξ,
/// and scores ‖H b − θ*‖²_{K_e}.
Estimate bayes_oracle_risk(const EllipticalProblem& problem, const PriorCovariance& omega,
                           const GramEnsemble& ensemble, int trials, std::uint64_t seed);

}  // namespace minimax
