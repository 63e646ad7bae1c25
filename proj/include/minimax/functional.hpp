#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "minimax/ensembles.hpp"
#include "minimax/problem.hpp"
#include "minimax/stats.hpp"

namespace minimax {

/// Objective f(Ω) = (1/N) Σ_i tr(K_e^{1/2} (Ω⁻¹ + G_i)⁻¹ K_e^{1/2}) held in
/// whitened coordinates: Ẽ = K_c^{1/2} K_e K_c^{1/2}, G̃_i = K_c^{1/2} G_i K_c^{1/2},
/// so that f = (1/N) Σ_i tr(Ẽ (Ω̃⁻¹ + G̃_i)⁻¹).
class WhitenedObjective {
 public:
  WhitenedObjective(const EllipticalProblem& problem, const GramEnsemble& ensemble);

  struct Evaluation {
    double value = 0.0;
    Matrix gradient;                   // whitened ∇̃f, empty unless requested
    std::vector<double> member_values;
  };

  /// Uses S = Ω̃^{1/2}, A = I + S G̃ S (Cholesky) and H = S A⁻¹ S = (Ω̃⁻¹ + G̃)⁻¹,
  /// so Ω̃ may be singular. The gradient is E[Wᵀ Ẽ W] with W = I − H G̃.
  /// Throws NumericalError if a factorization fails.
  Evaluation evaluate(const Matrix& whitened_omega, bool with_gradient) const;

  int dim() const { return static_cast<int>(error_.rows()); }
  std::size_t size() const { return grams_.size(); }

 private:
  Matrix error_;
  std::vector<Matrix> grams_;
};

double objective(const GramEnsemble& ensemble, const EllipticalProblem& problem,
                 const PriorCovariance& omega);

/// ∇_Ω f in original coordinates, K_c^{-1/2} ∇̃f K_c^{-1/2}.
Matrix gradient(const GramEnsemble& ensemble, const EllipticalProblem& problem,
                const PriorCovariance& omega);

struct OptimizerOptions {
  int max_iter = 5000;
  double tol = 1e-9;
  int n_replicates = 50;  // ensemble size used by callers that sample one
  std::uint64_t seed = 0;
};

struct FunctionalResult {
  double value = 0.0;
  PriorCovariance maximizer{Matrix::Identity(1, 1)};
  int iterations = 0;
  double grad_norm = 0.0;    // norm of the projected-gradient mapping at exit
  double duality_gap = 0.0;  // ρ² λ_max(∇̃f) − ⟨∇̃f, Ω̃⟩ at exit
  double mc_stderr = 0.0;
  bool converged = false;
  std::vector<double> objective_trace;
};

/// Spectral projected gradient ascent in whitened coordinates started at
/// Ω̃₀ = (ρ²/d) I: Barzilai–Borwein trial steps, Armijo backtracking (×0.5,
/// sufficient increase 1e-4), monotone objective. Stops when the relative
/// objective change or the relative Frank–Wolfe gap falls below tol.
FunctionalResult maximize_phi(const EllipticalProblem& problem, const GramEnsemble& ensemble,
                              const OptimizerOptions& opts = {});

/// c_d of the isotropic Gaussian-design lower bound.
double dicker_cd(int d);

struct SharpLowerBound {
  double value = 0.0;      // bound at c − stderr(c)
  double estimate = 0.0;   // bound at c
  double std_error = 0.0;  // estimate − value
  double c = 0.0;
  double c_std_error = 0.0;
  double tail_probability = 0.0;
  double tau = 1.0;
};

/// Lower bound E tr(K_e^{1/2} ((1/c) Ω⁻¹ + G)⁻¹ K_e^{1/2}) with
/// c = τ² (1 − P{τ² Σ λ_i Z_i² > 1}) and λ_i the eigenvalues of
/// (1/ρ²) K_e^{1/2} Ω K_e^{1/2}. Requires tr(K_c^{-1/2} Ω K_c^{-1/2}) = ρ²
/// within 1e-6 relative and τ ∈ (0, 1].
SharpLowerBound sharp_lower(const EllipticalProblem& problem, const GramEnsemble& ensemble,
                            double tau, const PriorCovariance& omega, int mc_draws = 100000,
                            std::uint64_t seed = 0);

struct RiskBracket {
  double lower = 0.0;       // Φ̂(ρ/2)
  double upper = 0.0;       // Φ̂(ρ)
  double weak_lower = 0.0;  // Φ̂(ρ)/4
  std::optional<SharpLowerBound> sharp;
  Matrix omega_star;
  std::string lower_method = "phi_half_radius";
  std::string upper_method = "phi";
  std::string weak_lower_method = "quarter_phi";
  std::string sharp_method = "sharp_tau_scan";
};

struct BracketOptions {
  OptimizerOptions optimizer;
  bool with_sharp = true;
  int tau_grid = 20;
  int mc_draws = 100000;
};

/// Both maximizations share the ensemble. The sharp bound scans
/// τ ∈ {1/m, ..., 1} at Ω⋆ rescaled onto the trace boundary and keeps the
/// largest conservative value. Throws NumericalError if either run fails
/// to converge.
RiskBracket risk_bracket(const EllipticalProblem& problem, const GramEnsemble& ensemble,
                         const BracketOptions& opts = {});

/// d̄_n: maximize with the single Gram (n/σ²) Σ̄ and report the value scaled
/// by n/σ². The maximizer stays in the unscaled (radius ρ) convention.
FunctionalResult population_functional(const EllipticalProblem& problem,
                                       const Matrix& sigma_bar, int n,
                                       const OptimizerOptions& opts = {});

struct PopulationSandwich {
  double lhs = 0.0;  // d̄_n
  double mid = 0.0;  // d_n on the ensemble
  double mid_stderr = 0.0;
  double rhs = 0.0;  // (1 + ρ²κ²/σ²) d̄_n
  bool holds = false;
};

/// Uses the ensemble's recorded n. `holds` allows 2 standard errors on mid.
PopulationSandwich to_population_sandwich(const EllipticalProblem& problem,
                                          const GramEnsemble& ensemble, const Matrix& sigma_bar,
                                          double kappa, const OptimizerOptions& opts = {});

struct SingularSplit {
  double estimation = 0.0;
  double approximation = 0.0;
  double reference = 0.0;  // objective at Ω = (ρ²/d) I
};

/// Eigenvalues of Σ̂ = (σ²/n) G split at (σ²/n)(d/ρ²): large ones contribute
/// (σ²/n)/λ, small ones ρ²/d. Intended for K_e = K_c = I.
SingularSplit singular_split(const GramEnsemble& ensemble, const EllipticalProblem& problem);

}  // namespace minimax
