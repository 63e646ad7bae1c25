#pragma once

#include <cstdint>
#include <vector>

#include "minimax/ensembles.hpp"
#include "minimax/linalg.hpp"
#include "minimax/stats.hpp"

namespace minimax {

/// Positive nonincreasing eigenvalue sequence μ_1 ≥ μ_2 ≥ ..., either an
/// explicit finite list or a power law that can be extended on demand.
class EigenSequence {
 public:
  enum class Convention { kPaired, kPlain };

  /// Throws ValidationError if empty, non-positive or increasing.
  static EigenSequence explicit_values(Vector mu);
  /// μ_j = ⌈j/2⌉^{−exponent} (paired) or j^{−exponent} (plain).
  static EigenSequence power_law(double exponent, Convention convention = Convention::kPaired);

  /// 1-based; +∞ length for power laws.
  double operator()(long j) const;
  bool is_finite() const { return finite_; }
  long length() const { return finite_ ? static_cast<long>(values_.size()) : -1; }
  /// First k terms. Throws if a finite sequence is shorter than k.
  Vector head(long k) const;

 private:
  bool finite_ = true;
  Vector values_;
  double exponent_ = 0.0;
  Convention convention_ = Convention::kPaired;
};

/// Gaussian sequence model y_j = θ_j + ε_j z_j over {Σ a_j² θ_j² ≤ C²},
/// truncated at k = eps.size() coordinates.
struct SequenceProblem {
  Vector eps;
  Vector a;
  double radius = 1.0;  // C

  int k() const { return static_cast<int>(eps.size()); }
  /// Throws ValidationError unless all entries are positive, sizes agree and a
  /// is nondecreasing.
  void validate() const;
};

struct WaterfillSolution {
  double value = 0.0;
  double level = 0.0;
  Vector allocation;
  int active_set_size = 0;
};

/// R* = sup Σ τ_j² ε_j² / (τ_j² + ε_j²) over Σ a_j² τ_j² ≤ C². The optimum is
/// τ_j² = ε_j² (1/(s a_j) − 1)_+ with level s = √η fixed by an exact
/// breakpoint scan; `allocation` holds τ_j².
WaterfillSolution pinsker_waterfill(const SequenceProblem& seq);

/// λ* and d̄* from Σ b_k (λ* − b_k)_+ = nρ²/σ², b_k = 1/√μ_k, and
/// d̄* = Σ (λ* − b_k)_+ / λ*. Power-law sequences are extended until the
/// active set is strictly interior (at most `max_terms`); a finite sequence
/// whose terms are all active is solved as a finite-rank kernel.
/// `allocation` holds the prior variances b_k (λ* − b_k)_+.
WaterfillSolution kernel_waterfill(const EigenSequence& mu, int n, double rho, double sigma,
                                   long max_terms = 50'000'000);

/// Same with the budget nρ²/σ² given directly.
WaterfillSolution kernel_waterfill_budget(const EigenSequence& mu, double budget,
                                          long max_terms = 50'000'000);

/// `count` log-spaced points from lo to hi inclusive.
Vector log_grid(double lo, double hi, int count);

/// Least-squares slope of log d̄* against log(nρ²/σ²) with
/// μ_j = ⌈j/2⌉^{−2β/dim_x}. The grid must span at least 3 decades.
double sobolev_rate(double beta, int dim_x, const Vector& budget_grid);

/// Monte Carlo mean of tr((Σ̂ + (σ² d/(n ρ²)) I)⁻¹) over Gaussian designs.
Estimate dicker_functional(int n, int d, double rho, double sigma, int n_mc, std::uint64_t seed);

/// Ensemble average of tr(Σ̂⁻¹ Σ_P) with Σ̂ = (σ²/n) G from the ensemble's
/// recorded (n, σ). Throws NumericalError on a singular replicate.
Estimate mourtada_limit(const GramEnsemble& ensemble, const Matrix& sigma_p);

/// Draws q_k = z_kᵀ M z_k, z_k ~ N(0, I_T), in blocks of `block` columns.
/// Draw k uses the stream derive_seed(seed, k) so any prefix of draws is
/// shared across calls with the same seed.
std::vector<double> markov_quadratic_forms(const Matrix& m, int draws, std::uint64_t seed,
                                           int block = 256);

/// E[(1/ρ² + q/σ²)⁻¹] over the supplied draws of q.
Estimate markov_phi_from_forms(const std::vector<double>& forms, double rho, double sigma);

/// Φ_T(ρ, σ) = E[(1/ρ² + zᵀ M z/σ²)⁻¹]. Throws ValidationError unless M is
/// symmetric PSD within 1e-8.
Estimate markov_phi(const Matrix& m, double rho, double sigma, int n_mc, std::uint64_t seed);

struct CovshiftBound {
  double simplex_bound = 0.0;  // exact supremum over the simplex
  double witness_bound = 0.0;  // value at λ_j = (t/μ_j) 1{j ≤ d*}
  double dstar_bound = 0.0;    // σ² B d* / n
  double inf_bound = 0.0;      // ρ² min_j (μ_j + t j)
  int d_star = 0;
};

/// With t = σ²B/(nρ²): d* is the largest d with μ_d ≥ t d, and the simplex
/// bound is ρ² sup {Σ min(t, λ_j μ_j) : λ ≥ 0, Σ λ_j = 1}, solved as a
/// fractional knapsack. Throws ValidationError if B < 1.
CovshiftBound covshift_lower(const EigenSequence& mu, double shift_bound, int n, double rho,
                             double sigma, long max_terms = 50'000'000);

}  // namespace minimax
