#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace minimax {

/// Worker count: hardware concurrency, capped by MINIMAX_WORKERS when set.
int worker_count();

/// Runs fn(0..count−1) on a bounded pool. Each index must write only to its
/// own output slot. The first exception thrown by any job is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

struct Figure1Config {
  std::vector<int> n_list{128, 512};
  std::vector<double> tau_list{1.0, 10.0};
  std::vector<double> lambda_list{0.0, 0.9, 0.99};
  std::vector<double> gamma_grid;  // empty means default_gamma_grid()
  int replicates = 50;
  std::uint64_t seed = 0;

  /// 12 log-spaced points from 0.05 to 4.
  static std::vector<double> default_gamma_grid();
  /// Throws ValidationError on empty grids, γ ≤ 0, τ ≤ 0, λ ∉ [0, 1), n < 1
  /// or replicates < 2.
  void validate() const;
};

struct Figure1Row {
  int n = 0;
  double tau = 0.0;
  double lambda = 0.0;
  double gamma = 0.0;
  int d = 0;
  double ell = 0.0;
  double u = 0.0;
  double stderr_ell = 0.0;
  double stderr_u = 0.0;
};

/// For each (n, τ, λ, γ) with d = ⌈γn⌉:
///   u = (1/(τ²n)) E tr((Σ̂ + d/(nτ²) I)⁻¹),
///   ℓ = (1/(τ²n)) E tr((Σ̂ + d/(c_d nτ²) I)⁻¹),
/// over `replicates` designs from the mixture law P_λ. Replicate r at (n, γ)
/// uses the same sub-seed for every λ and τ. Rows are ordered by n, τ, λ, γ
/// in config order. Throws NumericalError if a row has ℓ > u + 2(se_ℓ + se_u).
std::vector<Figure1Row> figure1(const Figure1Config& cfg);

struct Figure2Config {
  std::vector<std::string> psi_names{"iid", "5^t", "t+1", "1+log(t+1)", "1+loglog"};
  std::vector<int> t_grid;  // empty means default_t_grid()
  std::vector<double> tau_list{1.0, 10.0};
  int mc_trials = 5000;
  std::uint64_t seed = 0;

  /// round(10^{1 + k/2}) for k = 0..5: 10, 32, 100, 316, 1000, 3162.
  static std::vector<int> default_t_grid();
  /// Throws ValidationError on unknown ψ names, an empty or non-increasing
  /// T grid, τ ≤ 0 or mc_trials < 2.
  void validate() const;
};

struct Figure2Row {
  std::string psi;
  int t = 0;
  double tau = 0.0;
  double phi_normalized = 0.0;
  double std_error = 0.0;
};

/// phi_normalized = Φ_T(τ, 1)/τ² from the quadratic forms zᵀ M z with
/// M = markov_m_matrix(r(ψ)). All ψ at one T share the same draws of z.
/// Rows are ordered by ψ, T, τ in config order.
std::vector<Figure2Row> figure2(const Figure2Config& cfg);

inline constexpr const char* kFigure1Schema = "figure1/v1";
inline constexpr const char* kFigure2Schema = "figure2/v1";

/// "# schema: figure1/v1", the fixed header, then one row per line with
/// reals printed to 17 significant digits.
void write_figure1_csv(const std::vector<Figure1Row>& rows, std::ostream& out);
void write_figure2_csv(const std::vector<Figure2Row>& rows, std::ostream& out);

}  // namespace minimax
