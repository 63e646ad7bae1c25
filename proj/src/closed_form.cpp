#include "minimax/closed_form.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "minimax/errors.hpp"
#include "minimax/random.hpp"

namespace minimax {

EigenSequence EigenSequence::explicit_values(Vector mu) {
  if (mu.size() == 0) throw ValidationError("eigenvalue sequence is empty");
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    if (!(mu(j) > 0.0) || !std::isfinite(mu(j))) {
      throw ValidationError(fmt::format("mu_{} = {} is not positive and finite", j + 1, mu(j)));
    }
    if (j > 0 && mu(j) > mu(j - 1)) {
      throw ValidationError(fmt::format("eigenvalue sequence increases at index {}", j + 1));
    }
  }
  EigenSequence s;
  s.values_ = std::move(mu);
  return s;
}

EigenSequence EigenSequence::power_law(double exponent, Convention convention) {
  if (!(exponent > 0.0) || !std::isfinite(exponent)) {
    throw ValidationError(fmt::format("power-law exponent must be positive, got {}", exponent));
  }
  EigenSequence s;
  s.finite_ = false;
  s.exponent_ = exponent;
  s.convention_ = convention;
  return s;
}

double EigenSequence::operator()(long j) const {
  if (j < 1) throw ValidationError(fmt::format("eigenvalue index {} is not >= 1", j));
  if (finite_) {
    if (j > static_cast<long>(values_.size())) {
      throw ValidationError(fmt::format("index {} beyond finite sequence of length {}", j,
                                        values_.size()));
    }
    return values_(j - 1);
  }
  const double base = convention_ == Convention::kPaired ? std::ceil(j / 2.0)
                                                          : static_cast<double>(j);
  return std::pow(base, -exponent_);
}

Vector EigenSequence::head(long k) const {
  Vector out(k);
  for (long j = 1; j <= k; ++j) out(j - 1) = (*this)(j);
  return out;
}

void SequenceProblem::validate() const {
  if (eps.size() == 0) throw ValidationError("sequence problem needs k >= 1");
  if (a.size() != eps.size()) {
    throw ValidationError(
        fmt::format("eps has length {} but a has length {}", eps.size(), a.size()));
  }
  if (!(radius > 0.0)) throw ValidationError(fmt::format("C must be positive, got {}", radius));
  for (Eigen::Index j = 0; j < eps.size(); ++j) {
    if (!(eps(j) > 0.0)) throw ValidationError(fmt::format("eps_{} must be positive", j + 1));
    if (!(a(j) > 0.0)) throw ValidationError(fmt::format("a_{} must be positive", j + 1));
    if (j > 0 && a(j) < a(j - 1)) {
      throw ValidationError(fmt::format("a must be nondecreasing; a_{} < a_{}", j + 1, j));
    }
  }
}

WaterfillSolution pinsker_waterfill(const SequenceProblem& seq) {
  seq.validate();
  const int k = seq.k();
  const double c2 = seq.radius * seq.radius;
  // On the active prefix {1..m}: s = Σ ε²a / (C² + Σ ε²a²), valid when
  // a_m < 1/s ≤ a_{m+1}.
  double sum_a = 0.0;
  double sum_a2 = 0.0;
  double level = 0.0;
  int active = 0;
  for (int m = 1; m <= k; ++m) {
    const double e2 = seq.eps(m - 1) * seq.eps(m - 1);
    sum_a += e2 * seq.a(m - 1);
    sum_a2 += e2 * seq.a(m - 1) * seq.a(m - 1);
    level = sum_a / (c2 + sum_a2);
    active = m;
    if (m == k || seq.a(m) * level >= 1.0) break;
  }

  WaterfillSolution out;
  out.level = level;
  out.active_set_size = active;
  out.allocation = Vector::Zero(k);
  for (int j = 0; j < active; ++j) {
    const double e2 = seq.eps(j) * seq.eps(j);
    const double sa = level * seq.a(j);
    out.allocation(j) = std::max(0.0, e2 * (1.0 / sa - 1.0));
    out.value += e2 * std::max(0.0, 1.0 - sa);
  }
  return out;
}

WaterfillSolution kernel_waterfill_budget(const EigenSequence& mu, double budget, long max_terms) {
  if (!(budget > 0.0) || !std::isfinite(budget)) {
    throw ValidationError(fmt::format("budget n rho^2 / sigma^2 must be positive, got {}", budget));
  }
  // Active prefix {1..m}: λ = (budget + Σ b²) / Σ b, valid when λ ≤ b_{m+1}.
  const long limit = mu.is_finite() ? mu.length() : max_terms;
  double sum_b = 0.0;
  double sum_b2 = 0.0;
  double level = 0.0;
  long active = 0;
  bool interior = false;
  std::vector<double> b;
  for (long m = 1; m <= limit; ++m) {
    const double bm = 1.0 / std::sqrt(mu(m));
    b.push_back(bm);
    sum_b += bm;
    sum_b2 += bm * bm;
    level = (budget + sum_b2) / sum_b;
    active = m;
    if (m == limit) break;
    const double next = 1.0 / std::sqrt(mu(m + 1));
    if (level <= next) {
      interior = true;
      break;
    }
  }
  if (!mu.is_finite() && !interior) {
    throw NumericalError(fmt::format(
        "kernel water-fill: active set still growing after {} terms (level {:.6g})", max_terms,
        level));
  }

  WaterfillSolution out;
  out.level = level;
  out.active_set_size = static_cast<int>(active);
  out.allocation = Vector::Zero(static_cast<Eigen::Index>(b.size()));
  for (std::size_t j = 0; j < b.size(); ++j) {
    const double gap = std::max(0.0, level - b[j]);
    out.allocation(static_cast<Eigen::Index>(j)) = b[j] * gap;
    out.value += gap / level;
  }
  return out;
}

WaterfillSolution kernel_waterfill(const EigenSequence& mu, int n, double rho, double sigma,
                                   long max_terms) {
  if (n < 1) throw ValidationError(fmt::format("n must be >= 1, got {}", n));
  if (!(rho > 0.0) || !(sigma > 0.0)) throw ValidationError("rho and sigma must be positive");
  return kernel_waterfill_budget(mu, n * rho * rho / (sigma * sigma), max_terms);
}

Vector log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) {
    throw ValidationError(fmt::format("invalid log grid [{}, {}] with {} points", lo, hi, count));
  }
  Vector grid(count);
  const double step = (std::log(hi) - std::log(lo)) / (count - 1);
  for (int i = 0; i < count; ++i) grid(i) = std::exp(std::log(lo) + step * i);
  grid(count - 1) = hi;
  return grid;
}

double sobolev_rate(double beta, int dim_x, const Vector& budget_grid) {
  if (dim_x < 1) throw ValidationError("dim_x must be >= 1");
  if (!(beta > dim_x / 2.0)) {
    throw ValidationError(fmt::format("beta = {} must exceed dim_x/2 = {}", beta, dim_x / 2.0));
  }
  if (budget_grid.size() < 3 || !(budget_grid.minCoeff() > 0.0) ||
      budget_grid.maxCoeff() / budget_grid.minCoeff() < 1e3 * (1.0 - 1e-12)) {
    throw ValidationError("degenerate grid: need >= 3 positive points spanning >= 3 decades");
  }
  const EigenSequence mu = EigenSequence::power_law(2.0 * beta / dim_x);
  const Eigen::Index m = budget_grid.size();
  Vector x(m), y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    x(i) = std::log(budget_grid(i));
    y(i) = std::log(kernel_waterfill_budget(mu, budget_grid(i)).value);
  }
  const double mx = x.mean();
  const double my = y.mean();
  return ((x.array() - mx) * (y.array() - my)).sum() / (x.array() - mx).square().sum();
}

Estimate dicker_functional(int n, int d, double rho, double sigma, int n_mc, std::uint64_t seed) {
  if (n_mc < 2) throw ValidationError("N_mc must be >= 2");
  if (!(rho > 0.0) || !(sigma > 0.0)) throw ValidationError("rho and sigma must be positive");
  const double ridge = sigma * sigma * d / (n * rho * rho);
  MeanAccumulator acc;
  for (int i = 0; i < n_mc; ++i) {
    const DesignMatrix x = sample_gaussian_design(n, d, derive_seed(seed, i));
    Matrix cov = Matrix::Zero(d, d);
    cov.selfadjointView<Eigen::Lower>().rankUpdate(x.x.transpose(), 1.0 / n);
    const Vector lambda = sym_eig(cov.selfadjointView<Eigen::Lower>()).values;
    acc.add((lambda.array().cwiseMax(0.0) + ridge).inverse().sum());
  }
  return acc.estimate();
}

Estimate mourtada_limit(const GramEnsemble& ensemble, const Matrix& sigma_p) {
  const int n = ensemble.meta().n;
  if (n < 1) throw ValidationError("ensemble does not record its sample size n");
  if (sigma_p.rows() != ensemble.dim() || sigma_p.cols() != ensemble.dim()) {
    throw ValidationError(fmt::format("Sigma_P is {}x{}, ensemble dimension is {}", sigma_p.rows(),
                                      sigma_p.cols(), ensemble.dim()));
  }
  const double s2 = ensemble.meta().sigma * ensemble.meta().sigma;
  MeanAccumulator acc;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const Matrix cov = (s2 / n) * ensemble.grams()[i];
    const SymmetricEigen eig = sym_eig(cov);
    const double top = std::max(eig.values(eig.values.size() - 1), 0.0);
    if (!(eig.values(0) > 1e-12 * top)) {
      throw NumericalError(fmt::format(
          "replicate {} has a singular empirical covariance (min eigenvalue {:.3g}); the "
          "large-radius limit is infinite unless every replicate is invertible",
          i, eig.values(0)));
    }
    const Matrix rotated = eig.vectors.transpose() * sigma_p * eig.vectors;
    acc.add((rotated.diagonal().array() / eig.values.array()).sum());
  }
  return acc.estimate();
}

std::vector<double> markov_quadratic_forms(const Matrix& m, int draws, std::uint64_t seed,
                                           int block) {
  if (draws < 1) throw ValidationError("number of draws must be >= 1");
  if (block < 1) throw ValidationError("block size must be >= 1");
  if (m.rows() != m.cols()) throw ValidationError("M must be square");
  const Eigen::Index t = m.rows();
  std::vector<double> forms(draws);
  Matrix z(t, block);
  for (int start = 0; start < draws; start += block) {
    const int width = std::min(block, draws - start);
    for (int k = 0; k < width; ++k) {
      RandomStream rng(derive_seed(seed, static_cast<std::uint64_t>(start + k)));
      for (Eigen::Index i = 0; i < t; ++i) z(i, k) = rng.normal();
    }
    const auto zb = z.leftCols(width);
    const Matrix mz = m.selfadjointView<Eigen::Lower>() * zb;
    const Vector q = (zb.array() * mz.array()).colwise().sum().transpose();
    for (int k = 0; k < width; ++k) forms[start + k] = q(k);
  }
  return forms;
}

Estimate markov_phi_from_forms(const std::vector<double>& forms, double rho, double sigma) {
  if (!(rho > 0.0) || !(sigma > 0.0)) throw ValidationError("rho and sigma must be positive");
  const double inv_rho2 = 1.0 / (rho * rho);
  const double inv_sigma2 = 1.0 / (sigma * sigma);
  MeanAccumulator acc;
  for (double q : forms) acc.add(1.0 / (inv_rho2 + std::max(q, 0.0) * inv_sigma2));
  return acc.estimate();
}

Estimate markov_phi(const Matrix& m, double rho, double sigma, int n_mc, std::uint64_t seed) {
  if (n_mc < 2) throw ValidationError("N_mc must be >= 2");
  if (m.rows() == 0 || m.rows() != m.cols()) throw ValidationError("M must be non-empty square");
  if (!is_symmetric(m, 1e-8)) throw ValidationError("M is not symmetric");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double lo = min_eigenvalue(m);
  if (lo < -1e-8 * scale) {
    throw ValidationError(fmt::format("M is not PSD: min eigenvalue {:.3g}", lo));
  }
  return markov_phi_from_forms(markov_quadratic_forms(m, n_mc, seed), rho, sigma);
}

CovshiftBound covshift_lower(const EigenSequence& mu, double shift_bound, int n, double rho,
                             double sigma, long max_terms) {
  if (!(shift_bound >= 1.0)) {
    throw ValidationError(fmt::format("likelihood-ratio bound B must be >= 1, got {}", shift_bound));
  }
  if (n < 1) throw ValidationError(fmt::format("n must be >= 1, got {}", n));
  if (!(rho > 0.0) || !(sigma > 0.0)) throw ValidationError("rho and sigma must be positive");
  const double rho2 = rho * rho;
  const double t = sigma * sigma * shift_bound / (n * rho2);
  const long limit = mu.is_finite() ? mu.length() : max_terms;

  CovshiftBound out;
  // μ_d − t d is decreasing, so the first failure ends the scan.
  long d_star = 0;
  while (d_star < limit && mu(d_star + 1) >= t * static_cast<double>(d_star + 1)) ++d_star;
  out.d_star = static_cast<int>(d_star);
  out.dstar_bound = sigma * sigma * shift_bound * static_cast<double>(d_star) / n;

  double witness = 0.0;
  for (long j = 1; j <= d_star; ++j) witness += std::min(t, (t / mu(j)) * mu(j));
  out.witness_bound = rho2 * witness;

  // Largest μ_j first: each coordinate absorbs t/μ_j of the budget.
  double remaining = 1.0;
  double total = 0.0;
  long j = 1;
  for (; j <= limit && remaining > 0.0; ++j) {
    const double cap = t / mu(j);
    if (cap <= remaining) {
      total += t;
      remaining -= cap;
    } else {
      total += remaining * mu(j);
      remaining = 0.0;
    }
  }
  if (!mu.is_finite() && remaining > 0.0) {
    throw NumericalError(
        fmt::format("covariate-shift simplex bound still filling after {} terms", max_terms));
  }
  out.simplex_bound = rho2 * total;

  const long inf_limit = std::max<long>(d_star + 1, 1);
  double best = std::numeric_limits<double>::infinity();
  const long scan = mu.is_finite() ? limit : inf_limit;
  for (long k = 1; k <= scan; ++k) best = std::min(best, mu(k) + t * static_cast<double>(k));
  if (!mu.is_finite()) {
    // Beyond d*+1 the term t k already exceeds the value at d*+1.
    for (long k = inf_limit + 1; t * static_cast<double>(k) < best && k <= max_terms; ++k) {
      best = std::min(best, mu(k) + t * static_cast<double>(k));
    }
  }
  out.inf_bound = rho2 * best;
  return out;
}

}  // namespace minimax
