#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "minimax/closed_form.hpp"
#include "minimax/ensembles.hpp"
#include "minimax/estimator.hpp"
#include "minimax/experiments.hpp"
#include "minimax/functional.hpp"
#include "oracles.hpp"

using namespace minimax;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<Outcome()> check;
};

PriorCovariance random_feasible(oracle::Rng& rng, const EllipticalProblem& p, double fill) {
  Matrix w = rng.spd(p.dim(), 0.05, 1.0);
  w *= fill * p.radius() * p.radius() / w.trace();
  return PriorCovariance(p.unwhiten(w));
}

GramEnsemble random_ensemble(oracle::Rng& rng, int d, int count, int rank) {
  std::vector<Matrix> grams;
  for (int i = 0; i < count; ++i) grams.push_back(rng.psd(d, rank));
  return GramEnsemble(std::move(grams), 0, {});
}

Outcome markov_identity() {
  oracle::Rng rng(101);
  const char* names[] = {"iid", "5^t", "t+1", "1+log(t+1)", "1+loglog"};
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int length = rng.integer(1, 64);
    const MarkovChainPath path =
        markov_chain(scaling_by_name(names[rng.integer(0, 4)]), length, 1000 + k);
    const double lhs = path.x.squaredNorm();
    const double rhs = path.z.dot(markov_m_matrix(path.r) * path.z);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
  }
  return {worst <= 1e-10, fmt::format("max relative error {:.3g} over 100 chains", worst)};
}

Outcome matrix_lemma() {
  oracle::Rng rng(102);
  double worst_gap = 0.0, worst_eq = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const int d = rng.integer(1, 6);
    const Matrix a = rng.spd(d);
    const Matrix b = rng.psd(d, rng.integer(0, d));
    const Matrix dm = rng.gaussian(d, d) * b;
    const Matrix b_pinv = b.completeOrthogonalDecomposition().pseudoInverse();
    const Matrix identity = Matrix::Identity(d, d);
    const Matrix target = (a.inverse() + b).inverse();
    const Matrix lhs = (identity - dm) * a * (identity - dm).transpose() + dm * b_pinv * dm.transpose();
    worst_gap = std::min(worst_gap, min_eigenvalue(symmetrize(lhs - target)));
    const Matrix opt = target * b;
    const Matrix eq = (identity - opt) * a * (identity - opt).transpose() + opt * b_pinv * opt.transpose();
    worst_eq = std::max(worst_eq, (eq - target).norm());
  }
  return {worst_gap >= -1e-8 && worst_eq <= 1e-10,
          fmt::format("min eigenvalue {:.3g}, equality residual {:.3g}", worst_gap, worst_eq)};
}

Outcome concavity() {
  oracle::Rng rng(103);
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 200; ++k) {
    const int d = rng.integer(1, 4);
    const auto p = EllipticalProblem::create(rng.spd(d), rng.spd(d), rng.uniform(0.3, 3.0), 1.0);
    const GramEnsemble e = random_ensemble(rng, d, 5, d);
    const PriorCovariance a = random_feasible(rng, p, rng.uniform(0.05, 1.0));
    const PriorCovariance b = random_feasible(rng, p, rng.uniform(0.05, 1.0));
    const double mid = objective(e, p, PriorCovariance(0.5 * (a.matrix() + b.matrix())));
    worst = std::min(worst, mid - 0.5 * (objective(e, p, a) + objective(e, p, b)));
  }
  return {worst >= -1e-10, fmt::format("min midpoint slack {:.3g}", worst)};
}

Outcome gradient_fd() {
  oracle::Rng rng(104);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto p = EllipticalProblem::create(rng.spd(3), rng.spd(3), 1.5, 1.0);
    const GramEnsemble e = random_ensemble(rng, 3, 5, 2);
    const PriorCovariance omega = random_feasible(rng, p, 0.6);
    const Matrix h = rng.symmetric(3);
    const double step = 1e-5 * omega.matrix().norm() / h.norm();
    const double fd = (objective(e, p, PriorCovariance(omega.matrix() + step * h)) -
                       objective(e, p, PriorCovariance(omega.matrix() - step * h))) /
                      (2.0 * step);
    const double analytic = frobenius_inner(gradient(e, p, omega), h);
    worst = std::max(worst, std::abs(fd - analytic) / std::abs(analytic));
  }
  return {worst < 1e-4, fmt::format("max relative error {:.3g}", worst)};
}

Outcome isotropic_optimum() {
  const int n = 8, d = 4;
  const double rho = 1.0, sigma = 1.0;
  // G = Σ̂ with radius √n ρ/σ is the d_n program.
  const auto p = EllipticalProblem::isotropic(d, std::sqrt(n) * rho / sigma, 1.0);
  const GramEnsemble e = gram_ensemble(GaussianSampler{n, d}, 200, std::sqrt(n), 105);
  const FunctionalResult r = maximize_phi(p, e);
  const Matrix& w = r.maximizer.matrix();
  const double diag = w.diagonal().mean();
  const double off = (w - Matrix(w.diagonal().asDiagonal())).cwiseAbs().maxCoeff();
  const double target = n * rho * rho / (sigma * sigma * d);
  const bool pass = r.converged && off <= 0.05 * diag && std::abs(diag - target) <= 0.05 * target;
  return {pass, fmt::format("mean diagonal {:.5g} (target {:.5g}), max off-diagonal {:.3g}, "
                            "converged {}", diag, target, off, r.converged)};
}

Outcome mourtada() {
  const int n = 10;
  const double rho = 1e3, sigma = 1.0;
  const GramEnsemble e = gram_ensemble(GaussianSampler{n, 1}, 10000, sigma, 106);
  const FunctionalResult r = maximize_phi(EllipticalProblem::isotropic(1, rho, sigma), e);
  const double scaled = r.value * n / (sigma * sigma);
  const Estimate limit = mourtada_limit(e, Matrix::Identity(1, 1));
  const double expected = static_cast<double>(n) / (n - 2);
  const bool pass = std::abs(scaled - expected) <= 0.02 * expected;
  return {pass, fmt::format("scaled functional {:.5g}, E tr(inverse) {:.5g} +- {:.2g}, target {:.5g}",
                            scaled, limit.value, limit.std_error, expected)};
}

Outcome pinsker() {
  oracle::Rng rng(107);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    SequenceProblem seq;
    seq.eps.resize(3);
    seq.a.resize(3);
    for (int j = 0; j < 3; ++j) {
      seq.eps(j) = rng.uniform(0.1, 2.0);
      seq.a(j) = rng.uniform(0.5, 5.0);
    }
    std::sort(seq.a.data(), seq.a.data() + 3);
    seq.radius = rng.uniform(0.2, 3.0);
    const double c2 = seq.radius * seq.radius;
    const int m = 1000;
    double grid = 0.0;
    for (int i = 0; i <= m; ++i) {
      for (int j = 0; i + j <= m; ++j) {
        const double u[3] = {i * c2 / m, j * c2 / m, (m - i - j) * c2 / m};
        double v = 0.0;
        for (int t = 0; t < 3; ++t) {
          const double tau2 = u[t] / (seq.a(t) * seq.a(t));
          const double e2 = seq.eps(t) * seq.eps(t);
          v += tau2 * e2 / (tau2 + e2);
        }
        grid = std::max(grid, v);
      }
    }
    worst = std::max(worst, std::abs(pinsker_waterfill(seq).value - grid));
  }
  return {worst < 1e-4, fmt::format("max |closed - grid| {:.3g}", worst)};
}

Outcome sobolev_slope() {
  const double slope = sobolev_rate(2.0, 1, log_grid(1e2, 1e6, 25));
  return {slope >= 0.15 && slope <= 0.25, fmt::format("slope {:.4f} (target 0.2)", slope)};
}

Outcome saddle() {
  oracle::Rng rng(108);
  double worst = 0.0;
  bool converged = true;
  for (int k = 0; k < 5; ++k) {
    const auto p = EllipticalProblem::create(rng.spd(3), rng.spd(3), rng.uniform(0.5, 2.0), 1.0);
    const GramEnsemble e = random_ensemble(rng, 3, 20, 2);
    const FunctionalResult opt = maximize_phi(p, e);
    converged = converged && opt.converged;
    const double risk = worst_case_risk(RidgeEstimator(p, opt.maximizer), e).value;
    worst = std::max(worst, std::abs(risk / opt.value - 1.0));
  }
  return {converged && worst <= 0.02, fmt::format("max |risk/phi - 1| {:.3g}", worst)};
}

Outcome bayes_oracle() {
  oracle::Rng rng(109);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const int d = rng.integer(1, 4);
    const auto p = EllipticalProblem::create(rng.spd(d), rng.spd(d), rng.uniform(0.5, 2.0), 1.0);
    const GramEnsemble e = random_ensemble(rng, d, 5, d);
    const PriorCovariance omega = random_feasible(rng, p, 1.0);
    const Estimate b = bayes_oracle_risk(p, omega, e, 100000, 2000 + k);
    worst = std::max(worst, std::abs(b.value - objective(e, p, omega)) / b.std_error);
  }
  return {worst < 3.0, fmt::format("max |bayes - objective| / stderr {:.3g}", worst)};
}

Outcome limit_relation() {
  Matrix g(3, 3);
  g << 3.0, 0.5, 0.2, 0.5, 2.0, 0.3, 0.2, 0.3, 1.5;
  const GramEnsemble e = GramEnsemble::deterministic(g);
  const auto p = EllipticalProblem::isotropic(3, 1e3, 1.0);
  const double full = maximize_phi(p, e).value;
  const double half = maximize_phi(p.with_radius(500.0), e).value;
  return {full / half <= 1.05, fmt::format("phi(rho)/phi(rho/2) = {:.6f}", full / half)};
}

Outcome figure1_ratio() {
  Figure1Config cfg;
  cfg.n_list = {128};
  cfg.tau_list = {10.0};
  cfg.lambda_list = {0.0, 0.99};
  cfg.seed = 110;
  const std::vector<Figure1Row> rows = figure1(cfg);
  const std::size_t gammas = rows.size() / 2;
  double best = 0.0, best_gamma = 0.0, reversed = 0.0, reversed_gamma = 0.0;
  for (std::size_t g = 0; g < gammas; ++g) {
    const Figure1Row& iso = rows[g];
    const Figure1Row& heavy = rows[gammas + g];
    if (iso.ell / heavy.u > best) {
      best = iso.ell / heavy.u;
      best_gamma = iso.gamma;
    }
    if (heavy.ell / iso.u > reversed) {
      reversed = heavy.ell / iso.u;
      reversed_gamma = iso.gamma;
    }
  }
  return {best > 50.0,
          fmt::format("max over gamma of ell(lambda=0)/u(lambda=0.99) = {:.4g} at gamma {:.3g}; "
                      "ell(lambda=0.99)/u(lambda=0) reaches {:.4g} at gamma {:.3g}",
                      best, best_gamma, reversed, reversed_gamma)};
}

Outcome figure2_ordering() {
  Figure2Config cfg;
  cfg.tau_list = {10.0};
  cfg.mc_trials = 1000;
  cfg.seed = 111;
  const std::vector<Figure2Row> rows = figure2(cfg);
  const std::size_t t_count = Figure2Config::default_t_grid().size();
  int violations = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t ti = 0; ti < t_count; ++ti) {
    for (std::size_t pi = 0; pi + 1 < cfg.psi_names.size(); ++pi) {
      const Figure2Row& lo = rows[pi * t_count + ti];
      const Figure2Row& hi = rows[(pi + 1) * t_count + ti];
      const double slack = std::hypot(lo.std_error, hi.std_error);
      const double excess = (lo.phi_normalized - hi.phi_normalized) / slack;
      worst = std::max(worst, excess);
      if (excess > 2.0) ++violations;
    }
  }
  return {violations == 0,
          fmt::format("{} ordering violations; largest (lower - upper)/stderr {:.3g}", violations, worst)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"markov_identity", 1, markov_identity},   {"matrix_lemma", 5, matrix_lemma},
      {"concavity", 10, concavity},               {"gradient_fd", 10, gradient_fd},
      {"isotropic_optimum", 30, isotropic_optimum}, {"mourtada", 30, mourtada},
      {"pinsker", 60, pinsker},                   {"sobolev_slope", 10, sobolev_slope},
      {"saddle", 60, saddle},                     {"bayes_oracle", 60, bayes_oracle},
      {"limit_relation", 10, limit_relation},     {"figure1_ratio", 300, figure1_ratio},
      {"figure2_ordering", 300, figure2_ordering},
  };
  std::vector<std::string> selected(argv + 1, argv + argc);
  for (const std::string& name : selected) {
    if (std::none_of(criteria.begin(), criteria.end(), [&](const Criterion& c) { return c.name == name; })) {
      fmt::print(stderr, "unknown criterion '{}'\n", name);
      return 2;
    }
  }

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.name) == selected.end()) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.check();
    } catch (const std::exception& e) {
      outcome = {false, fmt::format("exception: {}", e.what())};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds <= c.budget_seconds;
    const bool pass = outcome.pass && in_time;
    if (!pass) ++failures;
    fmt::print("{} {}: {} [{:.2f}s of {:.0f}s]\n", pass ? "PASS" : "FAIL", c.name, outcome.detail,
               seconds, c.budget_seconds);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
