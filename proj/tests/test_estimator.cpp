#include <doctest.h>

#include <cmath>

#include "minimax/ensembles.hpp"
#include "minimax/errors.hpp"
#include "minimax/estimator.hpp"
#include "minimax/functional.hpp"
#include "oracles.hpp"

using namespace minimax;

namespace {

DesignMatrix design_of(const Matrix& x) {
  DesignMatrix d;
  d.x = x;
  return d;
}

PriorCovariance random_prior(oracle::Rng& rng, const EllipticalProblem& p, double fill) {
  Matrix w = rng.spd(p.dim(), 0.05, 1.0);
  w *= fill * p.radius() * p.radius() / w.trace();
  return PriorCovariance(p.unwhiten(w));
}

// Bias matrix and variance of the linear rule C = (Ω⁻¹ + G)⁻¹ by dense inverses.
std::pair<Matrix, double> dense_risk_terms(const Matrix& ke, const Matrix& omega,
                                           const std::vector<Matrix>& grams) {
  const int d = static_cast<int>(ke.rows());
  const Matrix identity = Matrix::Identity(d, d);
  Matrix bias = Matrix::Zero(d, d);
  double variance = 0.0;
  for (const Matrix& g : grams) {
    const Matrix c = (omega.inverse() + g).inverse();
    const Matrix shrink = c * g - identity;
    bias += shrink.transpose() * ke * shrink;
    variance += (ke * c * g * c.transpose()).trace();
  }
  return {bias / grams.size(), variance / grams.size()};
}

}  // namespace

TEST_CASE("fit basics") {
  oracle::Rng rng(1);
  const auto p = EllipticalProblem::isotropic(3, 1.0, 0.5);
  const RidgeEstimator est(p, random_prior(rng, p, 0.7));
  const DesignMatrix x = design_of(rng.gaussian(8, 3));
  CHECK(est.fit(x, Vector::Zero(8)).norm() == 0.0);

  const Vector y1 = rng.gaussian(8, 1), y2 = rng.gaussian(8, 1);
  const Vector sum = est.fit(x, y1 + y2);
  CHECK((sum - est.fit(x, y1) - est.fit(x, y2)).norm() <= 1e-12 * std::max(1.0, sum.norm()));

  CHECK_THROWS_AS(est.fit(design_of(rng.gaussian(8, 2)), y1), ValidationError);
  CHECK_THROWS_AS(est.fit(x, Vector::Zero(7)), ValidationError);
  CHECK_THROWS_AS(RidgeEstimator(p, PriorCovariance(Matrix::Identity(2, 2))), ValidationError);
}

TEST_CASE("fit approaches least squares for a flat prior") {
  oracle::Rng rng(2);
  const auto p = EllipticalProblem::isotropic(3, 1.0, 1.0);
  const RidgeEstimator est(p, PriorCovariance(1e6 * Matrix::Identity(3, 3)));
  const Matrix x = rng.gaussian(10, 3);
  const Vector y = rng.gaussian(10, 1);
  const Vector ols = x.colPivHouseholderQr().solve(y);
  CHECK((est.fit(design_of(x), y) - ols).norm() < 1e-3);
}

TEST_CASE("fit matches the stacked least-squares problem") {
  oracle::Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = rng.integer(1, 5), n = rng.integer(1, 10);
    const double sigma = rng.uniform(0.3, 2.0);
    const auto p = EllipticalProblem::create(rng.spd(d), rng.spd(d), 1.5, sigma);
    const PriorCovariance omega = random_prior(rng, p, 0.9);
    const Matrix x = rng.gaussian(n, d);
    const Vector y = rng.gaussian(n, 1);
    // min ‖[X/σ; L⁻¹] ϑ − [y/σ; 0]‖ with Ω = L Lᵀ.
    const Matrix l = Eigen::LLT<Matrix>(omega.matrix()).matrixL();
    Matrix stacked(n + d, d);
    stacked << x / sigma, l.inverse();
    Vector rhs = Vector::Zero(n + d);
    rhs.head(n) = y / sigma;
    const Vector expected = stacked.householderQr().solve(rhs);
    const Vector theta = RidgeEstimator(p, omega).fit(design_of(x), y);
    CHECK((theta - expected).norm() <= 1e-10 * std::max(1.0, expected.norm()));
    const Vector residual = (x.transpose() * x / (sigma * sigma) + omega.matrix().inverse()) * theta -
                            x.transpose() * y / (sigma * sigma);
    CHECK(residual.norm() <= 1e-10 * std::max(1.0, (x.transpose() * y).norm() / (sigma * sigma)));
  }
}

TEST_CASE("worst-case risk limits") {
  oracle::Rng rng(4);
  const Matrix ke = rng.spd(3), kc = rng.spd(3);
  const double rho = 1.7;
  const auto p = EllipticalProblem::create(ke, kc, rho, 1.0);
  const double pure_bias = rho * rho * sym_eig(p.constraint_sqrt() * ke * p.constraint_sqrt()).values.maxCoeff();

  const GramEnsemble zero = GramEnsemble::deterministic(Matrix::Zero(3, 3));
  const WorstCaseRisk z = worst_case_risk(RidgeEstimator(p, random_prior(rng, p, 0.5)), zero);
  CHECK(z.value == doctest::Approx(pure_bias).epsilon(1e-10));
  CHECK(z.variance == 0.0);

  const GramEnsemble g = GramEnsemble::deterministic(rng.psd(3, 3));
  const WorstCaseRisk tiny = worst_case_risk(RidgeEstimator(p, PriorCovariance(1e-12 * kc)), g);
  CHECK(tiny.value == doctest::Approx(pure_bias).epsilon(1e-6));
}

TEST_CASE("worst-case risk matches a brute-force search over the ellipse") {
  oracle::Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const double rho = rng.uniform(0.5, 2.0);
    const auto p = EllipticalProblem::create(rng.spd(2), rng.spd(2), rho, 1.0);
    const PriorCovariance omega = random_prior(rng, p, 0.8);
    std::vector<Matrix> grams;
    for (int i = 0; i < 4; ++i) grams.push_back(rng.psd(2, 1));
    const WorstCaseRisk w =
        worst_case_risk(RidgeEstimator(p, omega), GramEnsemble(grams, 0, {}));
    const auto [bias, variance] = dense_risk_terms(p.error_metric(), omega.matrix(), grams);
    CHECK(w.variance == doctest::Approx(variance).epsilon(1e-10));
    double best = 0.0;
    for (int k = 0; k < 20000; ++k) {
      const double angle = 2.0 * M_PI * k / 20000.0;
      Vector u(2);
      u << std::cos(angle), std::sin(angle);
      const Vector theta = rho * (oracle::sqrt_spd(p.constraint_metric()) * u);
      best = std::max(best, theta.dot(bias * theta) + variance);
    }
    CHECK(w.value >= best - 1e-10);
    CHECK(w.value <= best * (1.0 + 1e-6));
    CHECK(p.constraint_norm_sq(w.worst_theta) == doctest::Approx(rho * rho).epsilon(1e-10));
    CHECK(w.worst_theta.dot(bias * w.worst_theta) + variance == doctest::Approx(w.value).epsilon(1e-10));
  }
}

TEST_CASE("saddle consistency at the maximizer") {
  oracle::Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = EllipticalProblem::create(rng.spd(3), rng.spd(3), rng.uniform(0.5, 2.0), 1.0);
    std::vector<Matrix> grams;
    for (int i = 0; i < 10; ++i) grams.push_back(rng.psd(3, 2));
    const GramEnsemble e(grams, 0, {});
    const FunctionalResult opt = maximize_phi(p, e);
    REQUIRE(opt.converged);
    const WorstCaseRisk w = worst_case_risk(RidgeEstimator(p, opt.maximizer), e);
    CHECK(w.value >= opt.value * 0.98);
    CHECK(w.value <= opt.value * 1.02);
  }
}

TEST_CASE("Monte Carlo risk against the exact fixed-design risk") {
  oracle::Rng rng(7);
  const double sigma = 0.8;
  const auto p = EllipticalProblem::create(rng.spd(2), rng.spd(2), 1.2, sigma);
  const Matrix x = rng.gaussian(5, 2);
  const GramEnsemble fixed = gram_ensemble(FixedSampler{x}, 1, sigma, 0);
  const RidgeEstimator est(p, random_prior(rng, p, 0.9));
  const WorstCaseRisk w = worst_case_risk(est, fixed);

  const MonteCarloRisk at_zero = mc_risk(est, Vector::Zero(2), FixedSampler{x}, sigma, 20000, 1);
  CHECK(std::abs(at_zero.risk.value - w.variance) < 3.0 * at_zero.risk.std_error);

  const MonteCarloRisk worst = mc_risk(est, w.worst_theta, FixedSampler{x}, sigma, 20000, 2);
  CHECK(worst.feasible);
  CHECK(std::abs(worst.risk.value - w.value) < 3.0 * worst.risk.std_error);

  for (int trial = 0; trial < 20; ++trial) {
    Vector u = rng.gaussian(2, 1);
    u *= rng.uniform(0.0, 1.0) / u.norm();
    const Vector theta = p.radius() * (p.constraint_sqrt() * u);
    const MonteCarloRisk r = mc_risk(est, theta, FixedSampler{x}, sigma, 2000, 10 + trial);
    CHECK(r.risk.value <= w.value + 3.0 * r.risk.std_error);
  }

  const MonteCarloRisk outside = mc_risk(est, 10.0 * w.worst_theta, FixedSampler{x}, sigma, 10, 3);
  CHECK(!outside.feasible);
  CHECK_THROWS_AS(mc_risk(est, Vector::Zero(3), FixedSampler{x}, sigma, 10, 3), ValidationError);
}

TEST_CASE("noiseless interpolation") {
  oracle::Rng rng(8);
  const auto p = EllipticalProblem::isotropic(3, 1.0, 1.0);
  const RidgeEstimator est(p, PriorCovariance(1e8 * Matrix::Identity(3, 3)));
  Vector theta(3);
  theta << 0.3, -0.2, 0.4;
  const MonteCarloRisk r = mc_risk(est, theta, FixedSampler{rng.gaussian(3, 3)}, 0.0, 5, 1);
  CHECK(r.risk.value < 1e-10);
}

TEST_CASE("Bayes oracle risk") {
  const double omega = 2.0, g = 3.0;
  const auto p1 = EllipticalProblem::isotropic(1, 2.0, 1.0);
  const GramEnsemble e1 = GramEnsemble::deterministic(Matrix::Constant(1, 1, g));
  const PriorCovariance prior(Matrix::Constant(1, 1, omega));
  const Estimate scalar = bayes_oracle_risk(p1, prior, e1, 100000, 1);
  CHECK(objective(e1, p1, prior) == doctest::Approx(omega / (1.0 + omega * g)));
  CHECK(std::abs(scalar.value - omega / (1.0 + omega * g)) < 3.0 * scalar.std_error);

  oracle::Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = rng.integer(1, 3);
    const auto p = EllipticalProblem::create(rng.spd(d), rng.spd(d), rng.uniform(0.5, 2.0), 1.0);
    std::vector<Matrix> grams;
    for (int i = 0; i < 5; ++i) grams.push_back(rng.psd(d, d));
    const GramEnsemble e(grams, 0, {});
    const PriorCovariance o = random_prior(rng, p, 1.0);
    const Estimate b = bayes_oracle_risk(p, o, e, 100000, 100 + trial);
    CHECK(std::abs(b.value - objective(e, p, o)) < 3.0 * b.std_error);
  }
}
