#include "minimax/estimator.hpp"

#include <fmt/core.h>

#include "minimax/errors.hpp"
#include "minimax/random.hpp"

namespace minimax {

namespace {

double ke_norm_sq(const Matrix& error_metric, const Vector& v) {
  return v.dot(error_metric * v);
}

}  // namespace

RidgeEstimator::RidgeEstimator(EllipticalProblem problem, PriorCovariance prior)
    : problem_(std::move(problem)), prior_(std::move(prior)) {
  if (prior_.matrix().rows() != problem_.dim()) {
    throw ValidationError(fmt::format("prior has dimension {}, problem has {}",
                                      prior_.matrix().rows(), problem_.dim()));
  }
  prior_sqrt_ = sym_sqrt(prior_.matrix());
}

Matrix RidgeEstimator::posterior_covariance(const Matrix& gram) const {
  const Eigen::Index d = problem_.dim();
  if (gram.rows() != d || gram.cols() != d) {
    throw ValidationError(fmt::format("Gram matrix is {}x{}, expected {}x{}", gram.rows(),
                                      gram.cols(), d, d));
  }
  const Matrix a = Matrix::Identity(d, d) + prior_sqrt_ * gram * prior_sqrt_;
  Eigen::LLT<Matrix> llt(symmetrize(a));
  if (llt.info() != Eigen::Success) throw NumericalError("Cholesky of I + S G S failed");
  return symmetrize(prior_sqrt_ * llt.solve(prior_sqrt_));
}

Vector RidgeEstimator::fit_from_moments(const Matrix& gram, const Vector& moment) const {
  if (moment.size() != problem_.dim()) {
    throw ValidationError(
        fmt::format("moment vector has length {}, expected {}", moment.size(), problem_.dim()));
  }
  return posterior_covariance(gram) * moment;
}

Vector RidgeEstimator::fit(const DesignMatrix& x, const Vector& y) const {
  if (x.cols() != problem_.dim()) {
    throw ValidationError(
        fmt::format("design has {} columns, problem dimension is {}", x.cols(), problem_.dim()));
  }
  if (y.size() != x.rows()) {
    throw ValidationError(
        fmt::format("y has length {} but the design has {} rows", y.size(), x.rows()));
  }
  const double inv_var = 1.0 / (problem_.sigma() * problem_.sigma());
  const Matrix gram = inv_var * (x.x.transpose() * x.x);
  return fit_from_moments(gram, inv_var * (x.x.transpose() * y));
}

WorstCaseRisk worst_case_risk(const RidgeEstimator& est, const GramEnsemble& ensemble) {
  const EllipticalProblem& problem = est.problem();
  if (ensemble.dim() != problem.dim()) {
    throw ValidationError(fmt::format("ensemble dimension {} does not match problem dimension {}",
                                      ensemble.dim(), problem.dim()));
  }
  const Eigen::Index d = problem.dim();
  const Matrix& ke = problem.error_metric();
  const Matrix identity = Matrix::Identity(d, d);

  Matrix bias = Matrix::Zero(d, d);
  double variance = 0.0;
  for (const Matrix& g : ensemble.grams()) {
    const Matrix c = est.posterior_covariance(g);
    const Matrix shrink = c * g - identity;
    bias.noalias() += shrink.transpose() * ke * shrink;
    variance += frobenius_inner(ke, c * g * c);
  }
  const double count = static_cast<double>(ensemble.size());
  bias = symmetrize(bias / count);
  variance /= count;

  const Matrix& root = problem.constraint_sqrt();
  const auto [top, vec] = top_eigenpair(symmetrize(root * bias * root));
  const double rho2 = problem.radius() * problem.radius();

  WorstCaseRisk out;
  out.bias = rho2 * std::max(top, 0.0);
  out.variance = variance;
  out.value = out.bias + out.variance;
  out.worst_theta = problem.radius() * (root * vec);
  out.bias_matrix = bias;
  return out;
}

MonteCarloRisk mc_risk(const RidgeEstimator& est, const Vector& theta_star,
                       const SamplerSpec& sampler, double noise_sigma, int trials,
                       std::uint64_t seed) {
  const EllipticalProblem& problem = est.problem();
  if (trials < 2) throw ValidationError("trials must be >= 2");
  if (!(noise_sigma >= 0.0)) throw ValidationError("noise sigma must be nonnegative");
  if (theta_star.size() != problem.dim()) {
    throw ValidationError(fmt::format("theta* has length {}, expected {}", theta_star.size(),
                                      problem.dim()));
  }
  const double rho2 = problem.radius() * problem.radius();
  MonteCarloRisk out;
  out.feasible = problem.constraint_norm_sq(theta_star) <= rho2 * (1.0 + 1e-8);
  if (!out.feasible) {
    fmt::print(stderr, "warning: theta* lies outside the constraint ellipse\n");
  }

  MeanAccumulator acc;
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t trial_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    const DesignMatrix x = sample_design(sampler, trial_seed);
    RandomStream noise(derive_seed(trial_seed, 1));
    Vector y = x.x * theta_star;
    for (Eigen::Index r = 0; r < y.size(); ++r) y(r) += noise_sigma * noise.normal();
    const Vector err = est.fit(x, y) - theta_star;
    acc.add(ke_norm_sq(problem.error_metric(), err));
  }
  out.risk = acc.estimate();
  return out;
}

Estimate bayes_oracle_risk(const EllipticalProblem& problem, const PriorCovariance& omega,
                           const GramEnsemble& ensemble, int trials, std::uint64_t seed) {
  if (trials < 2) throw ValidationError("trials must be >= 2");
  if (ensemble.dim() != problem.dim()) {
    throw ValidationError(fmt::format("ensemble dimension {} does not match problem dimension {}",
                                      ensemble.dim(), problem.dim()));
  }
  const RidgeEstimator est(problem, omega);
  const Eigen::Index d = problem.dim();
  const Matrix prior_root = sym_sqrt(omega.matrix());

  std::vector<Matrix> posterior;
  std::vector<Matrix> gram_root;
  for (const Matrix& g : ensemble.grams()) {
    posterior.push_back(est.posterior_covariance(g));
    gram_root.push_back(sym_sqrt(g));
  }

  RandomStream rng(seed);
  Vector z(d), xi(d);
  MeanAccumulator acc;
  for (int k = 0; k < trials; ++k) {
    const std::size_t i = static_cast<std::size_t>(k) % ensemble.size();
    for (Eigen::Index j = 0; j < d; ++j) z(j) = rng.normal();
    for (Eigen::Index j = 0; j < d; ++j) xi(j) = rng.normal();
    const Vector theta = prior_root * z;
    const Vector moment = ensemble.grams()[i] * theta + gram_root[i] * xi;
    acc.add(ke_norm_sq(problem.error_metric(), posterior[i] * moment - theta));
  }
  return acc.estimate();
}

}  // namespace minimax
