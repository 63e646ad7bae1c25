#include "minimax/functional.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "minimax/errors.hpp"
#include "minimax/random.hpp"

namespace minimax {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

void check_dims(const EllipticalProblem& problem, const GramEnsemble& ensemble) {
  if (problem.dim() != ensemble.dim()) {
    throw ValidationError(fmt::format("problem dimension {} does not match ensemble dimension {}",
                                      problem.dim(), ensemble.dim()));
  }
}

void check_omega(const EllipticalProblem& problem, const PriorCovariance& omega) {
  if (omega.matrix().rows() != problem.dim()) {
    throw ValidationError(fmt::format("Omega has dimension {}, problem has {}",
                                      omega.matrix().rows(), problem.dim()));
  }
}

double member_stderr(const std::vector<double>& values) {
  MeanAccumulator acc;
  for (double v : values) acc.add(v);
  return acc.std_error();
}

// Sorted draws of Σ λ_i Z_i².
std::vector<double> quadratic_form_draws(const Vector& lambda, int draws, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<double> q(draws);
  for (int k = 0; k < draws; ++k) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      const double z = rng.normal();
      sum += lambda(i) * z * z;
    }
    q[k] = sum;
  }
  std::sort(q.begin(), q.end());
  return q;
}

struct SharpContext {
  Vector lambda;
  Matrix whitened;
};

SharpContext prepare_sharp(const EllipticalProblem& problem, const PriorCovariance& omega) {
  check_omega(problem, omega);
  const double cap = problem.radius() * problem.radius();
  const double trace = omega.whitened_trace(problem);
  if (std::abs(trace - cap) > 1e-6 * cap) {
    throw ValidationError(fmt::format(
        "sharp lower bound needs an active trace constraint: tr = {:.10g}, rho^2 = {:.10g}", trace,
        cap));
  }
  const Matrix scaled = problem.error_sqrt() * omega.matrix() * problem.error_sqrt() / cap;
  return {sym_eig(scaled).values.cwiseMax(0.0), problem.whiten(omega.matrix())};
}

SharpLowerBound sharp_from_draws(const WhitenedObjective& f, const SharpContext& ctx,
                                 const std::vector<double>& q, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw ValidationError(fmt::format("tau must lie in (0, 1], got {}", tau));
  }
  const double draws = static_cast<double>(q.size());
  const double threshold = 1.0 / (tau * tau);
  const auto above = q.end() - std::upper_bound(q.begin(), q.end(), threshold);
  const double p = static_cast<double>(above) / draws;

  SharpLowerBound out;
  out.tau = tau;
  out.tail_probability = p;
  out.c = tau * tau * (1.0 - p);
  out.c_std_error = tau * tau * std::sqrt(p * (1.0 - p) / draws);
  auto bound_at = [&](double c) {
    return c > 0.0 ? f.evaluate(c * ctx.whitened, false).value : 0.0;
  };
  out.estimate = bound_at(out.c);
  out.value = bound_at(out.c - out.c_std_error);
  out.std_error = out.estimate - out.value;
  return out;
}

}  // namespace

WhitenedObjective::WhitenedObjective(const EllipticalProblem& problem,
                                     const GramEnsemble& ensemble) {
  check_dims(problem, ensemble);
  const Matrix& root = problem.constraint_sqrt();
  error_ = symmetrize(root * problem.error_metric() * root);
  grams_.reserve(ensemble.size());
  for (const Matrix& g : ensemble.grams()) grams_.push_back(symmetrize(root * g * root));
}

WhitenedObjective::Evaluation WhitenedObjective::evaluate(const Matrix& whitened_omega,
                                                          bool with_gradient) const {
  const Eigen::Index d = error_.rows();
  const Matrix s = sym_sqrt(whitened_omega);
  const Matrix identity = Matrix::Identity(d, d);

  Evaluation out;
  out.member_values.reserve(grams_.size());
  if (with_gradient) out.gradient = Matrix::Zero(d, d);
  double total = 0.0;
  for (std::size_t i = 0; i < grams_.size(); ++i) {
    const Matrix& g = grams_[i];
    Matrix a = identity + s * g * s;
    Eigen::LLT<Matrix> llt(symmetrize(a));
    if (llt.info() != Eigen::Success) {
      throw NumericalError(fmt::format(
          "Cholesky of I + S G S failed for ensemble member {} (max |G| = {:.3g})", i,
          g.cwiseAbs().maxCoeff()));
    }
    const Matrix h = symmetrize(s * llt.solve(s));
    const double value = frobenius_inner(error_, h);
    out.member_values.push_back(value);
    total += value;
    if (with_gradient) {
      const Matrix w = identity - h * g;
      out.gradient.noalias() += w.transpose() * error_ * w;
    }
  }
  const double count = static_cast<double>(grams_.size());
  out.value = total / count;
  if (with_gradient) out.gradient = symmetrize(out.gradient / count);
  return out;
}

double objective(const GramEnsemble& ensemble, const EllipticalProblem& problem,
                 const PriorCovariance& omega) {
  check_omega(problem, omega);
  return WhitenedObjective(problem, ensemble).evaluate(problem.whiten(omega.matrix()), false).value;
}

Matrix gradient(const GramEnsemble& ensemble, const EllipticalProblem& problem,
                const PriorCovariance& omega) {
  check_omega(problem, omega);
  WhitenedObjective f(problem, ensemble);
  const Matrix g = f.evaluate(problem.whiten(omega.matrix()), true).gradient;
  return symmetrize(problem.constraint_inv_sqrt() * g * problem.constraint_inv_sqrt());
}

FunctionalResult maximize_phi(const EllipticalProblem& problem, const GramEnsemble& ensemble,
                              const OptimizerOptions& opts) {
  if (opts.max_iter < 1) throw ValidationError("max_iter must be >= 1");
  if (!(opts.tol > 0.0)) throw ValidationError("tol must be positive");
  const WhitenedObjective f(problem, ensemble);
  const int d = problem.dim();
  const double cap = problem.radius() * problem.radius();
  const double floor = problem.eigen_floor();
  auto project = [&](const Matrix& m) { return project_whitened(m, floor, cap); };
  auto gap_of = [&](const Matrix& grad, const Matrix& x) {
    return std::max(0.0, cap * top_eigenpair(grad).first - frobenius_inner(grad, x));
  };

  Matrix x = (cap / d) * Matrix::Identity(d, d);
  WhitenedObjective::Evaluation current = f.evaluate(x, true);
  FunctionalResult result;
  result.objective_trace.push_back(current.value);

  const double grad_scale = current.gradient.norm();
  // Unit step in units of the feasible set diameter.
  const double base_step = grad_scale > 0.0 ? cap / grad_scale : 1.0;
  const double min_step = 1e-14 * base_step;
  const double max_step = 1e14 * base_step;
  double step = base_step;
  double gap = gap_of(current.gradient, x);

  int iter = 0;
  bool converged = gap <= opts.tol * std::abs(current.value);
  while (!converged && iter < opts.max_iter) {
    ++iter;
    Matrix trial;
    WhitenedObjective::Evaluation next;
    bool accepted = false;
    double trial_step = step;
    for (int k = 0; k < kMaxBacktracks; ++k) {
      trial = project(x + trial_step * current.gradient);
      const double ascent = frobenius_inner(current.gradient, trial - x);
      if (ascent <= 0.0) break;
      next = f.evaluate(trial, true);
      if (next.value >= current.value + kArmijo * ascent) {
        accepted = true;
        break;
      }
      trial_step *= 0.5;
      if (trial_step < min_step) break;
    }
    if (!accepted) {
      // No ascent direction left at working precision.
      converged = gap <= 1e-6 * std::abs(current.value);
      break;
    }

    const Matrix s = trial - x;
    const double curvature = -frobenius_inner(s, next.gradient - current.gradient);
    step = curvature > 0.0 ? std::clamp(s.squaredNorm() / curvature, min_step, max_step)
                           : std::min(2.0 * trial_step, max_step);

    const double change = (next.value - current.value) / std::max(std::abs(next.value), 1e-300);
    x = trial;
    current = std::move(next);
    result.objective_trace.push_back(current.value);
    gap = gap_of(current.gradient, x);
    converged = change < opts.tol || gap <= opts.tol * std::abs(current.value);
  }

  result.value = current.value;
  result.iterations = iter;
  result.duality_gap = gap;
  result.grad_norm = (project(x + base_step * current.gradient) - x).norm() / base_step;
  result.mc_stderr = member_stderr(current.member_values);
  result.converged = converged;
  result.maximizer = PriorCovariance(problem.unwhiten(x), floor);
  return result;
}

double dicker_cd(int d) {
  if (d < 1) throw ValidationError(fmt::format("dimension must be >= 1, got {}", d));
  if (d == 1) return 0.25;
  const double dd = static_cast<double>(d);
  return (1.0 - 1.0 / (2.0 * dd - 1.0)) * (1.0 - std::exp(-std::pow(dd, 1.5) / 4.0));
}

SharpLowerBound sharp_lower(const EllipticalProblem& problem, const GramEnsemble& ensemble,
                            double tau, const PriorCovariance& omega, int mc_draws,
                            std::uint64_t seed) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw ValidationError(fmt::format("tau must lie in (0, 1], got {}", tau));
  }
  if (mc_draws < 2) throw ValidationError("mc_draws must be >= 2");
  const SharpContext ctx = prepare_sharp(problem, omega);
  const WhitenedObjective f(problem, ensemble);
  return sharp_from_draws(f, ctx, quadratic_form_draws(ctx.lambda, mc_draws, seed), tau);
}

RiskBracket risk_bracket(const EllipticalProblem& problem, const GramEnsemble& ensemble,
                         const BracketOptions& opts) {
  const FunctionalResult upper = maximize_phi(problem, ensemble, opts.optimizer);
  const FunctionalResult lower =
      maximize_phi(problem.with_radius(problem.radius() / 2.0), ensemble, opts.optimizer);
  for (const FunctionalResult* r : {&upper, &lower}) {
    if (!r->converged) {
      throw NumericalError(fmt::format(
          "maximize_phi did not converge after {} iterations (gap {:.3g}, value {:.6g})",
          r->iterations, r->duality_gap, r->value));
    }
  }

  RiskBracket out;
  out.upper = upper.value;
  out.lower = lower.value;
  out.weak_lower = upper.value / 4.0;
  out.omega_star = upper.maximizer.matrix();

  if (opts.with_sharp) {
    if (opts.tau_grid < 1) throw ValidationError("tau_grid must be >= 1");
    const double cap = problem.radius() * problem.radius();
    // Ω⋆ sits on the trace boundary up to the projection's roundoff.
    const double scale = cap / upper.maximizer.whitened_trace(problem);
    const PriorCovariance boundary(scale * upper.maximizer.matrix());
    const SharpContext ctx = prepare_sharp(problem, boundary);
    const WhitenedObjective f(problem, ensemble);
    const std::vector<double> q =
        quadratic_form_draws(ctx.lambda, opts.mc_draws, derive_seed(opts.optimizer.seed, 0x5a));
    for (int k = 1; k <= opts.tau_grid; ++k) {
      const double tau = static_cast<double>(k) / opts.tau_grid;
      SharpLowerBound candidate = sharp_from_draws(f, ctx, q, tau);
      if (!out.sharp || candidate.value > out.sharp->value) out.sharp = candidate;
    }
  }
  return out;
}

FunctionalResult population_functional(const EllipticalProblem& problem, const Matrix& sigma_bar,
                                       int n, const OptimizerOptions& opts) {
  if (n < 1) throw ValidationError(fmt::format("n must be >= 1, got {}", n));
  const double scale = n / (problem.sigma() * problem.sigma());
  EnsembleMeta meta{"population", "{}", n, problem.dim(), problem.sigma()};
  const GramEnsemble single = GramEnsemble::deterministic(scale * sigma_bar, meta);
  FunctionalResult result = maximize_phi(problem, single, opts);
  result.value *= scale;
  for (double& v : result.objective_trace) v *= scale;
  return result;
}

PopulationSandwich to_population_sandwich(const EllipticalProblem& problem,
                                          const GramEnsemble& ensemble, const Matrix& sigma_bar,
                                          double kappa, const OptimizerOptions& opts) {
  if (!(kappa > 0.0)) throw ValidationError(fmt::format("kappa must be positive, got {}", kappa));
  const int n = ensemble.meta().n;
  if (n < 1) throw ValidationError("ensemble does not record its sample size n");
  const double sigma2 = problem.sigma() * problem.sigma();
  const double scale = n / sigma2;

  PopulationSandwich out;
  out.lhs = population_functional(problem, sigma_bar, n, opts).value;
  const FunctionalResult sample = maximize_phi(problem, ensemble, opts);
  out.mid = scale * sample.value;
  out.mid_stderr = scale * sample.mc_stderr;
  const double rho = problem.radius();
  out.rhs = (1.0 + rho * rho * kappa * kappa / sigma2) * out.lhs;
  const double slack = 2.0 * out.mid_stderr + 1e-9 * std::abs(out.rhs);
  out.holds = out.lhs <= out.mid + slack && out.mid <= out.rhs + slack;
  return out;
}

SingularSplit singular_split(const GramEnsemble& ensemble, const EllipticalProblem& problem) {
  check_dims(problem, ensemble);
  const int n = ensemble.meta().n;
  if (n < 1) throw ValidationError("ensemble does not record its sample size n");
  const int d = problem.dim();
  const double sigma2 = problem.sigma() * problem.sigma();
  const double rho2 = problem.radius() * problem.radius();
  const double threshold = (sigma2 / n) * (d / rho2);

  SingularSplit out;
  for (const Matrix& g : ensemble.grams()) {
    const Vector lambda = sym_eig((sigma2 / n) * g).values;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      if (lambda(i) > threshold) {
        out.estimation += (sigma2 / n) / lambda(i);
      } else {
        out.approximation += rho2 / d;
      }
    }
  }
  const double count = static_cast<double>(ensemble.size());
  out.estimation /= count;
  out.approximation /= count;
  out.reference =
      objective(ensemble, problem, PriorCovariance((rho2 / d) * Matrix::Identity(d, d)));
  return out;
}

}  // namespace minimax
