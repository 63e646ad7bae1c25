#include "minimax/experiments.hpp"

#include <fmt/core.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "minimax/closed_form.hpp"
#include "minimax/ensembles.hpp"
#include "minimax/errors.hpp"
#include "minimax/functional.hpp"
#include "minimax/random.hpp"
#include "minimax/stats.hpp"

namespace minimax {

int worker_count() {
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("MINIMAX_WORKERS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) workers = std::min(workers, cap);
  }
  return workers;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<double> Figure1Config::default_gamma_grid() {
  const Vector grid = log_grid(0.05, 4.0, 12);
  return {grid.data(), grid.data() + grid.size()};
}

void Figure1Config::validate() const {
  if (n_list.empty() || tau_list.empty() || lambda_list.empty()) {
    throw ValidationError("figure1 grids n_list, tau_list and lambda_list must be nonempty");
  }
  for (int n : n_list) {
    if (n < 1) throw ValidationError(fmt::format("n_list entry {} is not >= 1", n));
  }
  for (double tau : tau_list) {
    if (!(tau > 0.0)) throw ValidationError(fmt::format("tau_list entry {} is not positive", tau));
  }
  for (double lambda : lambda_list) {
    if (!(lambda >= 0.0 && lambda < 1.0)) {
      throw ValidationError(fmt::format("lambda_list entry {} is outside [0, 1)", lambda));
    }
  }
  for (double gamma : gamma_grid) {
    if (!(gamma > 0.0)) throw ValidationError(fmt::format("gamma_grid entry {} is not positive", gamma));
  }
  if (replicates < 2) throw ValidationError("replicates must be >= 2");
}

std::vector<Figure1Row> figure1(const Figure1Config& input) {
  Figure1Config cfg = input;
  if (cfg.gamma_grid.empty()) cfg.gamma_grid = Figure1Config::default_gamma_grid();
  cfg.validate();

  const std::size_t n_count = cfg.n_list.size();
  const std::size_t gamma_count = cfg.gamma_grid.size();
  const std::size_t lambda_count = cfg.lambda_list.size();
  const std::size_t tau_count = cfg.tau_list.size();

  // One job per (n, γ, λ); each keeps (ℓ, u) estimates for every τ.
  struct JobResult {
    int d = 0;
    std::vector<Estimate> ell;
    std::vector<Estimate> u;
  };
  std::vector<JobResult> results(n_count * gamma_count * lambda_count);
  parallel_for(results.size(), [&](std::size_t job) {
    const std::size_t li = job % lambda_count;
    const std::size_t gi = (job / lambda_count) % gamma_count;
    const std::size_t ni = job / (lambda_count * gamma_count);
    const int n = cfg.n_list[ni];
    const double gamma = cfg.gamma_grid[gi];
    const double lambda = cfg.lambda_list[li];
    const int d = static_cast<int>(std::ceil(gamma * n - 1e-9));
    const double c_d = dicker_cd(d);
    const std::uint64_t cell_seed = derive_seed(
        derive_seed(cfg.seed, static_cast<std::uint64_t>(n)), std::bit_cast<std::uint64_t>(gamma));

    std::vector<MeanAccumulator> ell(tau_count), u(tau_count);
    for (int rep = 0; rep < cfg.replicates; ++rep) {
      const DesignMatrix x =
          sample_mixture_design(n, d, lambda, derive_seed(cell_seed, static_cast<std::uint64_t>(rep)));
      // Nonzero spectrum of Σ̂ = XᵀX/n from the smaller Gram side.
      const bool wide = d > n;
      const int side = wide ? n : d;
      Matrix small = Matrix::Zero(side, side);
      if (wide) {
        small.selfadjointView<Eigen::Lower>().rankUpdate(x.x, 1.0 / n);
      } else {
        small.selfadjointView<Eigen::Lower>().rankUpdate(x.x.transpose(), 1.0 / n);
      }
      const Vector spectrum =
          sym_eig(Matrix(small.selfadjointView<Eigen::Lower>())).values.cwiseMax(0.0);
      const double zeros = static_cast<double>(d - side);
      for (std::size_t ti = 0; ti < tau_count; ++ti) {
        const double tau2 = cfg.tau_list[ti] * cfg.tau_list[ti];
        const double ridge_u = d / (n * tau2);
        const double ridge_l = ridge_u / c_d;
        const double tr_u = (spectrum.array() + ridge_u).inverse().sum() + zeros / ridge_u;
        const double tr_l = (spectrum.array() + ridge_l).inverse().sum() + zeros / ridge_l;
        u[ti].add(tr_u / (tau2 * n));
        ell[ti].add(tr_l / (tau2 * n));
      }
    }
    JobResult& out = results[job];
    out.d = d;
    for (std::size_t ti = 0; ti < tau_count; ++ti) {
      out.ell.push_back(ell[ti].estimate());
      out.u.push_back(u[ti].estimate());
    }
  });

  std::vector<Figure1Row> rows;
  rows.reserve(n_count * tau_count * lambda_count * gamma_count);
  for (std::size_t ni = 0; ni < n_count; ++ni) {
    for (std::size_t ti = 0; ti < tau_count; ++ti) {
      for (std::size_t li = 0; li < lambda_count; ++li) {
        for (std::size_t gi = 0; gi < gamma_count; ++gi) {
          const JobResult& r = results[(ni * gamma_count + gi) * lambda_count + li];
          Figure1Row row{cfg.n_list[ni], cfg.tau_list[ti], cfg.lambda_list[li],
                         cfg.gamma_grid[gi], r.d, r.ell[ti].value, r.u[ti].value,
                         r.ell[ti].std_error, r.u[ti].std_error};
          if (row.ell > row.u + 2.0 * (row.stderr_ell + row.stderr_u)) {
            throw NumericalError(fmt::format(
                "figure1 row n={} tau={} lambda={} gamma={} has ell {:.6g} > u {:.6g}", row.n,
                row.tau, row.lambda, row.gamma, row.ell, row.u));
          }
          rows.push_back(row);
        }
      }
    }
  }
  return rows;
}

std::vector<int> Figure2Config::default_t_grid() {
  std::vector<int> grid;
  for (int k = 0; k <= 5; ++k) grid.push_back(static_cast<int>(std::lround(std::pow(10.0, 1.0 + k / 2.0))));
  return grid;
}

void Figure2Config::validate() const {
  if (psi_names.empty()) throw ValidationError("psi_names must be nonempty");
  for (const std::string& name : psi_names) scaling_by_name(name);
  if (tau_list.empty()) throw ValidationError("tau_list must be nonempty");
  for (double tau : tau_list) {
    if (!(tau > 0.0)) throw ValidationError(fmt::format("tau_list entry {} is not positive", tau));
  }
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < 1) throw ValidationError(fmt::format("T_grid entry {} is not >= 1", t_grid[i]));
    if (i > 0 && t_grid[i] <= t_grid[i - 1]) throw ValidationError("T_grid must be increasing");
  }
  if (mc_trials < 2) throw ValidationError("mc_trials must be >= 2");
}

std::vector<Figure2Row> figure2(const Figure2Config& input) {
  Figure2Config cfg = input;
  if (cfg.t_grid.empty()) cfg.t_grid = Figure2Config::default_t_grid();
  cfg.validate();

  const std::size_t psi_count = cfg.psi_names.size();
  const std::size_t t_count = cfg.t_grid.size();
  const std::size_t tau_count = cfg.tau_list.size();
  std::vector<std::vector<Estimate>> results(psi_count * t_count);
  parallel_for(results.size(), [&](std::size_t job) {
    const std::size_t pi = job / t_count;
    const std::size_t ti = job % t_count;
    const int length = cfg.t_grid[ti];
    const Vector r = scaling_by_name(cfg.psi_names[pi]).ratios(length);
    const Matrix m = markov_m_matrix(r);
    // Common draws of z across ψ at a fixed T.
    const std::vector<double> forms = markov_quadratic_forms(
        m, cfg.mc_trials, derive_seed(cfg.seed, static_cast<std::uint64_t>(length)));
    for (std::size_t k = 0; k < tau_count; ++k) {
      const double tau = cfg.tau_list[k];
      const Estimate phi = markov_phi_from_forms(forms, tau, 1.0);
      results[job].push_back({phi.value / (tau * tau), phi.std_error / (tau * tau)});
    }
  });

  std::vector<Figure2Row> rows;
  rows.reserve(psi_count * t_count * tau_count);
  for (std::size_t pi = 0; pi < psi_count; ++pi) {
    for (std::size_t ti = 0; ti < t_count; ++ti) {
      for (std::size_t k = 0; k < tau_count; ++k) {
        const Estimate& e = results[pi * t_count + ti][k];
        rows.push_back({cfg.psi_names[pi], cfg.t_grid[ti], cfg.tau_list[k], e.value, e.std_error});
      }
    }
  }
  return rows;
}

void write_figure1_csv(const std::vector<Figure1Row>& rows, std::ostream& out) {
  fmt::print(out, "# schema: {}\n", kFigure1Schema);
  fmt::print(out, "n,tau,lambda,gamma,d,ell,u,stderr_ell,stderr_u\n");
  for (const Figure1Row& r : rows) {
    fmt::print(out, "{},{:.17g},{:.17g},{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.n, r.tau,
               r.lambda, r.gamma, r.d, r.ell, r.u, r.stderr_ell, r.stderr_u);
  }
}

void write_figure2_csv(const std::vector<Figure2Row>& rows, std::ostream& out) {
  fmt::print(out, "# schema: {}\n", kFigure2Schema);
  fmt::print(out, "psi,T,tau,phi_normalized,stderr\n");
  for (const Figure2Row& r : rows) {
    fmt::print(out, "{},{},{:.17g},{:.17g},{:.17g}\n", r.psi, r.t, r.tau, r.phi_normalized,
               r.std_error);
  }
}

}  // namespace minimax
