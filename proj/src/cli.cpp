#include "minimax/cli.hpp"

#include <fmt/core.h>
#include <fmt/ostream.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "minimax/errors.hpp"
#include "minimax/json_io.hpp"

namespace minimax {

namespace {

namespace fs = std::filesystem;

struct Context {
  Json config;
  fs::path base_dir;
  std::uint64_t seed = 0;
};

// Output text plus whether it is CSV.
using Handler = std::function<std::string(const Context&)>;

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json estimate_json(const Estimate& e) { return to_json(e); }

GramEnsemble ensemble_from(const Context& ctx, const EllipticalProblem& problem,
                           const OptimizerOptions& opts) {
  const SamplerSpec sampler = sampler_from_json(require_key(ctx.config, "sampler", ""));
  return gram_ensemble(sampler, opts.n_replicates, problem.sigma(), ctx.seed);
}

Json ensemble_json(const GramEnsemble& e) {
  return Json{{"sampler", e.meta().sampler},
              {"params", Json::parse(e.meta().params)},
              {"N", e.size()},
              {"seed", e.seed()}};
}

Matrix read_csv_matrix(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (rows.empty()) continue;  // header
      throw ConfigError(fmt::format("'{}' line {}: non-numeric entry", path.string(), line_no));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ConfigError(fmt::format("'{}' line {}: {} columns, expected {}", path.string(), line_no,
                                    row.size(), rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError(fmt::format("'{}' has no data rows", path.string()));
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

std::string run_phi(const Context& ctx) {
  const EllipticalProblem problem = problem_from_json(require_key(ctx.config, "problem", ""));
  OptimizerOptions opts = optimizer_from_json(ctx.config.value("optimizer", Json()));
  opts.seed = ctx.seed;
  const GramEnsemble ensemble = ensemble_from(ctx, problem, opts);
  FunctionalResult result = maximize_phi(problem, ensemble, opts);
  Json out = to_json(result);
  out["ensemble"] = ensemble_json(ensemble);
  return dump(out);
}

std::string run_bracket(const Context& ctx) {
  const EllipticalProblem problem = problem_from_json(require_key(ctx.config, "problem", ""));
  BracketOptions opts;
  opts.optimizer = optimizer_from_json(ctx.config.value("optimizer", Json()));
  opts.optimizer.seed = ctx.seed;
  const Json sharp = ctx.config.value("sharp", Json::object());
  opts.with_sharp = optional_value<bool>(sharp, "enabled", "sharp", true);
  opts.tau_grid = optional_value<int>(sharp, "tau_grid", "sharp", opts.tau_grid);
  opts.mc_draws = optional_value<int>(sharp, "mc_draws", "sharp", opts.mc_draws);
  const GramEnsemble ensemble = ensemble_from(ctx, problem, opts.optimizer);
  Json out = to_json(risk_bracket(problem, ensemble, opts));
  out["ensemble"] = ensemble_json(ensemble);
  return dump(out);
}

std::string run_figure1(const Context& ctx) {
  Figure1Config cfg = figure1_config_from_json(ctx.config);
  cfg.seed = ctx.seed;
  std::ostringstream out;
  write_figure1_csv(figure1(cfg), out);
  return out.str();
}

std::string run_figure2(const Context& ctx) {
  Figure2Config cfg = figure2_config_from_json(ctx.config);
  cfg.seed = ctx.seed;
  std::ostringstream out;
  write_figure2_csv(figure2(cfg), out);
  return out.str();
}

std::string run_sequence(const Context& ctx) {
  SequenceProblem seq;
  seq.eps = vector_from_json(require_key(ctx.config, "eps", ""), "eps");
  seq.a = vector_from_json(require_key(ctx.config, "a", ""), "a");
  seq.radius = require_value<double>(ctx.config, "C", "");
  return dump(to_json(pinsker_waterfill(seq)));
}

std::string run_kernel(const Context& ctx) {
  const Json& c = ctx.config;
  const EigenSequence mu = sequence_from_json(require_key(c, "mu", ""), "mu");
  Json out = to_json(kernel_waterfill(mu, require_value<int>(c, "n", ""),
                                      require_value<double>(c, "rho", ""),
                                      require_value<double>(c, "sigma", "")));
  if (c.contains("rate")) {
    const Json& rate = c.at("rate");
    const Json& grid = require_key(rate, "grid", "rate");
    const Vector budgets =
        log_grid(require_value<double>(grid, "lo", "rate.grid"),
                 require_value<double>(grid, "hi", "rate.grid"),
                 optional_value<int>(grid, "count", "rate.grid", 25));
    out["rate_slope"] = sobolev_rate(require_value<double>(rate, "beta", "rate"),
                                     optional_value<int>(rate, "dim_x", "rate", 1), budgets);
  }
  return dump(out);
}

std::string run_covshift(const Context& ctx) {
  const Json& c = ctx.config;
  const EigenSequence mu = sequence_from_json(require_key(c, "mu", ""), "mu");
  return dump(to_json(covshift_lower(mu, require_value<double>(c, "B", ""),
                                     require_value<int>(c, "n", ""),
                                     require_value<double>(c, "rho", ""),
                                     require_value<double>(c, "sigma", ""))));
}

std::string run_markov(const Context& ctx) {
  const Json& c = ctx.config;
  Vector r;
  if (c.contains("r")) {
    r = vector_from_json(c.at("r"), "r");
  } else {
    r = scaling_by_name(require_value<std::string>(c, "psi", "")).ratios(require_value<int>(c, "T", ""));
  }
  const double rho = require_value<double>(c, "rho", "");
  const double sigma = require_value<double>(c, "sigma", "");
  const Estimate phi =
      markov_phi(markov_m_matrix(r), rho, sigma, optional_value<int>(c, "N_mc", "", 5000), ctx.seed);
  Json out = estimate_json(phi);
  out["T"] = r.size();
  out["normalized"] = phi.value / (rho * rho);
  return dump(out);
}

std::string run_estimate(const Context& ctx) {
  const Json& c = ctx.config;
  const EllipticalProblem problem = problem_from_json(require_key(c, "problem", ""));
  const Matrix x = read_csv_matrix(ctx.base_dir / require_value<std::string>(c, "x_csv", ""));
  const Matrix y = read_csv_matrix(ctx.base_dir / require_value<std::string>(c, "y_csv", ""));
  if (y.cols() != 1) throw ConfigError("y_csv must have exactly one column", "y_csv");

  Json out;
  std::optional<PriorCovariance> prior;
  if (c.contains("omega")) {
    prior.emplace(matrix_from_json(c.at("omega"), problem.dim(), "omega"));
  } else {
    OptimizerOptions opts = optimizer_from_json(c.value("optimizer", Json()));
    opts.seed = ctx.seed;
    const GramEnsemble ensemble = ensemble_from(ctx, problem, opts);
    const FunctionalResult result = maximize_phi(problem, ensemble, opts);
    out["phi"] = result.value;
    out["converged"] = result.converged;
    prior.emplace(result.maximizer);
  }
  const RidgeEstimator est(problem, *prior);
  const Vector theta = est.fit(DesignMatrix{x}, y.col(0));
  out["theta_hat"] = std::vector<double>(theta.data(), theta.data() + theta.size());
  out["omega"] = matrix_to_json(prior->matrix());
  return dump(out);
}

std::string run_dicker(const Context& ctx) {
  const Json& c = ctx.config;
  const int n = require_value<int>(c, "n", "");
  const double sigma = require_value<double>(c, "sigma", "");
  const Estimate e = dicker_functional(n, require_value<int>(c, "d", ""),
                                       require_value<double>(c, "rho", ""), sigma,
                                       optional_value<int>(c, "N_mc", "", 1000), ctx.seed);
  Json out = estimate_json(e);
  out["risk_upper"] = sigma * sigma / n * e.value;
  return dump(out);
}

std::string run_mourtada(const Context& ctx) {
  const Json& c = ctx.config;
  const SamplerSpec sampler = sampler_from_json(require_key(c, "sampler", ""));
  const double sigma = optional_value<double>(c, "sigma", "", 1.0);
  const GramEnsemble ensemble =
      gram_ensemble(sampler, optional_value<int>(c, "N", "", 1000), sigma, ctx.seed);
  const Matrix sigma_p = c.contains("Sigma_P")
                             ? matrix_from_json(c.at("Sigma_P"), ensemble.dim(), "Sigma_P")
                             : Matrix::Identity(ensemble.dim(), ensemble.dim());
  const Estimate e = mourtada_limit(ensemble, sigma_p);
  Json out = estimate_json(e);
  out["risk"] = sigma * sigma / ensemble.meta().n * e.value;
  return dump(out);
}

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table{
      {"phi", run_phi},           {"bracket", run_bracket},   {"figure1", run_figure1},
      {"figure2", run_figure2},   {"sequence", run_sequence}, {"kernel", run_kernel},
      {"covshift", run_covshift}, {"markov", run_markov},     {"estimate", run_estimate},
      {"dicker", run_dicker},     {"mourtada", run_mourtada},
  };
  return table;
}

int fail(std::ostream& err, int code, const char* kind, const std::string& message,
         const std::string& key = {}) {
  Json j{{"error", kind}, {"message", message}, {"exit_code", code}};
  if (!key.empty()) j["key"] = key;
  err << j.dump() << "\n";
  return code;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"phi",      "bracket", "figure1",  "figure2",
                                              "sequence", "kernel",  "covshift", "markov",
                                              "estimate", "dicker",  "mourtada"};
  return names;
}

int run(const std::string& subcommand, const std::string& config_path,
        const std::string& out_path, std::optional<std::uint64_t> seed, std::ostream& err) {
  try {
    auto it = handlers().find(subcommand);
    if (it == handlers().end()) {
      throw ConfigError(fmt::format("unknown subcommand '{}'", subcommand), "subcommand");
    }
    std::ifstream in(config_path);
    if (!in) throw IoError(fmt::format("cannot open config '{}'", config_path));
    Context ctx;
    try {
      ctx.config = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(fmt::format("config '{}' is not valid JSON: {}", config_path, e.what()));
    }
    if (!ctx.config.is_object()) throw ConfigError("config must be a JSON object");
    ctx.base_dir = fs::path(config_path).parent_path();
    ctx.seed = seed.value_or(optional_value<std::uint64_t>(ctx.config, "seed", "", 0));

    const std::string text = it->second(ctx);

    const fs::path out_file(out_path);
    std::ofstream out(out_file, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot open output '{}'", out_path));
    out << text;
    out.close();
    if (!out) throw IoError(fmt::format("failed writing output '{}'", out_path));
    return kExitOk;
  } catch (const IoError& e) {
    return fail(err, kExitIo, "io", e.what());
  } catch (const ConfigError& e) {
    return fail(err, kExitConfig, "config", e.what(), e.key());
  } catch (const ValidationError& e) {
    return fail(err, kExitConfig, "validation", e.what());
  } catch (const NumericalError& e) {
    return fail(err, kExitNumerical, "numerical", e.what());
  } catch (const std::exception& e) {
    return fail(err, kExitUnexpected, "unexpected", e.what());
  }
}

}  // namespace minimax
