#include "minimax/json_io.hpp"

#include <fmt/core.h>

#include <cstdint>

#include "minimax/errors.hpp"

namespace minimax {

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

template <class T>
T convert(const Json& value, const std::string& name) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("config entry '{}' has the wrong type: {}", name, e.what()), name);
  }
}

std::string sequence_kind(const Json& j) { return j.is_array() ? "array" : "object"; }

}  // namespace

const Json& require_key(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) {
    throw ConfigError(fmt::format("config entry '{}' must be an object", path.empty() ? "<root>" : path),
                      path);
  }
  auto it = j.find(key);
  if (it == j.end()) {
    const std::string name = join(path, key);
    throw ConfigError(fmt::format("missing config key '{}'", name), name);
  }
  return *it;
}

template <class T>
T require_value(const Json& j, const std::string& key, const std::string& path) {
  return convert<T>(require_key(j, key, path), join(path, key));
}

template <class T>
T optional_value(const Json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return convert<T>(j.at(key), join(path, key));
}

template int require_value<int>(const Json&, const std::string&, const std::string&);
template double require_value<double>(const Json&, const std::string&, const std::string&);
template std::string require_value<std::string>(const Json&, const std::string&,
                                                const std::string&);
template std::uint64_t require_value<std::uint64_t>(const Json&, const std::string&,
                                                    const std::string&);
template int optional_value<int>(const Json&, const std::string&, const std::string&, int);
template double optional_value<double>(const Json&, const std::string&, const std::string&,
                                       double);
template bool optional_value<bool>(const Json&, const std::string&, const std::string&, bool);
template std::string optional_value<std::string>(const Json&, const std::string&,
                                                 const std::string&, std::string);
template std::uint64_t optional_value<std::uint64_t>(const Json&, const std::string&,
                                                     const std::string&, std::uint64_t);

Vector vector_from_json(const Json& j, const std::string& path) {
  const auto values = convert<std::vector<double>>(j, path);
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
  return v;
}

Matrix matrix_from_json(const Json& j, int dim, const std::string& path) {
  if (j.is_string()) {
    if (j.get<std::string>() != "identity") {
      throw ConfigError(fmt::format("'{}' must be \"identity\", an array or {{\"diag\": ...}}", path),
                        path);
    }
    if (dim < 1) throw ConfigError(fmt::format("'{}' = identity needs a dimension", path), path);
    return Matrix::Identity(dim, dim);
  }
  if (j.is_object()) {
    const Vector diag = vector_from_json(require_key(j, "diag", path), join(path, "diag"));
    if (dim > 0 && diag.size() != dim) {
      throw ConfigError(fmt::format("'{}' has {} entries, expected {}", join(path, "diag"),
                                    diag.size(), dim),
                        join(path, "diag"));
    }
    return diag.asDiagonal();
  }
  const auto rows = convert<std::vector<std::vector<double>>>(j, path);
  if (rows.empty()) throw ConfigError(fmt::format("'{}' is an empty matrix", path), path);
  const std::size_t cols = rows.front().size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw ConfigError(fmt::format("'{}' row {} has {} entries, expected {}", path, r,
                                    rows[r].size(), cols),
                        path);
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

EllipticalProblem problem_from_json(const Json& j, const std::string& path) {
  const int dim = require_value<int>(j, "dim", path);
  const Matrix ke = matrix_from_json(require_key(j, "Ke", path), dim, join(path, "Ke"));
  const Matrix kc = matrix_from_json(require_key(j, "Kc", path), dim, join(path, "Kc"));
  if (ke.rows() != dim || kc.rows() != dim) {
    throw ConfigError(fmt::format("'{}' declares dim = {} but the metrics are {}x{} and {}x{}",
                                  path, dim, ke.rows(), ke.cols(), kc.rows(), kc.cols()),
                      join(path, "dim"));
  }
  return EllipticalProblem::create(ke, kc, require_value<double>(j, "rho", path),
                                   require_value<double>(j, "sigma", path));
}

KernelSpec kernel_from_json(const Json& j, const std::string& path) {
  KernelSpec spec;
  if (j.is_object() && j.contains("mu")) {
    spec.mu = vector_from_json(j.at("mu"), join(path, "mu"));
  } else {
    spec = KernelSpec::sobolev(require_value<double>(j, "beta", path),
                               require_value<int>(j, "k", path));
  }
  spec.basis = optional_value<std::string>(j, "basis", path, "fourier");
  spec.validate();
  return spec;
}

EigenSequence sequence_from_json(const Json& j, const std::string& path) {
  if (j.is_array()) return EigenSequence::explicit_values(vector_from_json(j, path));
  if (!j.is_object()) {
    throw ConfigError(fmt::format("'{}' must be an array or {{\"power\": ...}}, got {}", path,
                                  sequence_kind(j)),
                      path);
  }
  const double power = require_value<double>(j, "power", path);
  const std::string convention = optional_value<std::string>(j, "convention", path, "paired");
  if (convention != "paired" && convention != "plain") {
    throw ConfigError(fmt::format("'{}' must be \"paired\" or \"plain\"", join(path, "convention")),
                      join(path, "convention"));
  }
  return EigenSequence::power_law(power, convention == "paired"
                                             ? EigenSequence::Convention::kPaired
                                             : EigenSequence::Convention::kPlain);
}

SamplerSpec sampler_from_json(const Json& j, const std::string& path) {
  const std::string kind = require_value<std::string>(j, "kind", path);
  if (kind == "gaussian") {
    return GaussianSampler{require_value<int>(j, "n", path), require_value<int>(j, "d", path)};
  }
  if (kind == "mixture") {
    return MixtureSampler{require_value<int>(j, "n", path), require_value<int>(j, "d", path),
                          require_value<double>(j, "lambda", path)};
  }
  if (kind == "markov") {
    return MarkovSampler{scaling_by_name(require_value<std::string>(j, "psi", path)),
                         require_value<int>(j, "T", path)};
  }
  if (kind == "rkhs") {
    return RkhsSampler{kernel_from_json(require_key(j, "kernel", path), join(path, "kernel")),
                       require_value<int>(j, "n", path)};
  }
  if (kind == "shift") {
    return ShiftSampler{kernel_from_json(require_key(j, "kernel", path), join(path, "kernel")),
                        require_value<double>(j, "B", path), require_value<int>(j, "n", path)};
  }
  if (kind == "fixed") {
    return FixedSampler{matrix_from_json(require_key(j, "x", path), 0, join(path, "x"))};
  }
  throw ConfigError(fmt::format("unknown sampler kind '{}'", kind), join(path, "kind"));
}

Json sampler_to_json(const SamplerSpec& spec) {
  auto kernel_json = [](const KernelSpec& k) {
    return Json{{"mu", std::vector<double>(k.mu.data(), k.mu.data() + k.mu.size())},
                {"basis", k.basis}};
  };
  return std::visit(
      Overloaded{
          [](const GaussianSampler& s) { return Json{{"kind", "gaussian"}, {"n", s.n}, {"d", s.d}}; },
          [](const MixtureSampler& s) {
            return Json{{"kind", "mixture"}, {"n", s.n}, {"d", s.d}, {"lambda", s.lambda}};
          },
          [](const MarkovSampler& s) {
            return Json{{"kind", "markov"}, {"psi", s.psi.name}, {"T", s.length}};
          },
          [&](const RkhsSampler& s) {
            return Json{{"kind", "rkhs"}, {"kernel", kernel_json(s.kernel)}, {"n", s.n}};
          },
          [&](const ShiftSampler& s) {
            return Json{{"kind", "shift"}, {"kernel", kernel_json(s.kernel)}, {"B", s.shift_bound},
                        {"n", s.n}};
          },
          [](const FixedSampler& s) { return Json{{"kind", "fixed"}, {"x", matrix_to_json(s.x)}}; },
      },
      spec);
}

OptimizerOptions optimizer_from_json(const Json& j, const std::string& path) {
  OptimizerOptions o;
  if (j.is_null()) return o;
  o.max_iter = optional_value<int>(j, "max_iter", path, o.max_iter);
  o.tol = optional_value<double>(j, "tol", path, o.tol);
  o.n_replicates = optional_value<int>(j, "n_replicates", path, o.n_replicates);
  o.seed = optional_value<std::uint64_t>(j, "seed", path, o.seed);
  return o;
}

Figure1Config figure1_config_from_json(const Json& j) {
  Figure1Config cfg;
  if (j.contains("n_list")) cfg.n_list = convert<std::vector<int>>(j.at("n_list"), "n_list");
  if (j.contains("tau_list")) cfg.tau_list = convert<std::vector<double>>(j.at("tau_list"), "tau_list");
  if (j.contains("lambda_list")) {
    cfg.lambda_list = convert<std::vector<double>>(j.at("lambda_list"), "lambda_list");
  }
  if (j.contains("gamma_grid")) {
    cfg.gamma_grid = convert<std::vector<double>>(j.at("gamma_grid"), "gamma_grid");
  }
  cfg.replicates = optional_value<int>(j, "replicates", "", cfg.replicates);
  cfg.seed = optional_value<std::uint64_t>(j, "seed", "", cfg.seed);
  return cfg;
}

Figure2Config figure2_config_from_json(const Json& j) {
  Figure2Config cfg;
  if (j.contains("psi_names")) {
    cfg.psi_names = convert<std::vector<std::string>>(j.at("psi_names"), "psi_names");
  }
  if (j.contains("T_grid")) cfg.t_grid = convert<std::vector<int>>(j.at("T_grid"), "T_grid");
  if (j.contains("tau_list")) cfg.tau_list = convert<std::vector<double>>(j.at("tau_list"), "tau_list");
  cfg.mc_trials = optional_value<int>(j, "mc_trials", "", cfg.mc_trials);
  cfg.seed = optional_value<std::uint64_t>(j, "seed", "", cfg.seed);
  return cfg;
}

Json to_json(const FunctionalResult& r) {
  return Json{{"value", r.value},
              {"maximizer", matrix_to_json(r.maximizer.matrix())},
              {"iterations", r.iterations},
              {"grad_norm", r.grad_norm},
              {"duality_gap", r.duality_gap},
              {"mc_stderr", r.mc_stderr},
              {"converged", r.converged}};
}

Json to_json(const SharpLowerBound& r) {
  return Json{{"value", r.value},          {"estimate", r.estimate},
              {"stderr", r.std_error},     {"c", r.c},
              {"c_stderr", r.c_std_error}, {"tail_probability", r.tail_probability},
              {"tau", r.tau}};
}

Json to_json(const RiskBracket& r) {
  Json out{{"lower", r.lower},
           {"upper", r.upper},
           {"weak_lower", r.weak_lower},
           {"sharp_lower", r.sharp ? Json(r.sharp->value) : Json(nullptr)},
           {"omega_star", matrix_to_json(r.omega_star)},
           {"methods",
            {{"lower", r.lower_method},
             {"upper", r.upper_method},
             {"weak_lower", r.weak_lower_method},
             {"sharp_lower", r.sharp_method}}}};
  if (r.sharp) out["sharp"] = to_json(*r.sharp);
  return out;
}

Json to_json(const WaterfillSolution& r) {
  return Json{{"value", r.value},
              {"level", r.level},
              {"active_set_size", r.active_set_size},
              {"allocation", std::vector<double>(r.allocation.data(),
                                                 r.allocation.data() + r.allocation.size())}};
}

Json to_json(const CovshiftBound& r) {
  return Json{{"simplex_bound", r.simplex_bound}, {"witness_bound", r.witness_bound},
              {"dstar_bound", r.dstar_bound},     {"inf_bound", r.inf_bound},
              {"d_star", r.d_star}};
}

Json to_json(const Estimate& r) { return Json{{"value", r.value}, {"stderr", r.std_error}}; }

Json to_json(const WorstCaseRisk& r) {
  return Json{{"value", r.value},
              {"bias", r.bias},
              {"variance", r.variance},
              {"worst_theta",
               std::vector<double>(r.worst_theta.data(), r.worst_theta.data() + r.worst_theta.size())}};
}

}  // namespace minimax
