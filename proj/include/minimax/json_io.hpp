#pragma once

#include <json.hpp>

#include <string>

#include "minimax/closed_form.hpp"
#include "minimax/ensembles.hpp"
#include "minimax/estimator.hpp"
#include "minimax/experiments.hpp"
#include "minimax/functional.hpp"
#include "minimax/problem.hpp"

namespace minimax {

using Json = nlohmann::json;

/// Required / optional config entries. `path` is the dotted location of `j`
/// ("" at the root); a missing or mistyped entry throws ConfigError whose
/// key() is the full dotted name.
const Json& require_key(const Json& j, const std::string& key, const std::string& path);

template <class T>
T require_value(const Json& j, const std::string& key, const std::string& path);

template <class T>
T optional_value(const Json& j, const std::string& key, const std::string& path, T fallback);

/// "identity", a dense array of rows, or {"diag": [...]}.
Matrix matrix_from_json(const Json& j, int dim, const std::string& path);
Json matrix_to_json(const Matrix& m);
Vector vector_from_json(const Json& j, const std::string& path);

/// {dim, Ke, Kc, rho, sigma}.
EllipticalProblem problem_from_json(const Json& j, const std::string& path = "problem");

/// {"kind": "gaussian"|"mixture"|"markov"|"rkhs"|"shift"|"fixed", ...}.
SamplerSpec sampler_from_json(const Json& j, const std::string& path = "sampler");
Json sampler_to_json(const SamplerSpec& spec);

/// {"mu": [...]} or {"beta": β, "k": k}.
KernelSpec kernel_from_json(const Json& j, const std::string& path);

/// Explicit array, or {"power": p, "convention": "paired"|"plain"}.
EigenSequence sequence_from_json(const Json& j, const std::string& path);

/// {max_iter, tol, n_replicates, seed}; every key optional.
OptimizerOptions optimizer_from_json(const Json& j, const std::string& path = "optimizer");

Figure1Config figure1_config_from_json(const Json& j);
Figure2Config figure2_config_from_json(const Json& j);

Json to_json(const FunctionalResult& r);
Json to_json(const RiskBracket& r);
Json to_json(const SharpLowerBound& r);
Json to_json(const WaterfillSolution& r);
Json to_json(const CovshiftBound& r);
Json to_json(const Estimate& r);
Json to_json(const WorstCaseRisk& r);

}  // namespace minimax
