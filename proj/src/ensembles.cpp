#include "minimax/ensembles.hpp"

#include <fmt/core.h>

#include <cmath>
#include <numbers>

#include "minimax/errors.hpp"
#include "minimax/json_io.hpp"
#include "minimax/random.hpp"

namespace minimax {

namespace {

void require_positive(int value, const char* name) {
  if (value < 1) throw ValidationError(fmt::format("{} must be >= 1, got {}", name, value));
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

GramEnsemble::GramEnsemble(std::vector<Matrix> grams, std::uint64_t seed, EnsembleMeta meta)
    : grams_(std::move(grams)), seed_(seed), meta_(std::move(meta)) {
  if (grams_.empty()) throw ValidationError("a Gram ensemble needs at least one member");
  const Eigen::Index d = grams_.front().rows();
  for (std::size_t i = 0; i < grams_.size(); ++i) {
    Matrix& g = grams_[i];
    if (g.rows() != d || g.cols() != d) {
      throw ValidationError(fmt::format("Gram matrix {} is {}x{}, expected {}x{}", i, g.rows(),
                                        g.cols(), d, d));
    }
    if (!is_symmetric(g, 1e-8)) {
      throw ValidationError(fmt::format("Gram matrix {} is not symmetric", i));
    }
    g = symmetrize(g);
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    const double lo = min_eigenvalue(g);
    if (lo < -1e-8 * scale) {
      throw ValidationError(
          fmt::format("Gram matrix {} is not PSD: min eigenvalue {:.6g}", i, lo));
    }
  }
  if (meta_.d == 0) meta_.d = static_cast<int>(d);
}

GramEnsemble GramEnsemble::deterministic(const Matrix& gram, EnsembleMeta meta) {
  if (meta.sampler.empty()) meta.sampler = "fixed";
  return GramEnsemble({gram}, 0, std::move(meta));
}

Matrix GramEnsemble::mean() const {
  Matrix sum = Matrix::Zero(dim(), dim());
  for (const Matrix& g : grams_) sum += g;
  return sum / static_cast<double>(grams_.size());
}

Vector ScalingFunction::ratios(int length) const {
  require_positive(length, "chain length");
  Vector r = Vector::Zero(length);
  if (iid) return r;
  if (std::abs(log_psi(0)) > 1e-12) {
    throw ValidationError(fmt::format("scaling '{}' must satisfy psi(0) = 1", name));
  }
  double previous = log_psi(0);
  for (int t = 1; t <= length; ++t) {
    const double current = log_psi(t);
    if (current < previous) {
      throw ValidationError(
          fmt::format("scaling '{}' decreases between t = {} and t = {}", name, t - 1, t));
    }
    r(t - 1) = std::exp(previous - current);
    previous = current;
  }
  return r;
}

ScalingFunction scaling_by_name(const std::string& name) {
  if (name == "iid") return {name, [](int) { return 0.0; }, true};
  if (name == "5^t") return {name, [](int t) { return t * std::log(5.0); }, false};
  if (name == "t+1") return {name, [](int t) { return std::log1p(static_cast<double>(t)); }, false};
  if (name == "1+log(t+1)") {
    return {name, [](int t) { return std::log1p(std::log1p(static_cast<double>(t))); }, false};
  }
  if (name == "1+loglog") {
    return {name,
            [](int t) { return std::log1p(std::log1p(std::log1p(static_cast<double>(t)))); },
            false};
  }
  throw ValidationError(fmt::format("unknown scaling function '{}'", name));
}

KernelSpec KernelSpec::sobolev(double beta, int k) {
  require_positive(k, "truncation level k");
  if (!(beta > 0.0)) throw ValidationError("Sobolev order beta must be positive");
  KernelSpec spec;
  spec.mu.resize(k);
  for (int j = 1; j <= k; ++j) spec.mu(j - 1) = std::pow(std::ceil(j / 2.0), -2.0 * beta);
  return spec;
}

void KernelSpec::validate() const {
  if (mu.size() == 0) throw ValidationError("kernel eigenvalue sequence is empty");
  if (basis != "fourier") throw ValidationError(fmt::format("unsupported basis '{}'", basis));
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    if (!(mu(j) > 0.0)) {
      throw ValidationError(fmt::format("kernel eigenvalue mu_{} = {} is not positive", j + 1, mu(j)));
    }
    if (j > 0 && mu(j) > mu(j - 1)) {
      throw ValidationError(fmt::format("kernel eigenvalues increase at index {}", j + 1));
    }
  }
}

DesignMatrix sample_gaussian_design(int n, int d, std::uint64_t seed) {
  require_positive(n, "n");
  require_positive(d, "d");
  RandomStream rng(seed);
  Matrix x(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = rng.normal();
  }
  return {std::move(x)};
}

DesignMatrix sample_mixture_design(int n, int d, double lambda, std::uint64_t seed) {
  require_positive(n, "n");
  require_positive(d, "d");
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    throw ValidationError(fmt::format("mixture weight lambda must lie in [0, 1), got {}", lambda));
  }
  RandomStream rng(seed);
  const double scale = 1.0 / std::sqrt(1.0 - lambda);
  Matrix x = Matrix::Zero(n, d);
  for (int i = 0; i < n; ++i) {
    // One uniform for the atom (skipped when λ = 0), then d normals.
    if (lambda > 0.0 && rng.uniform() < lambda) continue;
    for (int j = 0; j < d; ++j) x(i, j) = scale * rng.normal();
  }
  return {std::move(x)};
}

MarkovChainPath markov_chain(const ScalingFunction& psi, int length, std::uint64_t seed) {
  MarkovChainPath path;
  path.length = length;
  path.r = psi.ratios(length);
  path.z.resize(length);
  path.x.resize(length);
  RandomStream rng(seed);
  double previous = 0.0;
  for (int t = 0; t < length; ++t) {
    path.z(t) = rng.normal();
    const double r = path.r(t);
    previous = std::sqrt(r) * previous + std::sqrt(1.0 - r) * path.z(t);
    path.x(t) = previous;
  }
  return path;
}

Matrix markov_m_matrix(const Vector& r) {
  const Eigen::Index length = r.size();
  for (Eigen::Index t = 0; t < length; ++t) {
    if (!(r(t) >= 0.0 && r(t) <= 1.0)) {
      throw ValidationError(fmt::format("r_{} = {} lies outside [0, 1]", t + 1, r(t)));
    }
  }
  // With P(s, s') = Π_{τ=s+1}^{s'} √r_τ and Q(s) = Σ_{t≥s} P(s, t)², every entry
  // with s ≤ s' factors as √(1−r_s) √(1−r_{s'}) P(s, s') Q(s'), and
  // Q(s) = 1 + r_{s+1} Q(s+1).
  Vector suffix(length);
  if (length > 0) suffix(length - 1) = 1.0;
  for (Eigen::Index s = length - 2; s >= 0; --s) suffix(s) = 1.0 + r(s + 1) * suffix(s + 1);

  Vector root_complement = (1.0 - r.array()).cwiseMax(0.0).sqrt().matrix();
  Vector root_r = r.array().sqrt().matrix();
  Matrix m = Matrix::Zero(length, length);
  for (Eigen::Index s = 0; s < length; ++s) {
    double chain = 1.0;
    for (Eigen::Index sp = s; sp < length; ++sp) {
      if (sp > s) chain *= root_r(sp);
      if (chain == 0.0) break;
      const double value = root_complement(s) * root_complement(sp) * chain * suffix(sp);
      m(s, sp) = value;
      m(sp, s) = value;
    }
  }
  return m;
}

Vector rkhs_features(const KernelSpec& spec, double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw ValidationError(fmt::format("RKHS feature point x = {} lies outside [0, 1]", x));
  }
  const int k = spec.k();
  Vector features(k);
  for (int j = 1; j <= k; ++j) {
    double basis_value = 1.0;
    if (j > 1) {
      const double freq = 2.0 * std::numbers::pi * static_cast<double>(j / 2) * x;
      basis_value = std::numbers::sqrt2 * ((j % 2 == 0) ? std::cos(freq) : std::sin(freq));
    }
    features(j - 1) = std::sqrt(spec.mu(j - 1)) * basis_value;
  }
  return features;
}

DesignMatrix sample_shift_design(double shift_bound, const KernelSpec& spec, int n,
                                 std::uint64_t seed) {
  if (!(shift_bound >= 1.0)) {
    throw ValidationError(fmt::format("likelihood-ratio bound B must be >= 1, got {}", shift_bound));
  }
  require_positive(n, "n");
  spec.validate();
  RandomStream rng(seed);
  const double keep = 1.0 / shift_bound;
  Matrix x(n, spec.k());
  for (int i = 0; i < n; ++i) {
    // Uniform draw with probability 1/B, otherwise the atom x0 = 0.
    double point = 0.0;
    if (rng.uniform() < keep) point = rng.uniform();
    x.row(i) = rkhs_features(spec, point).transpose();
  }
  return {std::move(x)};
}

DesignMatrix sample_design(const SamplerSpec& spec, std::uint64_t seed) {
  return std::visit(
      Overloaded{
          [&](const GaussianSampler& s) { return sample_gaussian_design(s.n, s.d, seed); },
          [&](const MixtureSampler& s) { return sample_mixture_design(s.n, s.d, s.lambda, seed); },
          [&](const MarkovSampler& s) {
            MarkovChainPath path = markov_chain(s.psi, s.length, seed);
            return DesignMatrix{Matrix(path.x)};
          },
          [&](const RkhsSampler& s) {
            s.kernel.validate();
            require_positive(s.n, "n");
            RandomStream rng(seed);
            Matrix x(s.n, s.kernel.k());
            for (int i = 0; i < s.n; ++i) x.row(i) = rkhs_features(s.kernel, rng.uniform()).transpose();
            return DesignMatrix{std::move(x)};
          },
          [&](const ShiftSampler& s) {
            return sample_shift_design(s.shift_bound, s.kernel, s.n, seed);
          },
          [&](const FixedSampler& s) {
            if (s.x.size() == 0) throw ValidationError("fixed design is empty");
            return DesignMatrix{s.x};
          },
      },
      spec);
}

std::string sampler_name(const SamplerSpec& spec) {
  return std::visit(Overloaded{
                        [](const GaussianSampler&) { return std::string("gaussian"); },
                        [](const MixtureSampler&) { return std::string("mixture"); },
                        [](const MarkovSampler&) { return std::string("markov"); },
                        [](const RkhsSampler&) { return std::string("rkhs"); },
                        [](const ShiftSampler&) { return std::string("shift"); },
                        [](const FixedSampler&) { return std::string("fixed"); },
                    },
                    spec);
}

int sampler_rows(const SamplerSpec& spec) {
  return std::visit(Overloaded{
                        [](const GaussianSampler& s) { return s.n; },
                        [](const MixtureSampler& s) { return s.n; },
                        [](const MarkovSampler& s) { return s.length; },
                        [](const RkhsSampler& s) { return s.n; },
                        [](const ShiftSampler& s) { return s.n; },
                        [](const FixedSampler& s) { return static_cast<int>(s.x.rows()); },
                    },
                    spec);
}

int sampler_cols(const SamplerSpec& spec) {
  return std::visit(Overloaded{
                        [](const GaussianSampler& s) { return s.d; },
                        [](const MixtureSampler& s) { return s.d; },
                        [](const MarkovSampler&) { return 1; },
                        [](const RkhsSampler& s) { return s.kernel.k(); },
                        [](const ShiftSampler& s) { return s.kernel.k(); },
                        [](const FixedSampler& s) { return static_cast<int>(s.x.cols()); },
                    },
                    spec);
}

GramEnsemble gram_ensemble(const SamplerSpec& sampler, int count, double sigma,
                           std::uint64_t seed) {
  require_positive(count, "ensemble size N");
  if (!(sigma > 0.0)) throw ValidationError(fmt::format("sigma must be positive, got {}", sigma));
  const double inv_var = 1.0 / (sigma * sigma);
  std::vector<Matrix> grams;
  grams.reserve(count);
  const bool fixed = std::holds_alternative<FixedSampler>(sampler);
  for (int i = 0; i < count; ++i) {
    DesignMatrix design = sample_design(sampler, fixed ? seed : derive_seed(seed, i));
    Matrix g = Matrix::Zero(design.cols(), design.cols());
    g.selfadjointView<Eigen::Lower>().rankUpdate(design.x.transpose(), inv_var);
    grams.push_back(g.selfadjointView<Eigen::Lower>());
  }
  EnsembleMeta meta{sampler_name(sampler), sampler_to_json(sampler).dump(), sampler_rows(sampler),
                    sampler_cols(sampler), sigma};
  return GramEnsemble(std::move(grams), seed, std::move(meta));
}

}  // namespace minimax
