#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "minimax/linalg.hpp"

namespace minimax {

/// n×d design; row i is the feature vector ψ(x_i)ᵀ.
struct DesignMatrix {
  Matrix x;

  Eigen::Index rows() const { return x.rows(); }
  Eigen::Index cols() const { return x.cols(); }
};

/// Sampler name, its parameters, and the (n, σ) needed to renormalize
/// G = (n/σ²) Σ̂_n.
struct EnsembleMeta {
  std::string sampler;
  std::string params;  // compact JSON of the sampler spec
  int n = 0;
  int d = 0;
  double sigma = 1.0;
};

/// Seeded finite sample {G_i} of whitened Gram matrices G = Xᵀ Σ_w⁻¹ X.
/// Immutable after construction.
class GramEnsemble {
 public:
  /// Throws ValidationError when empty, ragged, or any G_i fails to be
  /// symmetric PSD within 1e-8 (relative).
  GramEnsemble(std::vector<Matrix> grams, std::uint64_t seed, EnsembleMeta meta);

  /// Single deterministic Gram matrix (the "fixed design" ensemble).
  static GramEnsemble deterministic(const Matrix& gram, EnsembleMeta meta = {});

  const std::vector<Matrix>& grams() const { return grams_; }
  std::size_t size() const { return grams_.size(); }
  int dim() const { return static_cast<int>(grams_.front().rows()); }
  std::uint64_t seed() const { return seed_; }
  const EnsembleMeta& meta() const { return meta_; }

  Matrix mean() const;

 private:
  std::vector<Matrix> grams_;
  std::uint64_t seed_ = 0;
  EnsembleMeta meta_;
};

/// Time-varying AR(1) path x_t = √r_t x_{t−1} + √(1−r_t) z_t, x_0 = 0.
/// Vectors are 0-based: r(t−1) holds r_t.
struct MarkovChainPath {
  int length = 0;
  Vector r;
  Vector x;
  Vector z;
};

/// Scaling ψ: ℕ∪{0} → [1, ∞) with ψ(0) = 1, given through log ψ so that fast
/// growth (5ᵗ) does not overflow. `iid` marks the r_t ≡ 0 limit.
struct ScalingFunction {
  std::string name;
  std::function<double(int)> log_psi;
  bool iid = false;

  /// r_t = ψ(t−1)/ψ(t) for t = 1..T. Throws ValidationError if ψ decreases
  /// or ψ(0) ≠ 1.
  Vector ratios(int length) const;
};

/// "iid", "5^t", "t+1", "1+log(t+1)", "1+loglog". Throws ValidationError for
/// any other name.
ScalingFunction scaling_by_name(const std::string& name);

/// Eigenvalues μ_1 ≥ μ_2 ≥ ... > 0 of a kernel truncated at k terms, paired
/// with the periodic Fourier basis φ_1 ≡ 1, φ_{2j} = √2 cos(2πjx),
/// φ_{2j+1} = √2 sin(2πjx) on [0, 1].
struct KernelSpec {
  Vector mu;
  std::string basis = "fourier";

  int k() const { return static_cast<int>(mu.size()); }

  /// μ_j = ⌈j/2⌉^{−2β}, so each cos/sin pair shares one eigenvalue.
  static KernelSpec sobolev(double beta, int k);
  /// Throws ValidationError if μ is empty, non-positive or increasing.
  void validate() const;
};

DesignMatrix sample_gaussian_design(int n, int d, std::uint64_t seed);
DesignMatrix sample_mixture_design(int n, int d, double lambda, std::uint64_t seed);
MarkovChainPath markov_chain(const ScalingFunction& psi, int length, std::uint64_t seed);
Matrix markov_m_matrix(const Vector& r);
Vector rkhs_features(const KernelSpec& spec, double x);
DesignMatrix sample_shift_design(double shift_bound, const KernelSpec& spec, int n,
                                 std::uint64_t seed);

/// Sampler specifications. Each `sample(seed)` is a pure function of the
/// parameters and the seed.
struct GaussianSampler {
  int n = 1;
  int d = 1;
};
struct MixtureSampler {
  int n = 1;
  int d = 1;
  double lambda = 0.0;
};
struct MarkovSampler {
  ScalingFunction psi;
  int length = 1;
};
struct RkhsSampler {
  KernelSpec kernel;
  int n = 1;
};
struct ShiftSampler {
  KernelSpec kernel;
  double shift_bound = 1.0;
  int n = 1;
};
struct FixedSampler {
  Matrix x;
};

using SamplerSpec =
    std::variant<GaussianSampler, MixtureSampler, MarkovSampler, RkhsSampler, ShiftSampler,
                 FixedSampler>;

DesignMatrix sample_design(const SamplerSpec& spec, std::uint64_t seed);
std::string sampler_name(const SamplerSpec& spec);
int sampler_rows(const SamplerSpec& spec);
int sampler_cols(const SamplerSpec& spec);

/// N independent draws with sub-seeds derive_seed(seed, i);
/// G_i = X_iᵀ X_i / σ².
GramEnsemble gram_ensemble(const SamplerSpec& sampler, int count, double sigma,
                           std::uint64_t seed);

}  // namespace minimax
