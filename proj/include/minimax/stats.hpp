#pragma once

#include <cmath>
#include <cstddef>

namespace minimax {

/// Monte Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Welford running mean/variance.
class MeanAccumulator {
 public:
  void add(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }

  std::size_t count() const { return count_; }
  double mean() const { return mean_; }
  double variance() const { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }
  double std_error() const {
    return count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
  }
  Estimate estimate() const { return {mean(), std_error()}; }

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace minimax
