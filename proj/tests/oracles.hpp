#pragma once

// Independent reference computations used only by the tests.

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class Rng {
 public:
  explicit Rng(unsigned long long seed) : engine_(seed) {}
  double normal() { return normal_(engine_); }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  Matrix gaussian(int rows, int cols) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }
  Matrix symmetric(int d) {
    Matrix a = gaussian(d, d);
    return (a + a.transpose()) / 2.0;
  }
  // Q diag(exp(U[log lo, log hi])) Qᵀ.
  Matrix spd(int d, double lo = 0.2, double hi = 5.0) {
    Eigen::HouseholderQR<Matrix> qr(gaussian(d, d));
    Matrix q = qr.householderQ();
    Vector ev(d);
    for (int i = 0; i < d; ++i) ev(i) = std::exp(uniform(std::log(lo), std::log(hi)));
    Matrix out = q * ev.asDiagonal() * q.transpose();
    return (out + out.transpose()) / 2.0;
  }
  Matrix psd(int d, int rank) {
    Matrix x = gaussian(d, rank);
    return x * x.transpose();
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline Matrix sqrt_spd(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

// (1/N) Σ tr(K_e^{1/2} (Ω⁻¹ + G_i)⁻¹ K_e^{1/2}) with explicit LU inverses.
inline double dense_objective(const Matrix& ke, const std::vector<Matrix>& grams,
                              const Matrix& omega) {
  const Matrix root = sqrt_spd(ke);
  const Matrix omega_inv = omega.fullPivLu().inverse();
  double total = 0.0;
  for (const Matrix& g : grams) {
    const Matrix inner = (omega_inv + g).fullPivLu().inverse();
    total += (root * inner * root).trace();
  }
  return total / grams.size();
}

// Projection onto {X ⪰ floor·I, tr X ≤ cap} by Dykstra's alternating
// projections between the eigenvalue-floor cone and the trace half-space.
inline Matrix dykstra_projection(const Matrix& a, double floor, double cap, int iters = 20000) {
  const int d = static_cast<int>(a.rows());
  Matrix x = a, p = Matrix::Zero(d, d), q = Matrix::Zero(d, d);
  for (int k = 0; k < iters; ++k) {
    Matrix y_in = x + p;
    Eigen::SelfAdjointEigenSolver<Matrix> es((y_in + y_in.transpose()) / 2.0);
    Matrix y = es.eigenvectors() * es.eigenvalues().cwiseMax(floor).asDiagonal() *
               es.eigenvectors().transpose();
    p = y_in - y;
    Matrix z_in = y + q;
    Matrix z = z_in;
    const double excess = z_in.trace() - cap;
    if (excess > 0.0) z -= (excess / d) * Matrix::Identity(d, d);
    q = z_in - z;
    if ((z - x).norm() < 1e-15 && k > 10) {
      x = z;
      break;
    }
    x = z;
  }
  return x;
}

// Standard normal upper tail P(Z > z).
inline double normal_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace oracle
