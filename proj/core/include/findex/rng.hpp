#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace findex {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic, platform-independent generator. std::random distributions
/// are implementation-defined, so all sampling is spelled out here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Derive an order-independent per-task stream from a base seed.
  static Rng split(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s = a ^ (stream * 0x9e3779b97f4a7c15ULL + 0x7f4a7c15ULL);
    return Rng(splitmix64(s));
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  double uniform() {  // in [0,1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  double gauss() {
    double u1 = 0.0;
    while (u1 <= 1e-300) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  std::complex<double> cgauss() {
    double re = gauss();
    double im = gauss();
    return {re, im};
  }

  Eigen::VectorXcd gauss_vector(int n) {
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v(i) = cgauss();
    return v;
  }

  Eigen::VectorXcd unit_vector(int n) {
    Eigen::VectorXcd v = gauss_vector(n);
    double nv = v.norm();
    while (nv < 1e-12) {
      v = gauss_vector(n);
      nv = v.norm();
    }
    return v / nv;
  }

  Eigen::MatrixXcd gauss_matrix(int rows, int cols) {
    Eigen::MatrixXcd m(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) m(i, j) = cgauss();
    return m;
  }

  /// Haar unitary via QR of a Gaussian matrix with phase fixing.
  Eigen::MatrixXcd haar_unitary(int n) {
    Eigen::MatrixXcd g = gauss_matrix(n, n);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i) {
      std::complex<double> d = r(i, i);
      double a = std::abs(d);
      q.col(i) *= (a > 1e-300) ? d / a : 1.0;
    }
    return q;
  }

  Eigen::MatrixXcd hermitian(int n) {
    Eigen::MatrixXcd g = gauss_matrix(n, n);
    return 0.5 * (g + g.adjoint());
  }

 private:
  std::uint64_t state_;
};

}  // namespace findex
