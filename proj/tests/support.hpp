#pragma once

// Test-only reference computations. Nothing here calls into the library's
// eigendecomposition or circuit code.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace eet::testing {

inline constexpr double kTwoPiC = 2.0 * 3.14159265358979323846 * 2.99792458e-5;

/// Site populations of exp(-i k H t)|site> by dense matrix exponential.
inline std::vector<double> dense_populations(const Eigen::MatrixXd& h, double t_fs, int site = 0) {
  using namespace std::complex_literals;
  Eigen::MatrixXd shifted = h;
  shifted.diagonal().array() -= shifted.diagonal().mean();
  const Eigen::MatrixXcd u = ((-1i * kTwoPiC * t_fs) * shifted.cast<std::complex<double>>()).exp();
  std::vector<double> p(static_cast<std::size_t>(h.rows()));
  for (Eigen::Index m = 0; m < h.rows(); ++m) p[static_cast<std::size_t>(m)] = std::norm(u(m, site));
  return p;
}

inline Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int n, double scale = 500.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m(i, j) = m(j, i) = u(rng);
  return m;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace eet::testing
