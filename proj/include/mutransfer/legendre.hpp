#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace mutransfer {

/// Gauss-Legendre rule on [-1, 1]. Nodes are ascending; 1+x and 1-x are
/// stored separately (computed in extended precision) so that quantities
/// close to either endpoint keep full relative accuracy.
struct GaussLegendreRule {
  std::vector<double> x;
  std::vector<double> w;
  std::vector<double> one_plus_x;
  std::vector<double> one_minus_x;

  std::size_t size() const { return x.size(); }
};

GaussLegendreRule gauss_legendre(std::size_t n);

/// Values of the orthonormal associated Legendre functions of order one,
/// divided by sqrt(1 - x^2):  q_n(x) = Pbar^1_n(x) / sqrt(1 - x^2), n = 1..n_max.
/// Row k holds the n_max values at x_k. The q_n are polynomials of degree n-1.
Eigen::MatrixXd associated_legendre_table(const std::vector<double>& x, int n_max);

/// Single-point version (n = 1..n_max) for plotting and projection.
Eigen::VectorXd associated_legendre_row(double x, int n_max);

}  // namespace mutransfer
