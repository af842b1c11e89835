#include "mutransfer/legendre.hpp"

#include <cmath>
#include <numbers>

#include "mutransfer/error.hpp"

namespace mutransfer {

GaussLegendreRule gauss_legendre(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidInput, "Gauss-Legendre rule needs n >= 1");
  GaussLegendreRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  rule.one_plus_x.resize(n);
  rule.one_minus_x.resize(n);
  const long double pi = std::numbers::pi_v<long double>;
  const auto N = static_cast<long double>(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    // Newton on the angle phi, x = cos(phi), keeps endpoint nodes accurate.
    long double phi = pi * (static_cast<long double>(i) + 0.75L) / (N + 0.5L);
    long double dp = 0.0L;
    for (int it = 0; it < 100; ++it) {
      const long double x = std::cos(phi);
      long double p0 = 1.0L;
      long double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const auto kk = static_cast<long double>(k);
        const long double p2 = ((2 * kk - 1) * x * p1 - (kk - 1) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0L;
      }
      // dP_n/dx = n (x P_n - P_{n-1}) / (x^2 - 1); dP/dphi = -sin(phi) dP/dx
      const long double s = std::sin(phi);
      dp = N * (p0 - x * p1) / (s * s);
      const long double dphi = p1 / (-s * dp);
      phi -= dphi;
      if (std::fabs(dphi) < 1e-19L) break;
    }
    const long double x = std::cos(phi);
    const long double s = std::sin(phi);
    const long double weight = 2.0L / (s * s * dp * dp);
    const long double half = phi / 2;
    const long double opx = 2.0L * std::cos(half) * std::cos(half);  // 1 + cos(phi)
    const long double omx = 2.0L * std::sin(half) * std::sin(half);  // 1 - cos(phi)
    const std::size_t hi = n - 1 - i;
    const std::size_t lo = i;
    rule.x[hi] = static_cast<double>(x);
    rule.w[hi] = static_cast<double>(weight);
    rule.one_plus_x[hi] = static_cast<double>(opx);
    rule.one_minus_x[hi] = static_cast<double>(omx);
    rule.x[lo] = static_cast<double>(-x);
    rule.w[lo] = static_cast<double>(weight);
    rule.one_plus_x[lo] = static_cast<double>(omx);
    rule.one_minus_x[lo] = static_cast<double>(opx);
  }
  if (n % 2 == 1) {
    const std::size_t m = n / 2;
    rule.x[m] = 0.0;
    rule.one_plus_x[m] = 1.0;
    rule.one_minus_x[m] = 1.0;
  }
  return rule;
}

namespace {

// Orthonormal recurrence for order m = 1, applied to q_n = Pbar^1_n / sqrt(1-x^2).
template <typename Out>
void fill_row(double x, int n_max, Out&& out) {
  double q_prev = 0.0;
  double q = std::sqrt(0.75);
  out(1, q);
  for (int n = 2; n <= n_max; ++n) {
    const double nn = n;
    const double a = std::sqrt((4.0 * nn * nn - 1.0) / (nn * nn - 1.0));
    const double b = std::sqrt((2.0 * nn + 1.0) * ((nn - 1.0) * (nn - 1.0) - 1.0) /
                               ((2.0 * nn - 3.0) * (nn * nn - 1.0)));
    const double q_next = a * x * q - b * q_prev;
    q_prev = q;
    q = q_next;
    out(n, q);
  }
}

}  // namespace

Eigen::MatrixXd associated_legendre_table(const std::vector<double>& x, int n_max) {
  if (n_max < 1) throw Error(ErrorKind::InvalidInput, "Legendre table needs n_max >= 1");
  Eigen::MatrixXd table(static_cast<Eigen::Index>(x.size()), n_max);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    fill_row(x[k], n_max, [&](int n, double v) { table(row, n - 1) = v; });
  }
  return table;
}

Eigen::VectorXd associated_legendre_row(double x, int n_max) {
  if (n_max < 1) throw Error(ErrorKind::InvalidInput, "Legendre row needs n_max >= 1");
  Eigen::VectorXd row(n_max);
  fill_row(x, n_max, [&](int n, double v) { row(n - 1) = v; });
  return row;
}

}  // namespace mutransfer
