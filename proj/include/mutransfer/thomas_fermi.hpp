#pragma once

#include <vector>

namespace mutransfer {

/// Universal Thomas-Fermi screening function chi(x):
///   chi'' = chi^{3/2} / sqrt(x),  chi(0) = 1,  chi(inf) = 0.
///
/// Solved once by shooting in t = sqrt(x), where the equation is smooth, and
/// tabulated on [0, x_table] for cubic Hermite interpolation. Beyond the table
/// the Sommerfeld asymptotic form is used, rescaled to be continuous.
class ThomasFermiFunction {
 public:
  /// Process-wide table, built on first use (thread-safe).
  static const ThomasFermiFunction& instance();

  double chi(double x) const;
  double chi_prime(double x) const;

  /// chi'(0), about -1.588.
  double initial_slope() const { return slope_; }
  double table_end() const { return x_table_; }

 private:
  ThomasFermiFunction();

  double sommerfeld(double x) const;
  double sommerfeld_prime(double x) const;

  double slope_ = 0.0;
  double x_table_ = 50.0;
  double dt_ = 0.0;
  double tail_scale_ = 1.0;
  std::vector<double> chi_;     // chi at t_k = k dt
  std::vector<double> dchi_dx_;  // chi'(x) at t_k
};

}  // namespace mutransfer
