#include "mutransfer/thomas_fermi.hpp"

#include <array>
#include <cmath>

#include "mutransfer/error.hpp"

namespace mutransfer {

namespace {

using State = std::array<long double, 2>;  // {chi, dchi/dx} as functions of t

State rhs(long double t, const State& y) {
  const long double c = y[0] > 0.0L ? y[0] : 0.0L;
  return {2.0L * t * y[1], 2.0L * c * std::sqrt(c)};
}

State rk4(long double t, const State& y, long double h) {
  auto axpy = [](const State& a, long double s, const State& b) {
    return State{a[0] + s * b[0], a[1] + s * b[1]};
  };
  const State k1 = rhs(t, y);
  const State k2 = rhs(t + h / 2, axpy(y, h / 2, k1));
  const State k3 = rhs(t + h / 2, axpy(y, h / 2, k2));
  const State k4 = rhs(t + h, axpy(y, h, k3));
  return {y[0] + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
          y[1] + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
}

constexpr long double kStep = 5e-4L;

enum class Shot { TooSteep, TooShallow, Undecided };

Shot shoot(long double slope, long double t_stop) {
  State y{1.0L, -slope};
  long double t = 0.0L;
  while (t < t_stop) {
    y = rk4(t, y, kStep);
    t += kStep;
    if (y[0] < 0.0L) return Shot::TooSteep;
    if (y[1] > 0.0L) return Shot::TooShallow;
  }
  return Shot::Undecided;
}

constexpr double kLambda = 0.7720018726587655;  // (sqrt(73) - 7) / 2

}  // namespace

const ThomasFermiFunction& ThomasFermiFunction::instance() {
  static const ThomasFermiFunction table;
  return table;
}

ThomasFermiFunction::ThomasFermiFunction() {
  long double lo = 1.5L;
  long double hi = 1.7L;
  const long double t_stop = std::sqrt(4000.0L);
  for (int it = 0; it < 80 && hi - lo > 1e-19L; ++it) {
    const long double mid = 0.5L * (lo + hi);
    const Shot s = shoot(mid, t_stop);
    if (s == Shot::TooSteep) {
      hi = mid;
    } else if (s == Shot::TooShallow) {
      lo = mid;
    } else {
      lo = hi = mid;
    }
  }
  const long double slope = 0.5L * (lo + hi);
  slope_ = -static_cast<double>(slope);

  const long double t_end = std::sqrt(static_cast<long double>(x_table_));
  const auto n = static_cast<std::size_t>(std::ceil(t_end / kStep));
  dt_ = static_cast<double>(t_end / static_cast<long double>(n));
  const long double h = t_end / static_cast<long double>(n);
  chi_.resize(n + 1);
  dchi_dx_.resize(n + 1);
  State y{1.0L, -slope};
  chi_[0] = 1.0;
  dchi_dx_[0] = static_cast<double>(-slope);
  for (std::size_t k = 1; k <= n; ++k) {
    y = rk4(static_cast<long double>(k - 1) * h, y, h);
    chi_[k] = static_cast<double>(y[0]);
    dchi_dx_[k] = static_cast<double>(y[1]);
  }
  if (!(chi_.back() > 0.0)) {
    throw Error(ErrorKind::Assembly, "Thomas-Fermi table did not stay positive");
  }
  tail_scale_ = chi_.back() / sommerfeld(x_table_);
}

double ThomasFermiFunction::sommerfeld(double x) const {
  const double s = std::pow(x * x * x / 144.0, kLambda / 3.0);
  return std::pow(1.0 + s, -3.0 / kLambda);
}

double ThomasFermiFunction::sommerfeld_prime(double x) const {
  const double s = std::pow(x * x * x / 144.0, kLambda / 3.0);
  // d/dx (1+s)^{-3/l} with ds/dx = l s / x
  return -3.0 * std::pow(1.0 + s, -3.0 / kLambda - 1.0) * s / x;
}

double ThomasFermiFunction::chi(double x) const {
  if (!(x >= 0.0)) throw Error(ErrorKind::Domain, "chi(x) needs x >= 0");
  if (x >= x_table_) return tail_scale_ * sommerfeld(x);
  // Cubic Hermite in t with dchi/dt = 2 t chi'(x).
  const double t = std::sqrt(x);
  auto k = static_cast<std::size_t>(t / dt_);
  if (k + 1 >= chi_.size()) k = chi_.size() - 2;
  const double t0 = static_cast<double>(k) * dt_;
  const double s = (t - t0) / dt_;
  const double m0 = 2.0 * t0 * dchi_dx_[k] * dt_;
  const double m1 = 2.0 * (t0 + dt_) * dchi_dx_[k + 1] * dt_;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * chi_[k] + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * chi_[k + 1] +
         (s3 - s2) * m1;
}

double ThomasFermiFunction::chi_prime(double x) const {
  if (!(x >= 0.0)) throw Error(ErrorKind::Domain, "chi'(x) needs x >= 0");
  if (x >= x_table_) return tail_scale_ * sommerfeld_prime(x);
  const double t = std::sqrt(x);
  auto k = static_cast<std::size_t>(t / dt_);
  if (k + 1 >= chi_.size()) k = chi_.size() - 2;
  const double s = (t - static_cast<double>(k) * dt_) / dt_;
  return (1.0 - s) * dchi_dx_[k] + s * dchi_dx_[k + 1];
}

}  // namespace mutransfer
