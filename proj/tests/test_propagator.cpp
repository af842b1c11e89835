#include <doctest.h>

#include <cmath>

#include "mutransfer/error.hpp"
#include "mutransfer/propagator.hpp"

using namespace mutransfer;

namespace {

// y'' = U y with constant U from y(0) = 0, y'(0) = 1 over [0, L] in n steps.
DeVogelaereState integrate(double U, double L, int n) {
  const ApplyFn apply = apply_from([U](double) { return Eigen::MatrixXd::Constant(1, 1, U); });
  DeVogelaereState s;
  s.rho = 0.0;
  s.y = Eigen::MatrixXd::Zero(1, 1);
  s.dy = Eigen::MatrixXd::Ones(1, 1);
  const double h = L / n;
  de_vogelaere_start(s, apply, h);
  for (int i = 0; i < n; ++i) de_vogelaere_step(s, apply, h);
  return s;
}

}  // namespace

TEST_CASE("free particle is integrated exactly") {
  const ApplyFn apply = apply_from([](double) { return Eigen::MatrixXd::Zero(2, 2); });
  DeVogelaereState s;
  s.y = (Eigen::MatrixXd(2, 2) << 1, 2, 3, 4).finished();
  s.dy = (Eigen::MatrixXd(2, 2) << 0.5, -1, 2, 0.25).finished();
  const Eigen::MatrixXd y0 = s.y, dy0 = s.dy;
  de_vogelaere_start(s, apply, 0.3);
  de_vogelaere_step(s, apply, 0.3);
  CHECK((s.y - (y0 + 0.3 * dy0)).norm() < 1e-15);
  CHECK((s.dy - dy0).norm() < 1e-15);
  CHECK(s.rho == doctest::Approx(0.3));
}

TEST_CASE("fourth-order global convergence on sin(k rho)") {
  const double k = 3.0, L = 4.0;
  double prev = 0.0;
  for (int n : {40, 80, 160, 320}) {
    const auto s = integrate(-k * k, L, n);
    const double err = std::abs(s.y(0, 0) - std::sin(k * L) / k);
    if (prev > 0.0) CHECK(std::log2(prev / err) == doctest::Approx(4.0).epsilon(0.05));
    prev = err;
  }
}

TEST_CASE("exponential growth for a closed channel") {
  const double kappa = 2.0, L = 3.0;
  const auto s = integrate(kappa * kappa, L, 600);
  CHECK(s.y(0, 0) == doctest::Approx(std::sinh(kappa * L) / kappa).epsilon(1e-8));
  CHECK(s.dy(0, 0) == doctest::Approx(std::cosh(kappa * L)).epsilon(1e-8));
}

TEST_CASE("Wronskian invariant for a symmetric coupling") {
  const CouplingFn U = [](double r) {
    Eigen::MatrixXd u(3, 3);
    u << -4.0 + r, 0.3, 0.1 * r, 0.3, 1.0, -0.2, 0.1 * r, -0.2, -2.0 - 0.5 * r;
    return u;
  };
  const ApplyFn apply = apply_from(U);
  DeVogelaereState s;
  s.y = Eigen::MatrixXd::Zero(3, 3);
  s.dy = Eigen::MatrixXd::Identity(3, 3);
  const double h = 0.002;
  de_vogelaere_start(s, apply, h);
  for (int i = 0; i < 1000; ++i) de_vogelaere_step(s, apply, h);
  const Eigen::MatrixXd w = s.y.transpose() * s.dy - s.dy.transpose() * s.y;
  CHECK(w.norm() <= 1e-8 * s.y.norm() * s.dy.norm());
}

TEST_CASE("non-finite values raise a blow-up error") {
  const ApplyFn apply = apply_from([](double) { return Eigen::MatrixXd::Constant(1, 1, std::nan("")); });
  DeVogelaereState s;
  s.y = Eigen::MatrixXd::Zero(1, 1);
  s.dy = Eigen::MatrixXd::Ones(1, 1);
  de_vogelaere_start(s, apply, 0.1);
  try {
    de_vogelaere_step(s, apply, 0.1);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BlowUp);
  }
}
