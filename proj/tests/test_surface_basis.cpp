#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "mutransfer/error.hpp"
#include "mutransfer/surface_basis.hpp"

using namespace mutransfer;

namespace {
const MassSet masses = default_masses();
const PotentialModel coulomb(PotentialVariant::Coulomb, masses);
}  // namespace

TEST_CASE("operator matrices") {
  const auto m3 = build_operator_matrices(1.0, 3, coulomb);
  CHECK(m3.D(0) == -2.0);
  CHECK(m3.D(1) == -6.0);
  CHECK(m3.D(2) == -12.0);

  const auto m = build_operator_matrices(1.0, 40, coulomb);
  CHECK((m.W - m.W.transpose()).norm() <= 1e-14 * m.W.norm());
  CHECK((m.O - m.O.transpose()).norm() <= 1e-14 * m.O.norm());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eo(m.O);
  CHECK(eo.eigenvalues().minCoeff() > 0.0);

  // (1 - x^2) between orthonormal P^1_1, P^1_2: 4/5, 4/7, zero by parity.
  const auto m2 = build_operator_matrices(1.0, 2, coulomb);
  CHECK(m2.O(0, 0) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(m2.O(1, 1) == doctest::Approx(4.0 / 7.0).epsilon(1e-14));
  CHECK(std::abs(m2.O(0, 1)) < 1e-15);

  CHECK_THROWS_AS(build_operator_matrices(0.0, 10, coulomb), Error);
}

TEST_CASE("free motion reduces to the theta box") {
  const double rho = 2.0;
  const auto m = build_operator_matrices(rho, 60, coulomb);
  const double shift = 1.0 / (8.0 * masses.m_scaled * rho * rho);
  Eigen::MatrixXd H = -shift * m.O;
  H.diagonal() -= m.kinetic_prefactor * m.D;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(H, m.O);
  for (int k = 1; k <= 6; ++k) {
    const double exact = m.kinetic_prefactor * std::pow(k * units::pi / 2, 2) - shift;
    CHECK(es.eigenvalues()(k - 1) == doctest::Approx(exact).epsilon(1e-10));
  }
}

TEST_CASE("surface states at large rho") {
  auto b = solve_surface_states(build_operator_matrices(40.0, 250, coulomb), 20);
  label_states(b);
  SUBCASE("O-orthonormal and ascending") {
    const Eigen::MatrixXd g = b.coefficients.transpose() * b.grid->overlap() * b.coefficients;
    CHECK((g - Eigen::MatrixXd::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-10);
    for (Eigen::Index i = 1; i < b.size(); ++i) CHECK(b.energies(i) > b.energies(i - 1));
  }
  SUBCASE("hydrogenic levels") {
    auto level = [&](ChannelLabel l) {
      for (std::size_t i = 0; i < b.labels.size(); ++i)
        if (b.labels[i] == l) return units::to_eV(b.energies(static_cast<Eigen::Index>(i)));
      return 0.0;
    };
    // pmu(1) carries only the -C2/rho^2 charge-dipole shift here.
    CHECK(level({Arrangement::PMu, 1}) == doctest::Approx(-2528.4935).epsilon(1e-5));
    CHECK(level({Arrangement::PMu, 1}) < -2528.4935);
    // muO(n) still feels the 7/R repulsion of p: above its fragment level.
    CHECK(level({Arrangement::MuO, 5}) > -7151.132);
    CHECK(level({Arrangement::MuO, 6}) > -4966.064);
    CHECK(level({Arrangement::MuO, 8}) > -2793.411);
  }
}

TEST_CASE("variational monotonicity in n_L") {
  for (double rho : {0.5, 5.0}) {
    const auto a = solve_surface_states(build_operator_matrices(rho, 120, coulomb), 15);
    const auto b = solve_surface_states(build_operator_matrices(rho, 200, coulomb), 15);
    for (Eigen::Index i = 0; i < 15; ++i) CHECK(b.energies(i) <= a.energies(i) + 1e-9 * std::abs(a.energies(i)));
  }
}

TEST_CASE("sector overlap") {
  const auto a = solve_surface_states(build_operator_matrices(3.0, 120, coulomb), 12);
  const Eigen::MatrixXd self = sector_overlap(a, a);
  CHECK((self - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-10);
  double prev = 1e300;
  for (double d : {0.2, 0.05, 0.0125}) {
    const auto b = solve_surface_states(build_operator_matrices(3.0 + d, 120, coulomb), 12);
    const Eigen::MatrixXd t = sector_overlap(a, b);
    for (Eigen::Index i = 0; i < 12; ++i) CHECK(t.row(i).norm() <= 1.0 + 1e-10);
    const double defect = (t.transpose() * t - Eigen::MatrixXd::Identity(12, 12)).norm();
    CHECK(defect <= prev);
    prev = defect;
  }
}

TEST_CASE("avoided crossing locator") {
  SUBCASE("linear diabats") {
    const double H12 = 0.03, x0 = 1.3, s1 = 2.0, s2 = -1.5;
    std::vector<double> rho;
    Eigen::VectorXd lo(201), hi(201);
    for (int i = 0; i <= 200; ++i) {
      const double x = 1.0 + 0.6 * i / 200.0;
      rho.push_back(x);
      const double d1 = s1 * (x - x0), d2 = s2 * (x - x0);
      const double mean = 0.5 * (d1 + d2), half = std::sqrt(0.25 * (d1 - d2) * (d1 - d2) + H12 * H12);
      lo(i) = mean - half;
      hi(i) = mean + half;
    }
    const auto c = locate_avoided_crossing(rho, lo, hi);
    CHECK(c.rho_c == doctest::Approx(x0).epsilon(1e-6));
    CHECK(c.gap == doctest::Approx(2 * H12).epsilon(1e-6));
    CHECK(c.slope_difference == doctest::Approx(s1 - s2).epsilon(1e-3));
  }
  SUBCASE("parallel curves") {
    std::vector<double> rho = {1, 2, 3, 4, 5};
    Eigen::VectorXd a(5), b(5);
    a << 1, 2, 3, 4, 5;
    b = a.array() + 1.0;
    CHECK_THROWS_AS(locate_avoided_crossing(rho, a, b), Error);
  }
}
