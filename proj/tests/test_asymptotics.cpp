#include <doctest.h>

#include <cmath>
#include <random>

#include "mutransfer/asymptotics.hpp"
#include "mutransfer/error.hpp"
#include "mutransfer/sectors.hpp"

using namespace mutransfer;

namespace {

const MassSet masses = default_masses();

// Ten channels out to rho = 4: pmu(1) plus muO(1..9). Builds in well under a second.
const SectorSet& small_set() {
  static const SectorSet set = [] {
    SectorGridSpec g;
    g.rho_end = 4.0;
    g.n_sectors = 60;
    g.max_width = 0.1;
    return build_sectors(PotentialModel(PotentialVariant::Coulomb, masses), 100, 10, g, 1);
  }();
  return set;
}

const AsymptoticModel& small_model() {
  static const AsymptoticModel a =
      build_asymptotic_model(PotentialModel(PotentialVariant::Coulomb, masses), small_set());
  return a;
}

ScatteringResult scatter(double E_eV, const PropagatorOptions& options = {}) {
  const auto table = build_channel_table(units::to_hartree(E_eV), small_model());
  return match_and_extract(propagate(table.absolute_energy, small_set(), options), table, small_model());
}

}  // namespace

TEST_CASE("fragment thresholds") {
  const PotentialModel coulomb(PotentialVariant::Coulomb, masses);
  const auto pmu = fragment_thresholds(coulomb, Arrangement::PMu, 2);
  const auto muo = fragment_thresholds(coulomb, Arrangement::MuO, 9);
  CHECK(units::to_eV(pmu[0]) == doctest::Approx(-2528.4935).epsilon(1e-7));
  CHECK(units::to_eV(muo[4]) == doctest::Approx(-7151.132).epsilon(1e-6));
  CHECK(units::to_eV(muo[5]) == doctest::Approx(-4966.064).epsilon(1e-6));
  CHECK(units::to_eV(pmu[0] - muo[5]) == doctest::Approx(2437.570).epsilon(1e-6));
  CHECK(units::to_eV(pmu[0] - muo[4]) == doctest::Approx(4622.638).epsilon(1e-6));
  // The entrance threshold lies between muO(8) and muO(9).
  CHECK(units::to_eV(muo[7]) == doctest::Approx(-2793.411).epsilon(1e-6));
  CHECK(units::to_eV(muo[8]) == doctest::Approx(-2207.140).epsilon(1e-6));
  CHECK(muo[7] < pmu[0]);
  CHECK(pmu[0] < muo[8]);

  // Screening only raises the muO levels, least for the compact ones.
  const PotentialModel tf(PotentialVariant::ThomasFermi, masses);
  const auto muo_tf = fragment_thresholds(tf, Arrangement::MuO, 6);
  double prev = 0.0;
  for (int n = 0; n < 6; ++n) {
    const double rel = (muo_tf[n] - muo[n]) / std::abs(muo[n]);
    CHECK(rel > 0.0);
    CHECK(rel > prev);
    prev = rel;
  }
  CHECK_THROWS_AS(fragment_thresholds(coulomb, Arrangement::Unassigned, 3), Error);
}

TEST_CASE("numerical fragment with an unscreened charge is hydrogenic") {
  const auto f = solve_fragment([](double) { return 8.0; }, 8.0, masses.m_mu_O, 6);
  for (int n = 1; n <= 6; ++n) {
    CHECK(f.energies(n - 1) == doctest::Approx(hydrogenic_energy(8.0, masses.m_mu_O, n)).epsilon(1e-9));
  }
}

TEST_CASE("reference pairs") {
  for (double k : {0.1, 1.0, 37.0}) {
    for (double rho : {0.3, 5.0, 40.0}) CHECK(product_reference(k, rho).wronskian() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(product_reference(0.0, 1.0), Error);
  CHECK_THROWS_AS(product_reference(-1.0, 1.0), Error);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> logE(-6.0, 2.0);
  for (int i = 0; i < 6; ++i) {
    const double E = units::to_hartree(std::pow(10.0, logE(rng)));
    const auto p = entrance_reference(E, small_model(), small_model().rho_end);
    CHECK(p.wronskian() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("tail solution without a tail is a free wave") {
  const double k = 2.5;
  for (double r : {0.5, 3.0, 20.0}) {
    const auto s = tail_solution(k, 0.0, r);
    const std::complex<double> f = std::exp(std::complex<double>(0.0, k * r)) / std::sqrt(k);
    CHECK(std::abs(s.f - f) < 1e-9);
    CHECK(std::abs(s.df - std::complex<double>(0.0, k) * f) < 1e-8);
  }
}

TEST_CASE("channel table") {
  const auto& a = small_model();
  REQUIRE(a.entrance >= 0);
  CHECK(a.labels[static_cast<std::size_t>(a.entrance)] == ChannelLabel{Arrangement::PMu, 1});
  CHECK(units::to_eV(a.entrance_threshold) == doctest::Approx(-2528.4935).epsilon(1e-7));

  const auto t = build_channel_table(units::to_hartree(0.04), a);
  int open = 0;
  for (const auto& c : t.channels) {
    if (c.open) ++open;
    const bool below = c.label.arrangement == Arrangement::MuO && c.label.n <= 8;
    CHECK(c.open == (below || c.entrance));
    CHECK(c.reduced_mass == (c.label.arrangement == Arrangement::PMu ? masses.m_O_pmu : masses.m_p_muO));
  }
  CHECK(open == 9);
  CHECK(t.channels[static_cast<std::size_t>(a.entrance)].k ==
        doctest::Approx(std::sqrt(2.0 * a.m_scaled * units::to_hartree(0.04))));

  // Strict: a channel is open only above its threshold.
  int j9 = -1;
  for (std::size_t i = 0; i < a.labels.size(); ++i)
    if (a.labels[i] == ChannelLabel{Arrangement::MuO, 9}) j9 = static_cast<int>(i);
  REQUIRE(j9 >= 0);
  const double gap = a.thresholds(j9) - a.entrance_threshold;
  CHECK_FALSE(build_channel_table(gap * (1.0 - 1e-9), a).channels[static_cast<std::size_t>(j9)].open);
  CHECK(build_channel_table(gap * (1.0 + 1e-9), a).channels[static_cast<std::size_t>(j9)].open);

  CHECK_THROWS_AS(build_channel_table(0.0, a), Error);
  CHECK_THROWS_AS(build_channel_table(-1e-6, a), Error);
}

TEST_CASE("S matrix properties") {
  for (double E : {1e-4, 0.04, 3.0}) {
    const auto r = scatter(E);
    CHECK(r.unitarity_defect < 1e-6);
    CHECK(r.symmetry_defect < 1e-6);
    CHECK(r.wronskian_defect < 1e-8);
    CHECK(r.probabilities.sum() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.total_transfer >= 0.0);
    CHECK(r.total_transfer <= 1.0);
    CHECK(r.probability({Arrangement::MuO, 9}) == 0.0);
  }
}

TEST_CASE("decoupled arrangements give no transfer") {
  PropagatorOptions o;
  o.decouple_arrangements = true;
  for (double E : {1e-3, 1.0}) {
    const auto r = scatter(E, o);
    CHECK(r.total_transfer < 1e-12);
    CHECK(r.probability({Arrangement::PMu, 1}) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("propagation controls") {
  const auto base = scatter(1.0);
  SUBCASE("step halving") {
    // The S error is h^4; the default 180 points per wavelength leave ~1e-4.
    PropagatorOptions a, b;
    a.steps_per_wavelength = 640.0;
    b.steps_per_wavelength = 1280.0;
    b.steps_per_sector = 2.0 * a.steps_per_sector;
    CHECK((scatter(1.0, b).S - scatter(1.0, a).S).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("stabilisation frequency") {
    PropagatorOptions o;
    o.check_interval = 4;
    o.stabilize_condition = 1e3;
    CHECK((scatter(1.0, o).S - base.S).cwiseAbs().maxCoeff() < 1e-8);
  }
}
