#include <doctest.h>

#include <cstdlib>
#include <random>

#include "mutransfer/config.hpp"
#include "mutransfer/error.hpp"

using namespace mutransfer;

TEST_CASE("default config round-trips") {
  const RunConfig c = default_config();
  const std::string text = serialize(c);
  const RunConfig d = parse_config(text);
  CHECK(serialize(d) == text);
  CHECK(config_hash(d) == config_hash(c));
  CHECK(c.provenance.at("basis.n_L") == Provenance::Paper);
  CHECK(c.provenance.at("channels.count") == Provenance::Paper);
  CHECK(c.provenance.at("grid.rho_end") == Provenance::Paper);
  CHECK(c.provenance.at("grid.max_width") == Provenance::Engineering);
  CHECK(c.n_L == 350);
  CHECK(c.n_channels == 29);
  CHECK(c.grid.rho_end == 30.0);
  CHECK(c.energies.lo_eV == 1e-6);
  CHECK(c.energies.hi_eV == 1e3);
}

TEST_CASE("doubles survive a write/read cycle exactly") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-12.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    RunConfig c = default_config();
    c.grid.max_width = std::pow(10.0, u(rng));
    c.energies.lo_eV = std::pow(10.0, u(rng));
    c.propagator.steps_per_wavelength = 1.0 + std::pow(10.0, u(rng));
    const RunConfig d = parse_config(serialize(c));
    CHECK(d.grid.max_width == c.grid.max_width);
    CHECK(d.energies.lo_eV == c.energies.lo_eV);
    CHECK(d.propagator.steps_per_wavelength == c.propagator.steps_per_wavelength);
  }
}

TEST_CASE("user settings and provenance") {
  const RunConfig c = parse_config("# test\npotential = tf\nbasis.n_L = 250  # CI\nfigures = 3,5\n\n");
  CHECK(c.potentials.size() == 1);
  CHECK(c.potentials[0] == PotentialVariant::ThomasFermi);
  CHECK(c.n_L == 250);
  CHECK(c.provenance.at("basis.n_L") == Provenance::User);
  CHECK(c.provenance.at("channels.count") == Provenance::Paper);
  CHECK(wants_figure(c, 3));
  CHECK_FALSE(wants_figure(c, 4));
  CHECK(config_hash(c) != config_hash(default_config()));
}

TEST_CASE("config errors") {
  auto kind = [](const std::string& text) {
    try {
      validate(parse_config(text));
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  CHECK(kind("nonsense = 1\n") == ErrorKind::Config);
  CHECK(kind("basis.n_L = abc\n") == ErrorKind::Config);
  CHECK(kind("basis.n_L = 250\nbasis.n_L = 350\n") == ErrorKind::Config);
  CHECK(kind("just a line\n") == ErrorKind::Config);
  CHECK(kind("energies.lo_eV = -1\n") == ErrorKind::Config);
  CHECK(kind("figures = 7\n") == ErrorKind::Config);
  CHECK(kind("cache.policy = sometimes\n") == ErrorKind::Config);
  CHECK(kind("potential = yukawa\n") == ErrorKind::Config);
}

TEST_CASE("energy grid") {
  const EnergyGrid g = parse_energy_grid("1e-6:1e3:10_LOG");
  const auto v = g.values();
  REQUIRE(v.size() == 10);
  CHECK(v.front() == 1e-6);
  CHECK(v.back() == 1e3);
  CHECK(v[1] / v[0] == doctest::Approx(10.0).epsilon(1e-12));
  CHECK_THROWS_AS(parse_energy_grid("1:2"), Error);
  CHECK_THROWS_AS(parse_energy_grid("2:1:5"), Error);
}

TEST_CASE("cache directory resolution") {
  RunConfig c = default_config();
  c.output_dir = "out";
  unsetenv("MUTRANSFER_CACHE");
  CHECK(cache_directory(c) == std::filesystem::path("out") / "cache");
  setenv("MUTRANSFER_CACHE", "/tmp/mt-cache-env", 1);
  CHECK(cache_directory(c) == std::filesystem::path("/tmp/mt-cache-env"));
  c.cache_dir = "/tmp/explicit";
  CHECK(cache_directory(c) == std::filesystem::path("/tmp/explicit"));
  unsetenv("MUTRANSFER_CACHE");
}
