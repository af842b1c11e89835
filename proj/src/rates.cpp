#include "mutransfer/rates.hpp"

#include <cmath>

#include "mutransfer/error.hpp"

namespace mutransfer {

namespace {

// Atomic unit of velocity, cm/s.
constexpr double au_velocity_cm_s = units::bohr_cm / units::au_time_s;

void check(double E_eV, double P) {
  if (!(E_eV > 0.0) || !std::isfinite(E_eV)) throw Error(ErrorKind::Domain, "collision energy must be positive");
  if (!(P >= 0.0 && P <= 1.0)) throw Error(ErrorKind::InvalidInput, "probability outside [0, 1]");
}

}  // namespace

double cross_section(double E_eV, double P, const MassSet& masses) {
  check(E_eV, P);
  const double k2 = 2.0 * masses.m_O_pmu * units::to_hartree(E_eV);
  return units::pi / k2 * P * units::bohr_cm * units::bohr_cm;
}

double rate(double E_eV, double sigma_cm2, const MassSet& masses, double density_cm3) {
  check(E_eV, 0.0);
  if (!(sigma_cm2 >= 0.0)) throw Error(ErrorKind::InvalidInput, "negative cross section");
  const double v = std::sqrt(2.0 * units::to_hartree(E_eV) / masses.m_O_pmu) * au_velocity_cm_s;
  return density_cm3 * v * sigma_cm2;
}

double rate_atomic_units(double E_eV, double P, const MassSet& masses, double density_cm3) {
  check(E_eV, P);
  const double E = units::to_hartree(E_eV);
  const double k = std::sqrt(2.0 * masses.m_O_pmu * E);
  const double v = k / masses.m_O_pmu;
  const double sigma = units::pi / (k * k) * P;
  const double N = density_cm3 * units::bohr_cm * units::bohr_cm * units::bohr_cm;
  return N * v * sigma / units::au_time_s;
}

std::string to_string(RateSource s) {
  switch (s) {
    case RateSource::MultichannelCoulomb: return "multichannel-C";
    case RateSource::MultichannelTF: return "multichannel-TF";
    case RateSource::Estimate3D: return "3D-estimate";
    case RateSource::LandauZener: return "LZ";
    case RateSource::UnitBound: return "P=1";
  }
  return "?";
}

RateCurve rate_scan(const std::vector<double>& energy_eV, const std::vector<double>& P, RateSource source,
                    const MassSet& masses) {
  if (energy_eV.size() != P.size()) throw Error(ErrorKind::InvalidInput, "energy and probability grids differ in size");
  for (std::size_t i = 1; i < energy_eV.size(); ++i)
    if (!(energy_eV[i] > energy_eV[i - 1])) throw Error(ErrorKind::InvalidInput, "energy grid not increasing");
  RateCurve c;
  c.source = source;
  c.energy_eV = energy_eV;
  c.probability = P;
  for (std::size_t i = 0; i < energy_eV.size(); ++i) {
    const double s = cross_section(energy_eV[i], P[i], masses);
    c.sigma_cm2.push_back(s);
    c.lambda_per_s.push_back(rate(energy_eV[i], s, masses));
    c.s_wave_valid.push_back(energy_eV[i] <= s_wave_limit_eV);
  }
  return c;
}

RateCurve unit_bound(const std::vector<double>& energy_eV, const MassSet& masses) {
  return rate_scan(energy_eV, std::vector<double>(energy_eV.size(), 1.0), RateSource::UnitBound, masses);
}

}  // namespace mutransfer
