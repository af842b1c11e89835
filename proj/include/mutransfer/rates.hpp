#pragma once

// s-wave cross sections and transfer rates at liquid-hydrogen density.

#include <string>
#include <vector>

#include "mutransfer/constants.hpp"

namespace mutransfer {

/// Single partial wave: only trustworthy up to about this collision energy.
inline constexpr double s_wave_limit_eV = 0.2;

/// sigma = pi / k^2 P in cm^2, k = sqrt(2 m_O_pmu E). E in eV, P in [0, 1].
double cross_section(double E_eV, double P, const MassSet& masses);

/// lambda = N v sigma in 1/s, v = sqrt(2 E / m_O_pmu). sigma in cm^2.
double rate(double E_eV, double sigma_cm2, const MassSet& masses,
            double density_cm3 = units::liquid_hydrogen_density_cm3);

/// Same chain evaluated in atomic units and converted at the end; used as
/// a unit audit against rate(cross_section(...)).
double rate_atomic_units(double E_eV, double P, const MassSet& masses,
                         double density_cm3 = units::liquid_hydrogen_density_cm3);

enum class RateSource { MultichannelCoulomb, MultichannelTF, Estimate3D, LandauZener, UnitBound };

std::string to_string(RateSource s);

struct RateCurve {
  RateSource source = RateSource::UnitBound;
  std::vector<double> energy_eV;
  std::vector<double> probability;
  std::vector<double> sigma_cm2;
  std::vector<double> lambda_per_s;
  std::vector<bool> s_wave_valid;
};

/// Error(InvalidInput) unless the grid is strictly increasing and positive
/// and every P lies in [0, 1].
RateCurve rate_scan(const std::vector<double>& energy_eV, const std::vector<double>& P, RateSource source,
                    const MassSet& masses);

/// P = 1 upper bound on the same grid.
RateCurve unit_bound(const std::vector<double>& energy_eV, const MassSet& masses);

}  // namespace mutransfer
