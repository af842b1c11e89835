#pragma once

// Physical constants, particle masses and the colinear three-body coordinates.
//
// Internal units are electron-based atomic units (hbar = e = m_e = 1). Masses
// are in electron masses, lengths in electron Bohr radii, energies in hartree.
// Hyperspherical radii rho are expressed in the mass-scaled Jacobi frame.

#include <numbers>

namespace mutransfer {

namespace units {

inline constexpr double pi = std::numbers::pi;

/// hartree -> eV, fixed for the whole code base.
inline constexpr double hartree_eV = 27.211386;

/// Electron Bohr radius in cm and Angstrom.
inline constexpr double bohr_cm = 0.529177210903e-8;
inline constexpr double bohr_angstrom = 0.529177210903;

/// Atomic unit of time in seconds.
inline constexpr double au_time_s = 2.4188843265857e-17;

/// Number density of liquid hydrogen (cm^-3).
inline constexpr double liquid_hydrogen_density_cm3 = 4.25e22;

inline constexpr double to_eV(double hartree) { return hartree * hartree_eV; }
inline constexpr double to_hartree(double eV) { return eV / hartree_eV; }

}  // namespace units

namespace defaults {

inline constexpr double mass_p = 1836.1527;
inline constexpr double mass_mu = 206.7683;
/// Bare 16O nucleus: atomic mass minus eight electrons.
inline constexpr double mass_O = 29148.95;
inline constexpr double charge_O = 8.0;

}  // namespace defaults

struct MassSet {
  double m_p = 0.0;
  double m_mu = 0.0;
  double m_O = 0.0;
  /// O against the (p mu) centre of mass.
  double m_O_pmu = 0.0;
  /// p against mu.
  double m_p_mu = 0.0;
  /// mu against O (product fragment).
  double m_mu_O = 0.0;
  /// p against the (mu O) centre of mass.
  double m_p_muO = 0.0;
  /// Three-body scaled mass m of the hyperspherical kinetic energy.
  double m_scaled = 0.0;
  /// Upper bound of the hyperangle, arctan(m_mu / m).
  double theta_mu = 0.0;
};

/// Throws Error(InvalidInput) for nonpositive masses.
MassSet build_mass_set(double m_p, double m_mu, double m_O);

inline MassSet default_masses() {
  return build_mass_set(defaults::mass_p, defaults::mass_mu, defaults::mass_O);
}

struct HypersphericalPoint {
  double rho = 0.0;
  double theta = 0.0;
  /// True when R = r = 0 and theta carries no information.
  bool theta_undefined = false;
};

/// (R, r) mass-scaled Jacobi lengths of the entrance arrangement -> (rho, theta).
HypersphericalPoint to_hyperspherical(double R, double r);

struct InterparticleDistances {
  double d_pmu = 0.0;
  double d_muO = 0.0;
  double d_pO = 0.0;
};

/// Physical distances for the colinear p - mu - O arrangement.
/// Requires 0 <= theta <= theta_mu (Error(Domain) otherwise) and rho >= 0.
InterparticleDistances interparticle_distances(double rho, double theta, const MassSet& masses);

/// Same as above but with the two angular offsets theta and theta_mu - theta
/// supplied directly, so callers can keep full relative precision close to
/// either Coulomb singularity.
InterparticleDistances interparticle_distances_split(double rho, double theta,
                                                     double theta_complement,
                                                     const MassSet& masses);

/// Mass-scaled entrance Jacobi lengths (R, r) from physical positions on the axis.
struct JacobiPair {
  double R = 0.0;
  double r = 0.0;
};
JacobiPair jacobi_from_positions(double x_p, double x_mu, double x_O, const MassSet& masses);

/// Conversion factors between physical and mass-scaled lengths.
/// scaled = sqrt(m_reduced / m) * physical.
double entrance_R_scale(const MassSet& masses);   // R_scaled / R_phys
double entrance_r_scale(const MassSet& masses);   // r_scaled / d_pmu
double product_r_scale(const MassSet& masses);    // r'_scaled / d_muO
double product_R_scale(const MassSet& masses);    // R'_scaled / R'_phys

/// Hydrogenic level -Z^2 mu / (2 n^2), hartree.
inline constexpr double hydrogenic_energy(double Z, double reduced_mass, int n) {
  return -Z * Z * reduced_mass / (2.0 * static_cast<double>(n) * static_cast<double>(n));
}

}  // namespace mutransfer
