#pragma once

// Reduced models: three-channel Landau-Zener cascade, one-channel
// transmittance through the entrance tail, and the factorised estimates
// P(E) = |T(E)|^2 P_max built from them.

#include <vector>

#include "mutransfer/potential.hpp"
#include "mutransfer/radial.hpp"
#include "mutransfer/surface_basis.hpp"

namespace mutransfer {

struct LandauZenerCrossing {
  ChannelLabel product;
  double rho_c = 0.0;
  /// Diabatic coupling H12 = gap / 2, hartree.
  double coupling = 0.0;
  /// |dV1/drho - dV2/drho| in the mass-scaled frame, hartree / a0.
  double slope_difference = 0.0;
  /// Mean adiabatic energy at the crossing above the entrance asymptote, hartree.
  double energy = 0.0;

  /// Diabatic single-passage probability exp(-2 pi H12^2 / (v |dF|)) with
  /// v = sqrt(2 (E - energy) / m). Returns -1 when the crossing is not
  /// reachable at collision energy E.
  double single_passage(double E, double m_scaled) const;
};

struct LandauZenerModel {
  /// Entrance meets `outer` (muO(6)) first on the way in, then `inner` (muO(5)).
  LandauZenerCrossing outer;
  LandauZenerCrossing inner;
  double m_scaled = 0.0;
};

/// Default scan grid for crossing extraction.
std::vector<double> crossing_scan_grid();

/// Tracks pmu(1), muO(6), muO(5) along `rho_grid` and fits both crossings.
/// The inner one is searched inside the outer one, between the adiabats
/// tracked from muO(6) and muO(5). Error(NotFound) if either is missing.
LandauZenerModel extract_landau_zener(const PotentialModel& model, int n_L,
                                      const std::vector<double>& rho_grid = crossing_scan_grid());

struct LandauZenerResult {
  double p_outer = 0.0;
  double p_inner = 0.0;
  double P6 = 0.0;
  double P5 = 0.0;
  double total = 0.0;
};

/// Incoherent in/out cascade through both crossings; E > 0 in hartree.
LandauZenerResult landau_zener_total(double E, const LandauZenerModel& lz);

struct TransmittanceResult {
  double T = 0.0;
  /// arg of the incoming amplitude A in F = A f- + B f+.
  double phase = 0.0;
  /// |B / A|; flux conservation gives T^2 + reflection^2 = 1 when the core is open.
  double reflection = 0.0;
  double K = 0.0;
  double k = 0.0;
  /// E below the flat core: the inner solution is evanescent and T is not a flux ratio.
  bool tunneling = false;
};

/// One-channel problem in the physical entrance distance R with the
/// O-(p mu) reduced mass; E > 0 in hartree. The solution is a unit-flux
/// ingoing wave e^{-iKR}/sqrt(K) inside R0; outside it is A f- + B f+ with
/// f+- the sqrt(k)-normalised out/ingoing tail solutions, and T = 1/|A|.
TransmittanceResult transmittance(double E, const EffectivePotential1Ch& spec,
                                  const RadialOptions& options = {});

/// |T|^2 P_max. Error(InvalidInput) for P_max outside [0, 1].
double factorized_probability(double T, double P_max);

/// Physical transfer radius from the muO(6) crossing.
double transfer_radius(const LandauZenerModel& lz, const MassSet& masses);

/// 3D estimate: -C4/R^4 tail with the Coulomb charge and the colinear P_max.
double estimate_3d(double E, const PotentialModel& coulomb, double R0, double P_max,
                   const RadialOptions& options = {});

}  // namespace mutransfer
