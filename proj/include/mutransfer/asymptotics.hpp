#pragma once

// Channel bookkeeping at rho_end, asymptotic reference functions and the
// S-matrix extraction.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mutransfer/propagator.hpp"
#include "mutransfer/radial.hpp"

namespace mutransfer {

/// Bound levels of a fragment on the half-line, u'' = 2 mu (V(r) - E) u,
/// u(0) = 0, with V(r) = -Z*(r) / r.
struct FragmentSpectrum {
  double reduced_mass = 0.0;
  double box = 0.0;
  Eigen::VectorXd energies;
  Eigen::MatrixXd coefficients;
  std::shared_ptr<const LegendreSpectralGrid> grid;

  /// Normalised u_n(r) (n counted from 0).
  double wavefunction(int n, double r) const;
};

/// `charge(r)` is Z*(r); the box is sized from the highest requested level.
FragmentSpectrum solve_fragment(const std::function<double(double)>& charge, double Z_asymptotic,
                                double reduced_mass, int n_levels, int n_L = 400);

/// Asymptotic thresholds (hartree): analytic hydrogenic for pmu; for muO
/// analytic (Coulomb) or numerical with the screened charge (Thomas-Fermi).
std::vector<double> fragment_thresholds(const PotentialModel& model, Arrangement arrangement, int n_max);

/// Everything about the asymptotic region that does not depend on energy.
struct AsymptoticModel {
  PotentialVariant variant = PotentialVariant::Coulomb;
  MassSet masses;
  double rho_end = 0.0;
  double m_scaled = 0.0;
  /// Energy origin: the p mu(1) + O asymptote, hartree.
  double entrance_threshold = 0.0;
  /// Final-basis index of the entrance channel.
  int entrance = -1;
  std::vector<ChannelLabel> labels;
  /// Adiabatic energies at rho_end and asymptotic thresholds, hartree.
  Eigen::VectorXd local_energies;
  Eigen::VectorXd thresholds;

  /// Entrance tail u'' = -(k^2 + g/rho^2 - extra(rho)) u beyond rho_end.
  /// Coulomb: eps_1 = thr - C2/rho^2 - C3/rho^3 fitted on the adiabatic curve.
  double C2 = 0.0;
  double C3 = 0.0;
  double g = 0.0;
  /// Thomas-Fermi: first-order pmu(1)-O interaction, zero beyond rho_free.
  std::function<double(double)> entrance_potential;
  double rho_free = 0.0;
  /// Fit samples (rho, rho^2 (eps - thr)).
  std::vector<double> fit_rho;
  std::vector<double> fit_values;
  /// eps_1(rho_end) minus the reference channel potential at rho_end.
  double tail_mismatch = 0.0;
  /// 1 - |<phi|Jacobi state>|^2 summed over the final basis, per channel.
  Eigen::VectorXd projection_residual;
};

AsymptoticModel build_asymptotic_model(const PotentialModel& model, const SectorSet& sectors);

struct ChannelInfo {
  ChannelLabel label;
  /// Row in the final basis.
  int index = -1;
  double threshold = 0.0;
  double local_energy = 0.0;
  /// Fragment-pair reduced mass of the arrangement (electron masses).
  double reduced_mass = 0.0;
  /// Open asymptotically (E > threshold, strict).
  bool open = false;
  /// Open at rho_end as well; only these are matched as travelling waves.
  bool matched_open = false;
  /// Wavenumber in the rho equation (mass m), or decay constant when closed.
  double k = 0.0;
  bool entrance = false;
};

struct ChannelTable {
  /// Collision energy above the entrance asymptote and absolute energy, hartree.
  double collision_energy = 0.0;
  double absolute_energy = 0.0;
  std::vector<ChannelInfo> channels;
  int entrance = -1;

  std::vector<int> matched_open() const;
};

/// Error(Domain) when the entrance channel is not open.
ChannelTable build_channel_table(double collision_energy, const AsymptoticModel& asym);

/// Real pair with W(c, s) = c s' - c' s = 1 at rho.
struct ReferenceFunctionPair {
  double s = 0.0;
  double ds = 0.0;
  double c = 0.0;
  double dc = 0.0;
  double wronskian() const { return c * ds - dc * s; }
};

ReferenceFunctionPair entrance_reference(double collision_energy, const AsymptoticModel& asym, double rho,
                                         const RadialOptions& options = {});

/// sin(k rho)/sqrt(k), cos(k rho)/sqrt(k). Error(Domain) for k <= 0.
ReferenceFunctionPair product_reference(double k, double rho);

struct ScatteringResult {
  double collision_energy_eV = 0.0;
  /// Final-basis rows of the open channels and their labels.
  std::vector<int> open;
  std::vector<ChannelLabel> labels;
  Eigen::MatrixXd K;
  Eigen::MatrixXcd S;
  /// |S_{entrance, c}|^2 over the open channels.
  Eigen::VectorXd probabilities;
  int entrance_column = -1;
  double total_transfer = 0.0;
  double unitarity_defect = 0.0;
  double symmetry_defect = 0.0;
  double matching_residual = 0.0;
  double wronskian_defect = 0.0;

  /// Probability into a labelled channel (0 if closed or absent).
  double probability(const ChannelLabel& label) const;
};

ScatteringResult match_and_extract(const PropagationState& state, const ChannelTable& table,
                                   const AsymptoticModel& asym);

}  // namespace mutransfer
