#pragma once

// de Vogelaere integration of the close-coupling equations F'' = U(rho) F
// across the sectors of a SectorSet.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "mutransfer/sectors.hpp"

namespace mutransfer {

/// y'' = U(rho) y with U supplied by the caller; used by the scalar tests and
/// by the sector propagation below.
struct DeVogelaereState {
  double rho = 0.0;
  Eigen::MatrixXd y;
  Eigen::MatrixXd dy;
  /// U y at rho and at rho - h/2 (kept from the previous step).
  Eigen::MatrixXd f;
  Eigen::MatrixXd f_half_back;
};

/// Returns U(rho) y.
using ApplyFn = std::function<Eigen::MatrixXd(double rho, const Eigen::MatrixXd& y)>;
using CouplingFn = std::function<Eigen::MatrixXd(double rho)>;

/// Fills f and f_half_back for a (re)start with step h.
void de_vogelaere_start(DeVogelaereState& s, const ApplyFn& apply, double h);

/// One step of length h. Error(BlowUp) on non-finite values.
void de_vogelaere_step(DeVogelaereState& s, const ApplyFn& apply, double h);

ApplyFn apply_from(CouplingFn U);

struct PropagatorOptions {
  /// h = min(sector width / steps_per_sector, local wavelength / steps_per_wavelength)
  double steps_per_sector = 8.0;
  /// The deepest muO channels carry keV local energies; 20 leaves a
  /// unitarity defect near 1e-2, 180 brings it below 1e-6.
  double steps_per_wavelength = 180.0;
  /// Column re-orthonormalisation when the estimated condition exceeds this.
  /// Above ~1e6 the Wronskian loses cond * eps and S stops converging.
  double stabilize_condition = 1e6;
  int check_interval = 16;
  bool stabilize = true;
  /// Zero every coupling between pmu- and muO-localised sector states. In each
  /// sector the states most localised on the pmu side, as many as the final
  /// basis has pmu channels, form the pmu group.
  bool decouple_arrangements = false;
};

struct StabilizationEvent {
  double rho = 0.0;
  double condition = 0.0;
};

struct PropagationState {
  double energy = 0.0;  // absolute, hartree
  double rho = 0.0;
  /// Columns are independent regular solutions, rows are channels of the
  /// final (adiabatic) basis at rho_end.
  Eigen::MatrixXd F;
  Eigen::MatrixXd Fp;
  long steps = 0;
  std::vector<StabilizationEvent> stabilizations;
  double max_condition = 1.0;
  /// ||F^T F' - F'^T F|| / (||F|| ||F'||) at the end.
  double wronskian_defect = 0.0;
};

/// Propagates the regular solution F(rho_start) = 0, F'(rho_start) = I for
/// every absolute energy (hartree) in one pass over the sectors.
std::vector<PropagationState> propagate(const std::vector<double>& energies, const SectorSet& sectors,
                                        const PropagatorOptions& options = {});

PropagationState propagate(double energy, const SectorSet& sectors, const PropagatorOptions& options = {});

/// Log-derivative Y = F' F^{-1}, symmetrised.
Eigen::MatrixXd log_derivative(const PropagationState& state);

}  // namespace mutransfer
