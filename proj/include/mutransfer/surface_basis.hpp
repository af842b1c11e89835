#pragma once

// Fixed-rho surface (hyperangular) eigenproblem in the associated Legendre
// basis, adiabatic curves, inter-sector overlaps and avoided crossings.
//
// With x = 2 theta / theta_mu - 1 the surface functions are written
// phi(x) = (1 - x^2)^{1/2} phibar(x) and phibar is expanded on the orthonormal
// Pbar^1_n(x), n = 1..n_L. Functions are normalised in dx.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mutransfer/legendre.hpp"
#include "mutransfer/potential.hpp"

namespace mutransfer {

/// rho-independent part of the spectral discretisation for one basis size.
class LegendreSpectralGrid {
 public:
  /// quadrature_points defaults to n_L + 16 (the overlap matrix needs n_L + 2
  /// for exactness; the rest resolves the potential factor).
  explicit LegendreSpectralGrid(int n_L, int quadrature_points = 0);

  int n_L() const { return n_L_; }
  const GaussLegendreRule& rule() const { return rule_; }
  /// q_n(x_k), rows = nodes, cols = n.
  const Eigen::MatrixXd& q() const { return q_; }
  const Eigen::MatrixXd& overlap() const { return O_; }
  const Eigen::MatrixXd& overlap_inv_sqrt() const { return O_inv_sqrt_; }
  double overlap_min_eigenvalue() const { return o_min_; }

  /// Values phi_i(x_k) = (1 - x_k^2) sum_n C_ni q_n(x_k) of coefficient columns.
  Eigen::MatrixXd values_at_nodes(const Eigen::MatrixXd& coefficients) const;

  /// Values at arbitrary x in [-1, 1] (1+x and 1-x given separately).
  Eigen::VectorXd values_at(double one_plus_x, double one_minus_x,
                            const Eigen::MatrixXd& coefficients) const;

  /// Shared grid for a basis size (built once per process).
  static std::shared_ptr<const LegendreSpectralGrid> shared(int n_L, int quadrature_points = 0);

 private:
  int n_L_;
  GaussLegendreRule rule_;
  Eigen::MatrixXd q_;
  Eigen::MatrixXd O_;
  Eigen::MatrixXd O_inv_sqrt_;
  double o_min_ = 0.0;
};

struct AngularOperatorMatrices {
  int n_L = 0;
  double rho = 0.0;
  /// 2 hbar^2 / (m theta_mu^2 rho^2)
  double kinetic_prefactor = 0.0;
  /// Diagonal of D: -n(n+1), n = 1..n_L.
  Eigen::VectorXd D;
  /// (1 - x^2)(V - hbar^2 / (8 m rho^2)) in the basis.
  Eigen::MatrixXd W;
  /// (1 - x^2) in the basis.
  Eigen::MatrixXd O;
  std::shared_ptr<const LegendreSpectralGrid> grid;

  /// -kinetic_prefactor D + W
  Eigen::MatrixXd hamiltonian() const;
};

AngularOperatorMatrices build_operator_matrices(double rho, int n_L, const PotentialModel& model);
AngularOperatorMatrices build_operator_matrices(double rho,
                                                std::shared_ptr<const LegendreSpectralGrid> grid,
                                                const PotentialModel& model);

enum class Arrangement { PMu, MuO, Unassigned };

struct ChannelLabel {
  Arrangement arrangement = Arrangement::Unassigned;
  int n = 0;

  bool operator==(const ChannelLabel&) const = default;
};

std::string to_string(const ChannelLabel& label);

struct SectorBasis {
  double rho = 0.0;
  double half_width = 0.0;
  /// Ascending, hartree.
  Eigen::VectorXd energies;
  /// n_L x n_keep coefficient columns, O-orthonormal.
  Eigen::MatrixXd coefficients;
  /// Filled by label_states(); empty otherwise.
  std::vector<ChannelLabel> labels;
  std::shared_ptr<const LegendreSpectralGrid> grid;

  Eigen::Index size() const { return energies.size(); }
};

/// Generalised eigenproblem reduced by O^{-1/2}. Keeps the lowest n_keep
/// states (all when n_keep <= 0). Error(Conditioning) when O is singular.
SectorBasis solve_surface_states(const AngularOperatorMatrices& matrices, int n_keep = 0);

/// Number of solve_surface_states calls in this process.
std::uint64_t surface_solve_count();

/// <x> of each state, negative for states localised at the p-mu singularity.
Eigen::VectorXd state_localisation(const SectorBasis& basis);

/// Label states by arrangement (sign of <x>) and energy order within each.
void label_states(SectorBasis& basis);

/// T_ij = phi_i(A)^T O phi_j(B).
Eigen::MatrixXd sector_overlap(const SectorBasis& a, const SectorBasis& b);

struct CurveTable {
  std::vector<double> rho;
  /// n_rho x n_keep, adiabatic (energy) order at each rho, hartree.
  Eigen::MatrixXd energies;
  /// Labels assigned at the largest rho.
  std::vector<ChannelLabel> labels;
  /// n_rho x n_keep: adiabatic index of each tracked label at each rho.
  Eigen::MatrixXi track;
  /// Human-readable notes on near-degenerate label assignments.
  std::vector<std::string> diagnostics;

  /// Energy of tracked label column j along the grid.
  Eigen::VectorXd tracked(int j) const;
  /// Column of the tracked label, or -1.
  int find(const ChannelLabel& label) const;
};

/// Lowest n_keep adiabatic energies along an increasing rho grid, with labels
/// continued by maximal overlap from the large-rho end.
CurveTable adiabatic_curve_scan(const std::vector<double>& rho_grid, int n_L,
                                const PotentialModel& model, int n_keep);

struct AvoidedCrossing {
  double rho_c = 0.0;
  /// Minimum adiabatic separation (twice the diabatic coupling).
  double gap = 0.0;
  /// |difference of diabatic slopes| from the curvature of gap^2.
  double slope_difference = 0.0;
};

/// Curves given on a common grid. Error(NotFound) when |e_i - e_j| has no
/// interior local minimum.
AvoidedCrossing locate_avoided_crossing(const std::vector<double>& rho, const Eigen::VectorXd& e_i,
                                        const Eigen::VectorXd& e_j);

/// Crossing between two adiabatic indices of a curve table.
AvoidedCrossing locate_avoided_crossing(const CurveTable& curves, int i, int j);

}  // namespace mutransfer
