#pragma once

// Diabatic-by-sector representation: frozen surface bases on a hyperradial
// grid, the coupling matrices needed inside each sector and the boundary
// transformations between neighbouring sectors.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mutransfer/surface_basis.hpp"

namespace mutransfer {

struct SectorGridSpec {
  double rho_start = 0.05;
  double rho_end = 30.0;
  /// Initial geometric sectors before adaptive subdivision.
  int n_sectors = 160;
  /// Absolute width cap (mass-scaled bohr); wider geometric sectors are split
  /// evenly. The truncated sector Hamiltonian misplaces the compact pmu states
  /// by ~ width^2, which must stay small against the 1/rho^2 entrance tail.
  double max_width = 0.012;
  /// Subdivide while ||T^T T - I|| on the retained space exceeds this.
  double max_overlap_defect = 0.1;
  /// Sectors are never split below this relative width.
  double min_relative_width = 1e-3;
  /// Chebyshev degree cap for rho * <V>(rho) inside a sector.
  int max_cheb_degree = 12;
  /// Target accuracy (hartree * a0) of that interpolation.
  double cheb_tolerance = 1e-10;
};

/// One sector [lo, hi] with its basis frozen at rho_c.
struct Sector {
  double lo = 0.0;
  double hi = 0.0;
  SectorBasis basis;
  /// Angular kinetic matrix; contributes A / rho^2.
  Eigen::MatrixXd A;
  /// Chebyshev coefficients in t in [-1, 1] of rho * <phi_i|V|phi_j>(rho).
  std::vector<Eigen::MatrixXd> rho_v_cheb;
  /// Orthogonalised overlap with the next sector (or the final basis).
  Eigen::MatrixXd to_next;
  /// ||T^T T - I|| of the raw overlap with the next sector.
  double overlap_defect = 0.0;

  double center() const { return basis.rho; }
  Eigen::Index size() const { return A.rows(); }

  /// rho * <V>(rho) at rho inside the sector.
  Eigen::MatrixXd rho_potential(double rho) const;
  /// Sector Hamiltonian A/rho^2 + <V>(rho) - 1/(8 m rho^2), hartree.
  Eigen::MatrixXd hamiltonian(double rho, double m_scaled) const;
};

struct SectorSet {
  PotentialVariant variant = PotentialVariant::Coulomb;
  int n_L = 0;
  int n_channels = 0;
  double m_scaled = 0.0;
  SectorGridSpec spec;
  std::vector<Sector> sectors;
  /// Adiabatic basis at rho_end (labelled); matching is done in this basis.
  SectorBasis final_basis;
  /// Sector boundaries where the defect stayed above the threshold.
  std::vector<std::string> diagnostics;
  std::uint64_t key = 0;

  double rho_start() const { return sectors.front().lo; }
  double rho_end() const { return sectors.back().hi; }
};

/// Geometric grid of n+1 edges.
std::vector<double> geometric_edges(double lo, double hi, int n);

/// Initial edges of a spec: geometric, then capped at max_width.
std::vector<double> sector_edges(const SectorGridSpec& spec);

/// Cache key from the model, basis size, channel count and grid spec.
std::uint64_t sector_cache_key(const PotentialModel& model, int n_L, int n_channels,
                               const SectorGridSpec& spec);

/// Builds all sectors; `workers` threads diagonalise in parallel (0: hardware).
SectorSet build_sectors(const PotentialModel& model, int n_L, int n_channels,
                        const SectorGridSpec& spec, unsigned workers = 0);

std::filesystem::path sector_cache_file(const std::filesystem::path& cache_dir, std::uint64_t key);

/// Build through an on-disk cache in `cache_dir` (empty path: no cache).
SectorSet load_or_build_sectors(const PotentialModel& model, int n_L, int n_channels,
                                const SectorGridSpec& spec, const std::filesystem::path& cache_dir,
                                unsigned workers = 0, bool* from_cache = nullptr);

void save_sectors(const SectorSet& set, const std::filesystem::path& file);
/// Error(Io) on a missing or corrupt file.
SectorSet load_sectors(const std::filesystem::path& file,
                       std::shared_ptr<const LegendreSpectralGrid> grid = nullptr);

/// Nearest orthogonal matrix (polar factor) of a square matrix.
Eigen::MatrixXd nearest_orthogonal(const Eigen::MatrixXd& t);

}  // namespace mutransfer
