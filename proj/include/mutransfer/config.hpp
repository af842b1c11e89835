#pragma once

// Run configuration: plain-text `key = value` file, one field per line,
// `#` comments. Doubles are written in their shortest round-trip form so a
// write/read cycle is exact.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mutransfer/potential.hpp"
#include "mutransfer/propagator.hpp"
#include "mutransfer/sectors.hpp"

namespace mutransfer {

enum class CachePolicy { Use, Refresh, Off };

std::string to_string(CachePolicy p);
CachePolicy parse_cache_policy(const std::string& s);

enum class Provenance { Paper, Engineering, User };

std::string to_string(Provenance p);

struct EnergyGrid {
  double lo_eV = 1e-6;
  double hi_eV = 1e3;
  /// Log-spaced points including both ends.
  int points = 28;

  std::vector<double> values() const;
};

/// "LO:HI:N" or "LO:HI:N_LOG"; Error(Config) on anything else.
EnergyGrid parse_energy_grid(const std::string& s);

struct RunConfig {
  /// coulomb, tf, or both.
  std::vector<PotentialVariant> potentials = {PotentialVariant::Coulomb, PotentialVariant::ThomasFermi};
  int n_L = 350;
  /// Lowest adiabatic states kept in every sector.
  int n_channels = 29;
  SectorGridSpec grid;
  EnergyGrid energies;
  PropagatorOptions propagator;
  /// Energies propagated together; fixed so results do not depend on workers.
  int batch = 4;
  unsigned workers = 0;

  /// Adiabatic curve dump.
  double curves_rho_lo = 0.05;
  double curves_rho_hi = 40.0;
  int curves_points = 200;
  int curves_keep = 14;

  /// Energy at which the multichannel plateau P_max is read.
  double plateau_energy_eV = 0.1;
  /// Unitarity / symmetry gate on every production energy.
  double unitarity_tolerance = 1e-6;

  std::filesystem::path output_dir = "mutransfer-out";
  CachePolicy cache = CachePolicy::Use;
  /// Empty: $MUTRANSFER_CACHE, else <output_dir>/cache.
  std::filesystem::path cache_dir;

  /// Figures 1..6 to produce; empty means all.
  std::vector<int> figures;

  /// Where each field's value came from; filled for every key.
  std::map<std::string, Provenance> provenance;
};

/// Defaults with provenance filled in.
RunConfig default_config();

/// Error(Config) on unknown keys, malformed values or duplicates.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& file);

/// Every field, in a fixed order.
std::string serialize(const RunConfig& config);

/// FNV-1a of serialize(config) (provenance excluded).
std::uint64_t config_hash(const RunConfig& config);
std::string hex(std::uint64_t v);

/// Error(Config) for values no stage can run with.
void validate(const RunConfig& config);

/// Resolved cache directory (env var, then config, then output_dir/cache).
std::filesystem::path cache_directory(const RunConfig& config);

/// Applies `key = value` with User provenance.
void set_field(RunConfig& config, const std::string& key, const std::string& value);

bool wants_figure(const RunConfig& config, int figure);

}  // namespace mutransfer
