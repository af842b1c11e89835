#pragma once

// End-to-end runs: sector bases -> propagation -> matching -> reduced models
// -> rates, with CSV output, plot scripts and a JSON manifest.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mutransfer/asymptotics.hpp"
#include "mutransfer/config.hpp"
#include "mutransfer/models.hpp"
#include "mutransfer/rates.hpp"

namespace mutransfer {

inline constexpr const char* code_version = "1.0.0";

/// Multichannel results for one potential on an energy grid.
struct ProbabilityScan {
  PotentialVariant variant = PotentialVariant::Coulomb;
  std::vector<double> energy_eV;
  std::vector<ScatteringResult> results;
  std::size_t n_sectors = 0;
  bool sectors_from_cache = false;
  /// Surface diagonalisations spent after the sectors were available.
  std::uint64_t solves_during_propagation = 0;
  double C2 = 0.0;
  double max_unitarity_defect = 0.0;
  double max_symmetry_defect = 0.0;

  std::vector<double> total() const;
};

/// Builds (or loads) the sectors and propagates every energy. Energies are
/// cut into consecutive batches of `config.batch` which run on the worker
/// pool, so results do not depend on the worker count.
ProbabilityScan run_multichannel(PotentialVariant variant, const RunConfig& config,
                                 const std::vector<double>& energy_eV);

/// Reduced-model curves on the config energy grid.
struct ModelScan {
  LandauZenerModel lz;
  double R0 = 0.0;
  double R0_tf = 0.0;
  double P_max_coulomb = 0.0;
  double P_max_tf = 0.0;
  std::vector<double> energy_eV;
  std::vector<double> P_lz;
  std::vector<double> T2_coulomb;
  std::vector<double> T2_tf;
  std::vector<double> P_sim_tf;
  std::vector<double> P_3d;
};

/// P_max values are the multichannel totals at config.plateau_energy_eV.
ModelScan run_models(const RunConfig& config, const std::vector<double>& energy_eV, double P_max_coulomb,
                     double P_max_tf);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct OutputFile {
  std::string role;
  int figure = 0;
  std::filesystem::path path;
};

struct RunManifest {
  std::string config_hash;
  std::string version = code_version;
  std::vector<StageTiming> timings;
  /// Scalar convergence diagnostics (unitarity, symmetry, C2, crossings ...).
  std::map<std::string, double> diagnostics;
  std::vector<std::string> notes;
  std::vector<OutputFile> files;
  std::filesystem::path manifest_path;
};

/// Runs the figures selected in `config`. Output files are written with a
/// `.partial` suffix and renamed once every stage has succeeded; manifest.json
/// is written last. On failure the files keep the suffix, no manifest exists
/// and the error names the stage (and energy).
RunManifest run_scan(const RunConfig& config, const std::function<void(const std::string&)>& log = {});

/// One line of the convergence table.
struct ConvergenceRow {
  int n_L = 0;
  double rho = 0.0;
  /// Lowest states compared against the reference.
  int compared = 0;
  /// States with relative error below 1e-8.
  int converged = 0;
  double err_pmu1 = 0.0;
  double err_muO1 = 0.0;
};

/// Surface energies at each rho for every n_L against n_L = reference;
/// `compared` lowest states per rho.
std::vector<ConvergenceRow> convergence_report(const std::vector<int>& n_L, int reference,
                                               const std::vector<double>& rho, PotentialVariant variant,
                                               int compared = 100, unsigned workers = 0);

/// CSV text of a convergence table.
std::string format_convergence(const std::vector<ConvergenceRow>& rows);

/// Adiabatic curves CSV (rho, eps_1..eps_K in eV).
void write_curves_csv(const std::filesystem::path& file, const CurveTable& curves, const std::string& header);

/// Writes `text` to `file` through a temporary and a rename.
void write_atomic(const std::filesystem::path& file, const std::string& text);

}  // namespace mutransfer
