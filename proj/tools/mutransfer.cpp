// mutransfer: command line front end.
//
//   mutransfer run --config FILE [--figure N] [--potential coulomb|tf|both] [--energies LO:HI:N_LOG]
//   mutransfer converge --nl 150,250,350 --ref 450
//   mutransfer curves --rho 0.05:40:200_LOG
//   mutransfer defaults
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mutransfer/error.hpp"
#include "mutransfer/pipeline.hpp"
#include "mutransfer/sectors.hpp"

using namespace mutransfer;

namespace {

struct RhoGrid {
  double lo = 0.05, hi = 40.0;
  int n = 200;
  bool log = true;
};

RhoGrid parse_rho(const std::string& s) {
  RhoGrid g;
  const auto a = s.find(':'), b = s.find(':', a == std::string::npos ? a : a + 1);
  if (a == std::string::npos || b == std::string::npos) throw Error(ErrorKind::Config, "rho grid must be LO:HI:N[_LOG]");
  std::string n = s.substr(b + 1);
  g.log = n.size() > 4 && n.substr(n.size() - 4) == "_LOG";
  if (g.log) n.resize(n.size() - 4);
  try {
    g.lo = std::stod(s.substr(0, a));
    g.hi = std::stod(s.substr(a + 1, b - a - 1));
    g.n = std::stoi(n);
  } catch (const std::exception&) {
    throw Error(ErrorKind::Config, "rho grid must be LO:HI:N[_LOG], got '" + s + "'");
  }
  if (!(g.lo > 0.0) || !(g.hi > g.lo) || g.n < 2) throw Error(ErrorKind::Config, "rho grid needs 0 < LO < HI, N >= 2");
  return g;
}

int exit_code(const Error& e) {
  return e.kind() == ErrorKind::Config || e.kind() == ErrorKind::InvalidInput ? 1 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Colinear muon transfer (p mu) + O -> p + (mu O): close-coupling scans and reduced models"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "full figure pipeline");
  std::string config_file;
  std::vector<int> figures;
  std::string potential, energies, out_dir;
  std::vector<std::string> overrides;
  int run_nl = 0;
  unsigned run_workers = 0;
  bool quiet = false;
  run->add_option("--config", config_file, "key = value config file");
  run->add_option("--figure", figures, "figure(s) to produce, 1..6")->check(CLI::Range(1, 6));
  run->add_option("--potential", potential, "coulomb, tf or both");
  run->add_option("--energies", energies, "LO:HI:NPTS_LOG in eV");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--nl", run_nl, "Legendre basis size");
  run->add_option("--workers", run_workers, "worker threads (0: all cores)");
  run->add_option("--set", overrides, "extra key=value settings");
  run->add_flag("-q,--quiet", quiet, "no progress lines");

  auto* conv = app.add_subcommand("converge", "surface-state convergence table");
  std::string nl_list = "150,250,350", conv_rho = "1,5,10,20,40", conv_pot = "coulomb";
  int ref = 450, compared = 100;
  unsigned conv_workers = 0;
  conv->add_option("--nl", nl_list, "comma separated n_L values");
  conv->add_option("--ref", ref, "reference n_L");
  conv->add_option("--rho", conv_rho, "comma separated hyperradii");
  conv->add_option("--compared", compared, "lowest states compared");
  conv->add_option("--potential", conv_pot, "coulomb or tf");
  conv->add_option("--workers", conv_workers, "worker threads");

  auto* curves = app.add_subcommand("curves", "adiabatic energy curves as CSV");
  std::string rho_spec = "0.05:40:200_LOG", curves_pot = "coulomb", curves_out;
  int curves_nl = 350, keep = 14;
  curves->add_option("--rho", rho_spec, "LO:HI:N[_LOG]");
  curves->add_option("--nl", curves_nl, "Legendre basis size");
  curves->add_option("--keep", keep, "curves kept");
  curves->add_option("--potential", curves_pot, "coulomb or tf");
  curves->add_option("-o,--out", curves_out, "output file (default stdout)");

  app.add_subcommand("defaults", "print the default configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand("defaults")) {
      std::cout << serialize(default_config());
      return 0;
    }
    if (run->parsed()) {
      RunConfig config = config_file.empty() ? default_config() : load_config(config_file);
      if (!potential.empty()) set_field(config, "potential", potential);
      if (!energies.empty()) {
        const EnergyGrid g = parse_energy_grid(energies);
        config.energies = g;
        for (const char* k : {"energies.lo_eV", "energies.hi_eV", "energies.points"}) config.provenance[k] = Provenance::User;
      }
      if (!out_dir.empty()) set_field(config, "output.dir", out_dir);
      if (run_nl > 0) set_field(config, "basis.n_L", std::to_string(run_nl));
      if (run->count("--workers")) set_field(config, "workers", std::to_string(run_workers));
      if (!figures.empty()) {
        std::string f;
        for (int x : figures) f += (f.empty() ? "" : ",") + std::to_string(x);
        set_field(config, "figures", f);
      }
      for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::Config, "--set expects key=value, got '" + kv + "'");
        set_field(config, kv.substr(0, eq), kv.substr(eq + 1));
      }
      validate(config);
      const RunManifest m = run_scan(config, [quiet](const std::string& s) {
        if (!quiet) std::cerr << "[mutransfer] " << s << std::endl;
      });
      for (const auto& f : m.files) std::cout << f.path.string() << "\n";
      std::cout << m.manifest_path.string() << "\n";
      for (const auto& n : m.notes) std::cerr << "[mutransfer] note: " << n << "\n";
      return 0;
    }
    if (conv->parsed()) {
      std::vector<int> nl;
      std::vector<double> rho;
      std::stringstream a(nl_list), b(conv_rho);
      try {
        for (std::string t; std::getline(a, t, ',');) nl.push_back(std::stoi(t));
        for (std::string t; std::getline(b, t, ',');) rho.push_back(std::stod(t));
      } catch (const std::exception&) {
        throw Error(ErrorKind::Config, "--nl and --rho take comma separated numbers");
      }
      const auto rows = convergence_report(nl, ref, rho, parse_potential_variant(conv_pot), compared, conv_workers);
      std::cout << format_convergence(rows);
      return 0;
    }
    if (curves->parsed()) {
      const RhoGrid g = parse_rho(rho_spec);
      std::vector<double> rho;
      if (g.log) {
        rho = geometric_edges(g.lo, g.hi, g.n - 1);
      } else {
        for (int i = 0; i < g.n; ++i) rho.push_back(g.lo + (g.hi - g.lo) * i / (g.n - 1));
      }
      const PotentialVariant v = parse_potential_variant(curves_pot);
      const CurveTable t = adiabatic_curve_scan(rho, curves_nl, PotentialModel(v, default_masses()), keep);
      const std::string header = "# adiabatic surface energies, potential " + to_string(v) +
                                 "\n# rho: mass-scaled hyperradius, electron bohr\n# eps_j: eV\n";
      if (curves_out.empty()) {
        std::cout << header << "rho";
        for (int j = 0; j < keep; ++j) std::cout << ",eps_" << (j + 1);
        std::cout << "\n";
        std::cout.precision(12);
        for (std::size_t i = 0; i < t.rho.size(); ++i) {
          std::cout << t.rho[i];
          for (int j = 0; j < keep; ++j) std::cout << ',' << units::to_eV(t.energies(static_cast<Eigen::Index>(i), j));
          std::cout << '\n';
        }
      } else {
        write_curves_csv(curves_out, t, header);
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "mutransfer: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "mutransfer: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
