#include "mutransfer/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mutransfer/error.hpp"
#include "mutransfer/parallel.hpp"
#include "mutransfer/sectors.hpp"

namespace mutransfer {

namespace fs = std::filesystem;

std::vector<double> ProbabilityScan::total() const {
  std::vector<double> t;
  for (const auto& r : results) t.push_back(r.total_transfer);
  return t;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string csv_header(const RunConfig& config, const std::string& what, const std::vector<std::string>& units) {
  std::string h = "# mutransfer " + std::string(code_version) + "\n# " + what + "\n# config_hash: " +
                  hex(config_hash(config)) + "\n";
  for (const auto& u : units) h += "# " + u + "\n";
  return h;
}

fs::path partial(const fs::path& p) { return fs::path(p.string() + ".partial"); }

Error stage_error(const std::string& stage, const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return Error(err->kind(), "stage " + stage + ": " + err->what());
  }
  return Error(ErrorKind::BlowUp, "stage " + stage + ": " + e.what());
}

}  // namespace

void write_atomic(const fs::path& file, const std::string& text) {
  if (!file.parent_path().empty()) fs::create_directories(file.parent_path());
  const fs::path tmp(file.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    os << text;
    os.flush();
    if (!os) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  fs::rename(tmp, file);
}

void write_curves_csv(const fs::path& file, const CurveTable& curves, const std::string& header) {
  std::ostringstream os;
  os << header << "rho";
  for (Eigen::Index j = 0; j < curves.energies.cols(); ++j) os << ",eps_" << (j + 1);
  os << "\n";
  for (std::size_t i = 0; i < curves.rho.size(); ++i) {
    os << num(curves.rho[i]);
    for (Eigen::Index j = 0; j < curves.energies.cols(); ++j)
      os << "," << num(units::to_eV(curves.energies(static_cast<Eigen::Index>(i), j)));
    os << "\n";
  }
  write_atomic(file, os.str());
}

ProbabilityScan run_multichannel(PotentialVariant variant, const RunConfig& config,
                                 const std::vector<double>& energy_eV) {
  const PotentialModel model(variant, default_masses());
  fs::path cache;
  if (config.cache != CachePolicy::Off) {
    cache = cache_directory(config);
    if (config.cache == CachePolicy::Refresh) {
      fs::remove(sector_cache_file(cache, sector_cache_key(model, config.n_L, config.n_channels, config.grid)));
    }
  }

  ProbabilityScan scan;
  scan.variant = variant;
  scan.energy_eV = energy_eV;
  const SectorSet set = load_or_build_sectors(model, config.n_L, config.n_channels, config.grid, cache,
                                              config.workers, &scan.sectors_from_cache);
  scan.n_sectors = set.sectors.size();
  const AsymptoticModel asym = build_asymptotic_model(model, set);
  scan.C2 = asym.C2;

  const std::uint64_t solves_before = surface_solve_count();
  const std::size_t batch = static_cast<std::size_t>(config.batch);
  const std::size_t n_batches = (energy_eV.size() + batch - 1) / batch;
  scan.results.resize(energy_eV.size());
  parallel_for(n_batches, config.workers, [&](std::size_t b) {
    const std::size_t lo = b * batch;
    const std::size_t hi = std::min(energy_eV.size(), lo + batch);
    std::vector<double> absolute;
    for (std::size_t i = lo; i < hi; ++i) {
      if (!(energy_eV[i] > 0.0)) throw Error(ErrorKind::Domain, "collision energy must be positive");
      absolute.push_back(asym.entrance_threshold + units::to_hartree(energy_eV[i]));
    }
    std::vector<PropagationState> states;
    try {
      states = propagate(absolute, set, config.propagator);
    } catch (const Error& e) {
      throw Error(e.kind(), "E=" + num(energy_eV[lo]) + ".." + num(energy_eV[hi - 1]) + " eV: " + e.what());
    }
    for (std::size_t i = lo; i < hi; ++i) {
      try {
        const ChannelTable table = build_channel_table(units::to_hartree(energy_eV[i]), asym);
        scan.results[i] = match_and_extract(states[i - lo], table, asym);
      } catch (const Error& e) {
        throw Error(e.kind(), "E=" + num(energy_eV[i]) + " eV: " + e.what());
      }
    }
  });
  scan.solves_during_propagation = surface_solve_count() - solves_before;
  for (const auto& r : scan.results) {
    scan.max_unitarity_defect = std::max(scan.max_unitarity_defect, r.unitarity_defect);
    scan.max_symmetry_defect = std::max(scan.max_symmetry_defect, r.symmetry_defect);
  }
  return scan;
}

ModelScan run_models(const RunConfig& config, const std::vector<double>& energy_eV, double P_max_coulomb,
                     double P_max_tf) {
  const MassSet masses = default_masses();
  const PotentialModel coulomb(PotentialVariant::Coulomb, masses);
  const PotentialModel tf(PotentialVariant::ThomasFermi, masses);
  ModelScan m;
  m.P_max_coulomb = P_max_coulomb;
  m.P_max_tf = P_max_tf;
  m.lz = extract_landau_zener(coulomb, config.n_L);
  m.R0 = transfer_radius(m.lz, masses);
  m.R0_tf = transfer_radius(extract_landau_zener(tf, config.n_L), masses);
  const auto c_spec = make_effective_potential(coulomb, m.R0, TailDimension::Colinear);
  const auto tf_spec = make_effective_potential(tf, m.R0_tf, TailDimension::Colinear);

  const std::size_t n = energy_eV.size();
  m.energy_eV = energy_eV;
  m.P_lz.resize(n);
  m.T2_coulomb.resize(n);
  m.T2_tf.resize(n);
  m.P_sim_tf.resize(n);
  m.P_3d.resize(n);
  parallel_for(n, config.workers, [&](std::size_t i) {
    const double E = units::to_hartree(energy_eV[i]);
    m.P_lz[i] = landau_zener_total(E, m.lz).total;
    const double tc = transmittance(E, c_spec).T;
    const double tt = transmittance(E, tf_spec).T;
    m.T2_coulomb[i] = tc * tc;
    m.T2_tf[i] = tt * tt;
    m.P_sim_tf[i] = factorized_probability(tt, P_max_tf);
    m.P_3d[i] = estimate_3d(E, coulomb, m.R0, P_max_coulomb);
  });
  return m;
}

namespace {

std::string plot_script(const std::string& csv, const std::string& title, const std::string& xlabel,
                        const std::string& ylabel, bool logx, bool logy, const std::string& plots) {
  std::ostringstream os;
  os << "# gnuplot\n"
     << "set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\n"
     << "set terminal pngcairo size 900,650\nset output '" << fs::path(csv).stem().string() << ".png'\n"
     << "set title '" << title << "'\nset xlabel '" << xlabel << "'\nset ylabel '" << ylabel << "'\n";
  if (logx) os << "set logscale x\nset format x '10^{%T}'\n";
  if (logy) os << "set logscale y\n";
  os << "plot " << plots << "\n";
  return os.str();
}

}  // namespace

RunManifest run_scan(const RunConfig& config, const std::function<void(const std::string&)>& log) {
  validate(config);
  auto say = [&](const std::string& s) {
    if (log) log(s);
  };
  const MassSet masses = default_masses();
  const fs::path out = config.output_dir;
  fs::create_directories(out);
  const fs::path manifest_file = out / "manifest.json";
  fs::remove(manifest_file);

  RunManifest man;
  man.config_hash = hex(config_hash(config));
  man.manifest_path = manifest_file;

  std::vector<OutputFile> pending;
  auto emit = [&](const std::string& role, int figure, const std::string& name, const std::string& text) {
    const fs::path final_path = out / name;
    write_atomic(partial(final_path), text);
    pending.push_back({role, figure, final_path});
  };
  auto stage = [&](const std::string& name, auto&& fn) {
    say("stage " + name);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (const std::exception& e) {
      throw stage_error(name, e);
    }
    man.timings.push_back({name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
  };
  auto selected = [&](PotentialVariant v) {
    for (auto p : config.potentials)
      if (p == v) return true;
    return false;
  };

  const std::vector<double> grid = config.energies.values();
  const bool fig6 = wants_figure(config, 6);
  const bool need_models = wants_figure(config, 5) || fig6;

  if (wants_figure(config, 1)) {
    stage("zeff", [&] {
      std::string s = csv_header(config, "Thomas-Fermi effective charge of the oxygen nucleus",
                                 {"d_a0: distance from the nucleus, electron bohr", "Z_eff: dimensionless"}) +
                      "d_a0,Z_eff\n";
      for (double d : geometric_edges(1e-4, 20.0, 199)) s += num(d) + "," + num(tf_effective_charge(d)) + "\n";
      emit("effective charge", 1, "zeff.csv", s);
      emit("plot script", 1, "fig1_zeff.gp",
           plot_script("zeff.csv", "Effective charge", "d (a0)", "Z*", true, false,
                       "'zeff.csv' using 1:2 with lines lw 2"));
    });
  }

  if (wants_figure(config, 2)) {
    const PotentialVariant v = selected(PotentialVariant::Coulomb) ? PotentialVariant::Coulomb : config.potentials.front();
    stage("curves", [&] {
      const PotentialModel model(v, masses);
      const auto rho = geometric_edges(config.curves_rho_lo, config.curves_rho_hi, config.curves_points - 1);
      const CurveTable curves = adiabatic_curve_scan(rho, config.n_L, model, config.curves_keep);
      const fs::path name = "curves.csv";
      write_curves_csv(partial(out / name), curves,
                       csv_header(config, "adiabatic surface energies, potential " + to_string(v),
                                  {"rho: mass-scaled hyperradius, electron bohr", "eps_j: adiabatic energy, eV"}));
      pending.push_back({"adiabatic curves", 2, out / name});
      std::string plots;
      for (int j = 0; j < config.curves_keep; ++j)
        plots += (j ? ", " : "") + std::string("'curves.csv' using 1:") + std::to_string(j + 2) + " with lines notitle";
      emit("plot script", 2, "fig2_curves.gp",
           plot_script("curves.csv", "Adiabatic energies", "rho (a0)", "E (eV)", true, false, plots));
    });
  }

  std::map<PotentialVariant, ProbabilityScan> scans;
  std::map<PotentialVariant, double> plateau;
  for (auto v : {PotentialVariant::Coulomb, PotentialVariant::ThomasFermi}) {
    const int figure = v == PotentialVariant::Coulomb ? 3 : 4;
    const bool want = selected(v) && (wants_figure(config, figure) || fig6);
    if (!want && !need_models) continue;
    const std::string tag = to_string(v);
    stage("prob_" + tag, [&] {
      std::vector<double> energies = want ? grid : std::vector<double>{};
      energies.push_back(config.plateau_energy_eV);
      ProbabilityScan scan = run_multichannel(v, config, energies);
      plateau[v] = scan.results.back().total_transfer;
      scan.results.pop_back();
      scan.energy_eV.pop_back();
      man.diagnostics["sectors_" + tag] = static_cast<double>(scan.n_sectors);
      man.diagnostics["sectors_from_cache_" + tag] = scan.sectors_from_cache ? 1.0 : 0.0;
      man.diagnostics["diagonalisations_during_propagation_" + tag] = static_cast<double>(scan.solves_during_propagation);
      man.diagnostics["C2_" + tag] = scan.C2;
      man.diagnostics["P_max_" + tag] = plateau[v];
      if (!want) return;
      double unit = 0.0, sym = 0.0;
      for (const auto& r : scan.results) {
        unit = std::max(unit, r.unitarity_defect);
        sym = std::max(sym, r.symmetry_defect);
      }
      man.diagnostics["max_unitarity_defect_" + tag] = unit;
      man.diagnostics["max_symmetry_defect_" + tag] = sym;
      if (unit > config.unitarity_tolerance || sym > config.unitarity_tolerance)
        man.notes.push_back(tag + ": unitarity/symmetry defect above tolerance (" + num(std::max(unit, sym)) + ")");
      if (wants_figure(config, figure)) {
        const std::string name = "prob_" + tag + ".csv";
        std::string s = csv_header(config, "multichannel transfer probabilities, potential " + tag,
                                   {"E_eV: collision energy above the p mu(1) + O threshold, eV",
                                    "P_*: transfer probabilities into mu O(n), dimensionless"}) +
                        "E_eV,P_n5,P_n6,P_total,unitarity_defect,symmetry_defect\n";
        for (std::size_t i = 0; i < scan.results.size(); ++i) {
          const auto& r = scan.results[i];
          s += num(scan.energy_eV[i]) + "," + num(r.probability({Arrangement::MuO, 5})) + "," +
               num(r.probability({Arrangement::MuO, 6})) + "," + num(r.total_transfer) + "," +
               num(r.unitarity_defect) + "," + num(r.symmetry_defect) + "\n";
        }
        emit("transfer probabilities " + tag, figure, name, s);
        emit("plot script", figure, "fig" + std::to_string(figure) + "_prob_" + tag + ".gp",
             plot_script(name, "Transfer probabilities (" + tag + ")", "E (eV)", "P", true, false,
                         "'" + name + "' using 1:2 with lines, '' using 1:3 with lines, '' using 1:4 with lines lw 2"));
      }
      scans[v] = std::move(scan);
    });
  }

  ModelScan models;
  if (need_models) {
    stage("models", [&] {
      models = run_models(config, grid, plateau.at(PotentialVariant::Coulomb), plateau.at(PotentialVariant::ThomasFermi));
      man.diagnostics["R0_coulomb"] = models.R0;
      man.diagnostics["R0_tf"] = models.R0_tf;
      man.diagnostics["lz_outer_rho"] = models.lz.outer.rho_c;
      man.diagnostics["lz_outer_H12_eV"] = units::to_eV(models.lz.outer.coupling);
      man.diagnostics["lz_outer_dF"] = models.lz.outer.slope_difference;
      man.diagnostics["lz_inner_rho"] = models.lz.inner.rho_c;
      man.diagnostics["lz_inner_H12_eV"] = units::to_eV(models.lz.inner.coupling);
      man.diagnostics["lz_inner_dF"] = models.lz.inner.slope_difference;
      if (!wants_figure(config, 5)) return;
      std::string s = csv_header(config, "reduced models",
                                 {"E_eV: collision energy, eV", "P_max_coulomb: " + num(models.P_max_coulomb),
                                  "P_max_tf: " + num(models.P_max_tf), "R0_coulomb_a0: " + num(models.R0),
                                  "R0_tf_a0: " + num(models.R0_tf), "all other columns dimensionless"}) +
                      "E_eV,P_LZ,T2_coulomb,T2_tf,P_sim_tf,P_3D\n";
      for (std::size_t i = 0; i < grid.size(); ++i)
        s += num(grid[i]) + "," + num(models.P_lz[i]) + "," + num(models.T2_coulomb[i]) + "," + num(models.T2_tf[i]) +
             "," + num(models.P_sim_tf[i]) + "," + num(models.P_3d[i]) + "\n";
      emit("reduced models", 5, "models.csv", s);
      emit("plot script", 5, "fig5_models.gp",
           plot_script("models.csv", "Reduced models", "E (eV)", "P", true, false,
                       "'models.csv' using 1:2 with lines, '' using 1:5 with lines, '' using 1:6 with lines lw 2"));
    });
  }

  if (fig6) {
    stage("rates", [&] {
      std::vector<RateCurve> curves;
      if (scans.count(PotentialVariant::Coulomb))
        curves.push_back(rate_scan(grid, scans[PotentialVariant::Coulomb].total(), RateSource::MultichannelCoulomb, masses));
      if (scans.count(PotentialVariant::ThomasFermi))
        curves.push_back(rate_scan(grid, scans[PotentialVariant::ThomasFermi].total(), RateSource::MultichannelTF, masses));
      curves.push_back(rate_scan(grid, models.P_3d, RateSource::Estimate3D, masses));
      curves.push_back(rate_scan(grid, models.P_lz, RateSource::LandauZener, masses));
      curves.push_back(unit_bound(grid, masses));
      std::string s = csv_header(config, "s-wave cross sections and transfer rates, liquid hydrogen density",
                                 {"E_eV: collision energy, eV", "sigma_cm2: cm^2", "lambda_per_s: 1/s",
                                  "s_wave_valid: E <= " + num(s_wave_limit_eV) + " eV"}) +
                      "E_eV,sigma_cm2,lambda_per_s,source,s_wave_valid\n";
      std::string plots;
      for (const auto& c : curves) {
        for (std::size_t i = 0; i < c.energy_eV.size(); ++i)
          s += num(c.energy_eV[i]) + "," + num(c.sigma_cm2[i]) + "," + num(c.lambda_per_s[i]) + "," + to_string(c.source) +
               "," + (c.s_wave_valid[i] ? "true" : "false") + "\n";
        plots += std::string(plots.empty() ? "" : ", ") + "'rates.csv' using 1:(strcol(4) eq '" + to_string(c.source) +
                 "' ? $3 : 1/0) with lines title '" + to_string(c.source) + "'";
      }
      emit("transfer rates", 6, "rates.csv", s);
      emit("plot script", 6, "fig6_rates.gp",
           plot_script("rates.csv", "Transfer rates", "E (eV)", "lambda (1/s)", true, true,
                       "[1e-3:10] " + plots));
    });
  }

  for (const auto& f : pending) fs::rename(partial(f.path), f.path);
  man.files = pending;

  nlohmann::json j;
  j["version"] = man.version;
  j["config_hash"] = man.config_hash;
  j["determinism"] = "fixed quadrature and step rules; energies propagated in fixed batches of " +
                     std::to_string(config.batch) + " in grid order; no worker-count dependent reductions";
  nlohmann::json cfg = nlohmann::json::object();
  std::istringstream in(serialize(config));
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find(" = ");
    const std::string key = line.substr(0, eq);
    const auto p = config.provenance.find(key);
    cfg[key] = {{"value", line.substr(eq + 3)},
                {"provenance", p == config.provenance.end() ? "engineering-default" : to_string(p->second)}};
  }
  j["config"] = cfg;
  j["cache_dir"] = config.cache == CachePolicy::Off ? std::string() : cache_directory(config).string();
  for (const auto& t : man.timings) j["timings_s"][t.stage] = t.seconds;
  j["diagnostics"] = man.diagnostics;
  j["notes"] = man.notes;
  for (const auto& f : man.files)
    j["files"].push_back({{"role", f.role}, {"figure", f.figure}, {"path", f.path.filename().string()}});
  write_atomic(manifest_file, j.dump(2) + "\n");
  return man;
}

std::vector<ConvergenceRow> convergence_report(const std::vector<int>& n_L, int reference,
                                               const std::vector<double>& rho, PotentialVariant variant,
                                               int compared, unsigned workers) {
  if (n_L.empty() || rho.empty()) throw Error(ErrorKind::InvalidInput, "empty convergence request");
  for (int n : n_L)
    if (n > reference || n < compared) throw Error(ErrorKind::InvalidInput, "n_L must lie in [compared, reference]");
  const PotentialModel model(variant, default_masses());

  auto solve = [&](double r, int n) {
    SectorBasis b = solve_surface_states(build_operator_matrices(r, n, model), compared);
    label_states(b);
    return b;
  };
  auto index_of = [](const SectorBasis& b, ChannelLabel l) {
    for (std::size_t i = 0; i < b.labels.size(); ++i)
      if (b.labels[i] == l) return static_cast<Eigen::Index>(i);
    return Eigen::Index(-1);
  };

  std::vector<SectorBasis> refs(rho.size());
  parallel_for(rho.size(), workers, [&](std::size_t i) { refs[i] = solve(rho[i], reference); });

  std::vector<ConvergenceRow> rows(n_L.size() * rho.size());
  parallel_for(rows.size(), workers, [&](std::size_t k) {
    const std::size_t a = k / rho.size(), i = k % rho.size();
    const SectorBasis& ref = refs[i];
    const SectorBasis b = n_L[a] == reference ? ref : solve(rho[i], n_L[a]);
    ConvergenceRow& row = rows[k];
    row.n_L = n_L[a];
    row.rho = rho[i];
    row.compared = static_cast<int>(std::min(ref.size(), b.size()));
    for (Eigen::Index s = 0; s < row.compared; ++s)
      if (std::abs(b.energies(s) - ref.energies(s)) <= 1e-8 * std::abs(ref.energies(s))) ++row.converged;
    auto err = [&](ChannelLabel l) {
      const auto ir = index_of(ref, l), ib = index_of(b, l);
      if (ir < 0 || ib < 0) return std::nan("");
      return std::abs(b.energies(ib) - ref.energies(ir)) / std::abs(ref.energies(ir));
    };
    row.err_pmu1 = err({Arrangement::PMu, 1});
    row.err_muO1 = err({Arrangement::MuO, 1});
  });
  return rows;
}

std::string format_convergence(const std::vector<ConvergenceRow>& rows) {
  std::string s = "n_L,rho,compared,converged_1e-8,err_pmu1,err_muO1\n";
  for (const auto& r : rows)
    s += std::to_string(r.n_L) + "," + num(r.rho) + "," + std::to_string(r.compared) + "," +
         std::to_string(r.converged) + "," + num(r.err_pmu1) + "," + num(r.err_muO1) + "\n";
  return s;
}

}  // namespace mutransfer
