#include "mutransfer/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "mutransfer/error.hpp"

namespace mutransfer {

std::string to_string(CachePolicy p) {
  switch (p) {
    case CachePolicy::Use: return "use";
    case CachePolicy::Refresh: return "refresh";
    case CachePolicy::Off: return "off";
  }
  return "?";
}

CachePolicy parse_cache_policy(const std::string& s) {
  if (s == "use") return CachePolicy::Use;
  if (s == "refresh") return CachePolicy::Refresh;
  if (s == "off") return CachePolicy::Off;
  throw Error(ErrorKind::Config, "cache policy must be use, refresh or off, got '" + s + "'");
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Paper: return "paper-default";
    case Provenance::Engineering: return "engineering-default";
    case Provenance::User: return "user";
  }
  return "?";
}

std::vector<double> EnergyGrid::values() const {
  if (points == 1) return {lo_eV};
  std::vector<double> e(static_cast<std::size_t>(points));
  const double a = std::log(lo_eV), b = std::log(hi_eV);
  for (int i = 0; i < points; ++i) e[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (points - 1));
  e.front() = lo_eV;
  e.back() = hi_eV;
  return e;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Shortest text that reads back to the same double.
std::string fmt(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d))
    throw Error(ErrorKind::Config, key + ": not a number: '" + v + "'");
  return d;
}

long to_long(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long d = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size()) throw Error(ErrorKind::Config, key + ": not an integer: '" + v + "'");
  return d;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(ErrorKind::Config, key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

struct Field {
  const char* key;
  Provenance source;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define MT_DOUBLE(KEY, SRC, MEMBER)                                                   \
  Field {                                                                             \
    KEY, SRC, [](const RunConfig& c) { return fmt(c.MEMBER); },                       \
        [](RunConfig& c, const std::string& v) { c.MEMBER = to_double(KEY, v); }      \
  }
#define MT_INT(KEY, SRC, MEMBER, TYPE)                                                \
  Field {                                                                             \
    KEY, SRC, [](const RunConfig& c) { return std::to_string(c.MEMBER); },            \
        [](RunConfig& c, const std::string& v) { c.MEMBER = static_cast<TYPE>(to_long(KEY, v)); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"potential", Provenance::Paper,
            [](const RunConfig& c) {
              if (c.potentials.size() == 2) return std::string("both");
              return c.potentials.empty() ? std::string("none") : to_string(c.potentials.front());
            },
            [](RunConfig& c, const std::string& v) {
              if (v == "both") {
                c.potentials = {PotentialVariant::Coulomb, PotentialVariant::ThomasFermi};
              } else {
                try {
                  c.potentials = {parse_potential_variant(v)};
                } catch (const Error& e) {
                  throw Error(ErrorKind::Config, std::string("potential: ") + e.what());
                }
              }
            }},
      MT_INT("basis.n_L", Provenance::Paper, n_L, int),
      MT_INT("channels.count", Provenance::Paper, n_channels, int),
      MT_DOUBLE("grid.rho_start", Provenance::Engineering, grid.rho_start),
      MT_DOUBLE("grid.rho_end", Provenance::Paper, grid.rho_end),
      MT_INT("grid.sectors", Provenance::Engineering, grid.n_sectors, int),
      MT_DOUBLE("grid.max_width", Provenance::Engineering, grid.max_width),
      MT_DOUBLE("grid.max_overlap_defect", Provenance::Engineering, grid.max_overlap_defect),
      MT_DOUBLE("grid.min_relative_width", Provenance::Engineering, grid.min_relative_width),
      MT_INT("grid.cheb_degree", Provenance::Engineering, grid.max_cheb_degree, int),
      MT_DOUBLE("grid.cheb_tolerance", Provenance::Engineering, grid.cheb_tolerance),
      MT_DOUBLE("energies.lo_eV", Provenance::Paper, energies.lo_eV),
      MT_DOUBLE("energies.hi_eV", Provenance::Paper, energies.hi_eV),
      MT_INT("energies.points", Provenance::Engineering, energies.points, int),
      MT_DOUBLE("propagate.steps_per_sector", Provenance::Engineering, propagator.steps_per_sector),
      MT_DOUBLE("propagate.steps_per_wavelength", Provenance::Engineering, propagator.steps_per_wavelength),
      MT_DOUBLE("propagate.stabilize_condition", Provenance::Engineering, propagator.stabilize_condition),
      MT_INT("propagate.check_interval", Provenance::Engineering, propagator.check_interval, int),
      Field{"propagate.stabilize", Provenance::Engineering,
            [](const RunConfig& c) { return std::string(c.propagator.stabilize ? "true" : "false"); },
            [](RunConfig& c, const std::string& v) { c.propagator.stabilize = to_bool("propagate.stabilize", v); }},
      MT_INT("propagate.batch", Provenance::Engineering, batch, int),
      MT_INT("workers", Provenance::Engineering, workers, unsigned),
      MT_DOUBLE("curves.rho_lo", Provenance::Engineering, curves_rho_lo),
      MT_DOUBLE("curves.rho_hi", Provenance::Engineering, curves_rho_hi),
      MT_INT("curves.points", Provenance::Engineering, curves_points, int),
      MT_INT("curves.keep", Provenance::Engineering, curves_keep, int),
      MT_DOUBLE("models.plateau_energy_eV", Provenance::Engineering, plateau_energy_eV),
      MT_DOUBLE("tolerance.unitarity", Provenance::Paper, unitarity_tolerance),
      Field{"output.dir", Provenance::Engineering, [](const RunConfig& c) { return c.output_dir.string(); },
            [](RunConfig& c, const std::string& v) {
              if (v.empty()) throw Error(ErrorKind::Config, "output.dir is empty");
              c.output_dir = v;
            }},
      Field{"cache.policy", Provenance::Engineering, [](const RunConfig& c) { return to_string(c.cache); },
            [](RunConfig& c, const std::string& v) { c.cache = parse_cache_policy(v); }},
      Field{"cache.dir", Provenance::Engineering, [](const RunConfig& c) { return c.cache_dir.string(); },
            [](RunConfig& c, const std::string& v) { c.cache_dir = v; }},
      Field{"figures", Provenance::Engineering,
            [](const RunConfig& c) {
              if (c.figures.empty()) return std::string("all");
              std::string s;
              for (int f : c.figures) s += (s.empty() ? "" : ",") + std::to_string(f);
              return s;
            },
            [](RunConfig& c, const std::string& v) {
              c.figures.clear();
              if (v == "all") return;
              for (const auto& f : split(v, ',')) c.figures.push_back(static_cast<int>(to_long("figures", f)));
            }},
  };
  return table;
}

#undef MT_DOUBLE
#undef MT_INT

const Field& find_field(const std::string& key) {
  for (const auto& f : fields())
    if (key == f.key) return f;
  throw Error(ErrorKind::Config, "unknown key '" + key + "'");
}

}  // namespace

EnergyGrid parse_energy_grid(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() != 3) throw Error(ErrorKind::Config, "energy grid must be LO:HI:N, got '" + s + "'");
  std::string n = parts[2];
  if (n.size() > 4 && n.substr(n.size() - 4) == "_LOG") n = n.substr(0, n.size() - 4);
  EnergyGrid g;
  g.lo_eV = to_double("energies", parts[0]);
  g.hi_eV = to_double("energies", parts[1]);
  g.points = static_cast<int>(to_long("energies", n));
  if (!(g.lo_eV > 0.0) || !(g.hi_eV >= g.lo_eV) || g.points < 1 || (g.points == 1 && g.hi_eV != g.lo_eV))
    throw Error(ErrorKind::Config, "energy grid needs 0 < LO <= HI and N >= 1: '" + s + "'");
  return g;
}

RunConfig default_config() {
  RunConfig c;
  for (const auto& f : fields()) c.provenance[f.key] = f.source;
  return c;
}

void set_field(RunConfig& config, const std::string& key, const std::string& value) {
  find_field(key).set(config, value);
  config.provenance[key] = Provenance::User;
}

RunConfig parse_config(const std::string& text) {
  RunConfig c = default_config();
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Config, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!seen.insert(key).second) throw Error(ErrorKind::Config, "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    set_field(c, key, trim(line.substr(eq + 1)));
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::Config, "cannot read config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(config) + "\n";
  return out;
}

std::uint64_t config_hash(const RunConfig& config) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : serialize(config)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::Config, m); };
  if (c.potentials.empty()) fail("no potential selected");
  if (c.n_L < 20) fail("basis.n_L must be at least 20");
  if (c.n_channels < 3 || c.n_channels > c.n_L) fail("channels.count must lie in [3, n_L]");
  if (!(c.grid.rho_start > 0.0) || !(c.grid.rho_end > c.grid.rho_start)) fail("grid needs 0 < rho_start < rho_end");
  if (c.grid.n_sectors < 1 || !(c.grid.max_width > 0.0)) fail("grid.sectors and grid.max_width must be positive");
  if (!(c.energies.lo_eV > 0.0) || !(c.energies.hi_eV >= c.energies.lo_eV) || c.energies.points < 1)
    fail("energy grid needs 0 < lo <= hi and points >= 1");
  if (!(c.propagator.steps_per_sector > 0.0) || !(c.propagator.steps_per_wavelength > 0.0) ||
      !(c.propagator.stabilize_condition > 1.0) || c.propagator.check_interval < 1)
    fail("invalid propagate.* settings");
  if (c.batch < 1) fail("propagate.batch must be at least 1");
  if (!(c.curves_rho_lo > 0.0) || !(c.curves_rho_hi > c.curves_rho_lo) || c.curves_points < 2 || c.curves_keep < 1 ||
      c.curves_keep > c.n_L)
    fail("invalid curves.* settings");
  if (!(c.plateau_energy_eV > 0.0)) fail("models.plateau_energy_eV must be positive");
  if (!(c.unitarity_tolerance > 0.0)) fail("tolerance.unitarity must be positive");
  for (int f : c.figures)
    if (f < 1 || f > 6) fail("figures must be in 1..6");
}

std::filesystem::path cache_directory(const RunConfig& config) {
  if (!config.cache_dir.empty()) return config.cache_dir;
  if (const char* env = std::getenv("MUTRANSFER_CACHE"); env != nullptr && *env != '\0') return env;
  return config.output_dir / "cache";
}

bool wants_figure(const RunConfig& config, int figure) {
  if (config.figures.empty()) return true;
  for (int f : config.figures)
    if (f == figure) return true;
  return false;
}

}  // namespace mutransfer
