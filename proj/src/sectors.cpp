#include "mutransfer/sectors.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <Eigen/SVD>

#include "mutransfer/error.hpp"
#include "mutransfer/parallel.hpp"

namespace mutransfer {

namespace {

// Clenshaw sum of matrix Chebyshev series at t in [-1, 1].
Eigen::MatrixXd chebyshev_sum(const std::vector<Eigen::MatrixXd>& c, double t) {
  if (c.size() == 1) return c[0];
  Eigen::MatrixXd b1 = Eigen::MatrixXd::Zero(c[0].rows(), c[0].cols());
  Eigen::MatrixXd b2 = b1;
  for (std::size_t k = c.size() - 1; k >= 1; --k) {
    Eigen::MatrixXd b0 = 2.0 * t * b1 - b2 + c[k];
    b2 = std::move(b1);
    b1 = std::move(b0);
  }
  return t * b1 - b2 + c[0];
}

// <phi_i|V|phi_j> at rho for the coefficient columns C.
Eigen::MatrixXd potential_matrix(double rho, const LegendreSpectralGrid& grid,
                                 const Eigen::MatrixXd& C, const PotentialModel& model) {
  const auto& rule = grid.rule();
  const auto nq = static_cast<Eigen::Index>(rule.size());
  Eigen::VectorXd g(nq);
  for (Eigen::Index k = 0; k < nq; ++k) {
    const double s = rule.one_plus_x[k] * rule.one_minus_x[k];
    const double reg = model.regularized(rho, rule.one_plus_x[k], rule.one_minus_x[k]);
    if (!std::isfinite(reg)) throw Error(ErrorKind::Assembly, "non-finite potential in sector matrix");
    g(k) = rule.w[k] * s * reg;
  }
  const Eigen::MatrixXd G = grid.q() * C;
  Eigen::MatrixXd P = G.transpose() * g.asDiagonal() * G;
  return 0.5 * (P + P.transpose());
}

std::vector<Eigen::MatrixXd> fit_rho_potential(const Sector& s, const PotentialModel& model,
                                               const SectorGridSpec& spec) {
  const auto& grid = *s.basis.grid;
  const double mid = 0.5 * (s.lo + s.hi);
  const double half = 0.5 * (s.hi - s.lo);
  std::vector<Eigen::MatrixXd> best;
  for (int deg = 2; deg <= std::max(2, spec.max_cheb_degree); deg *= 2) {
    const int n = deg + 1;
    std::vector<Eigen::MatrixXd> vals;
    vals.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      const double t = std::cos(units::pi * (j + 0.5) / n);
      const double rho = mid + half * t;
      vals.push_back(rho * potential_matrix(rho, grid, s.basis.coefficients, model));
    }
    std::vector<Eigen::MatrixXd> c(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(vals[0].rows(), vals[0].cols());
      for (int j = 0; j < n; ++j) acc += std::cos(units::pi * k * (j + 0.5) / n) * vals[static_cast<std::size_t>(j)];
      c[static_cast<std::size_t>(k)] = (k == 0 ? 1.0 : 2.0) / n * acc;
    }
    // Drop negligible trailing terms (rho * V is constant for pure Coulomb).
    while (c.size() > 1 && c.back().cwiseAbs().maxCoeff() < 0.1 * spec.cheb_tolerance) c.pop_back();
    const double tail = c.size() > 1 ? c.back().cwiseAbs().maxCoeff() : 0.0;
    best = std::move(c);
    if (tail < spec.cheb_tolerance || static_cast<int>(best.size()) < n) break;
  }
  return best;
}

double overlap_defect(const Eigen::MatrixXd& t) {
  return (t.transpose() * t - Eigen::MatrixXd::Identity(t.cols(), t.cols())).norm();
}

}  // namespace

Eigen::MatrixXd Sector::rho_potential(double rho) const {
  const double t = std::clamp((2.0 * rho - lo - hi) / (hi - lo), -1.0, 1.0);
  return chebyshev_sum(rho_v_cheb, t);
}

Eigen::MatrixXd Sector::hamiltonian(double rho, double m_scaled) const {
  Eigen::MatrixXd h = A / (rho * rho) + rho_potential(rho) / rho;
  h.diagonal().array() -= 1.0 / (8.0 * m_scaled * rho * rho);
  return h;
}

std::vector<double> geometric_edges(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 1) {
    throw Error(ErrorKind::InvalidInput, "geometric grid needs 0 < lo < hi and n >= 1");
  }
  std::vector<double> e(static_cast<std::size_t>(n) + 1);
  const double r = std::log(hi / lo);
  for (int k = 0; k <= n; ++k) e[static_cast<std::size_t>(k)] = lo * std::exp(r * k / n);
  e.front() = lo;
  e.back() = hi;
  return e;
}

std::vector<double> sector_edges(const SectorGridSpec& spec) {
  const std::vector<double> g = geometric_edges(spec.rho_start, spec.rho_end, spec.n_sectors);
  if (!(spec.max_width > 0.0)) return g;
  std::vector<double> e{g.front()};
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    const double w = g[k + 1] - g[k];
    const int parts = std::max(1, static_cast<int>(std::ceil(w / spec.max_width - 1e-9)));
    for (int j = 1; j < parts; ++j) e.push_back(g[k] + w * j / parts);
    e.push_back(g[k + 1]);
  }
  return e;
}

Eigen::MatrixXd nearest_orthogonal(const Eigen::MatrixXd& t) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(t, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

std::uint64_t sector_cache_key(const PotentialModel& model, int n_L, int n_channels,
                               const SectorGridSpec& spec) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  const int variant = static_cast<int>(model.variant());
  const double z = model.Z();
  const MassSet& m = model.masses();
  const int version = 1;
  mix(&version, sizeof version);
  mix(&variant, sizeof variant);
  mix(&z, sizeof z);
  mix(&m.m_p, sizeof m.m_p);
  mix(&m.m_mu, sizeof m.m_mu);
  mix(&m.m_O, sizeof m.m_O);
  mix(&n_L, sizeof n_L);
  mix(&n_channels, sizeof n_channels);
  mix(&spec.rho_start, sizeof spec.rho_start);
  mix(&spec.rho_end, sizeof spec.rho_end);
  mix(&spec.n_sectors, sizeof spec.n_sectors);
  mix(&spec.max_width, sizeof spec.max_width);
  mix(&spec.max_overlap_defect, sizeof spec.max_overlap_defect);
  mix(&spec.min_relative_width, sizeof spec.min_relative_width);
  mix(&spec.max_cheb_degree, sizeof spec.max_cheb_degree);
  mix(&spec.cheb_tolerance, sizeof spec.cheb_tolerance);
  return h;
}

SectorSet build_sectors(const PotentialModel& model, int n_L, int n_channels,
                        const SectorGridSpec& spec, unsigned workers) {
  if (n_channels < 1 || n_channels > n_L) {
    throw Error(ErrorKind::InvalidInput, "channel count must lie in [1, n_L]");
  }
  const auto grid = LegendreSpectralGrid::shared(n_L);
  const MassSet& masses = model.masses();
  std::vector<double> edges = sector_edges(spec);

  std::map<double, SectorBasis> bases;
  auto ensure_bases = [&](const std::vector<double>& centers) {
    std::vector<double> todo;
    for (double c : centers) {
      if (!bases.count(c)) todo.push_back(c);
    }
    std::vector<SectorBasis> out(todo.size());
    parallel_for(todo.size(), workers, [&](std::size_t i) {
      out[i] = solve_surface_states(build_operator_matrices(todo[i], grid, model), n_channels);
    });
    for (std::size_t i = 0; i < todo.size(); ++i) bases.emplace(todo[i], std::move(out[i]));
  };
  auto centers_of = [](const std::vector<double>& e) {
    std::vector<double> c(e.size() - 1);
    for (std::size_t k = 0; k + 1 < e.size(); ++k) c[k] = 0.5 * (e[k] + e[k + 1]);
    return c;
  };

  SectorBasis final_basis = solve_surface_states(build_operator_matrices(spec.rho_end, grid, model),
                                                 n_channels);
  label_states(final_basis);

  SectorSet set;
  for (int pass = 0;; ++pass) {
    const auto centers = centers_of(edges);
    ensure_bases(centers);
    std::vector<bool> split(centers.size(), false);
    bool any = false;
    for (std::size_t k = 0; k + 1 < centers.size(); ++k) {
      const double d = overlap_defect(sector_overlap(bases.at(centers[k]), bases.at(centers[k + 1])));
      if (d <= spec.max_overlap_defect) continue;
      for (std::size_t j : {k, k + 1}) {
        if (edges[j + 1] - edges[j] > 2.0 * spec.min_relative_width * centers[j]) {
          split[j] = true;
          any = true;
        }
      }
    }
    if (!any || pass >= 12) break;
    std::vector<double> refined;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
      refined.push_back(edges[k]);
      if (split[k]) refined.push_back(0.5 * (edges[k] + edges[k + 1]));
    }
    refined.push_back(edges.back());
    edges = std::move(refined);
  }

  const auto centers = centers_of(edges);
  set.sectors.resize(centers.size());
  const double kin = 2.0 / (masses.m_scaled * masses.theta_mu * masses.theta_mu);
  Eigen::VectorXd nn(n_L);
  for (int n = 1; n <= n_L; ++n) nn(n - 1) = static_cast<double>(n) * (n + 1);

  parallel_for(centers.size(), workers, [&](std::size_t k) {
    Sector& s = set.sectors[k];
    s.lo = edges[k];
    s.hi = edges[k + 1];
    s.basis = bases.at(centers[k]);
    s.basis.half_width = 0.5 * (s.hi - s.lo);
    const Eigen::MatrixXd& C = s.basis.coefficients;
    s.A = kin * C.transpose() * nn.asDiagonal() * C;
    s.A = 0.5 * (s.A + s.A.transpose());
    s.rho_v_cheb = fit_rho_potential(s, model, spec);
    const SectorBasis& next = k + 1 < centers.size() ? bases.at(centers[k + 1]) : final_basis;
    const Eigen::MatrixXd t = sector_overlap(s.basis, next);
    s.overlap_defect = overlap_defect(t);
    s.to_next = nearest_orthogonal(t);
  });
  for (std::size_t k = 0; k < set.sectors.size(); ++k) {
    const Sector& s = set.sectors[k];
    if (s.overlap_defect > spec.max_overlap_defect) {
      std::ostringstream os;
      os << "overlap defect " << s.overlap_defect << " at rho=" << s.hi;
      set.diagnostics.push_back(os.str());
    }
  }

  set.variant = model.variant();
  set.n_L = n_L;
  set.n_channels = n_channels;
  set.m_scaled = masses.m_scaled;
  set.spec = spec;
  set.final_basis = std::move(final_basis);
  set.key = sector_cache_key(model, n_L, n_channels, spec);
  return set;
}

namespace {

constexpr char kMagic[8] = {'M', 'U', 'S', 'E', 'C', 'T', '0', '1'};

void put(std::ostream& os, const void* p, std::size_t n) { os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
template <class T>
void put(std::ostream& os, const T& v) { put(os, &v, sizeof v); }
void put(std::ostream& os, const Eigen::MatrixXd& m) {
  const std::int64_t r = m.rows(), c = m.cols();
  put(os, r);
  put(os, c);
  put(os, m.data(), sizeof(double) * static_cast<std::size_t>(r * c));
}

void get(std::istream& is, void* p, std::size_t n) {
  if (!is.read(static_cast<char*>(p), static_cast<std::streamsize>(n))) throw Error(ErrorKind::Io, "truncated sector cache");
}
template <class T>
T get(std::istream& is) {
  T v;
  get(is, &v, sizeof v);
  return v;
}
Eigen::MatrixXd get_matrix(std::istream& is) {
  const auto r = get<std::int64_t>(is), c = get<std::int64_t>(is);
  if (r < 0 || c < 0 || r > 100000 || c > 100000) throw Error(ErrorKind::Io, "corrupt sector cache");
  Eigen::MatrixXd m(r, c);
  get(is, m.data(), sizeof(double) * static_cast<std::size_t>(r * c));
  return m;
}

void put_basis(std::ostream& os, const SectorBasis& b) {
  put(os, b.rho);
  put(os, b.half_width);
  put(os, Eigen::MatrixXd(b.energies));
  put(os, b.coefficients);
  const std::int64_t nl = static_cast<std::int64_t>(b.labels.size());
  put(os, nl);
  for (const auto& l : b.labels) {
    put(os, static_cast<std::int32_t>(l.arrangement));
    put(os, static_cast<std::int32_t>(l.n));
  }
}

SectorBasis get_basis(std::istream& is, std::shared_ptr<const LegendreSpectralGrid> grid) {
  SectorBasis b;
  b.rho = get<double>(is);
  b.half_width = get<double>(is);
  b.energies = get_matrix(is).col(0);
  b.coefficients = get_matrix(is);
  const auto nl = get<std::int64_t>(is);
  if (nl < 0 || nl > 100000) throw Error(ErrorKind::Io, "corrupt sector cache");
  for (std::int64_t i = 0; i < nl; ++i) {
    const auto a = get<std::int32_t>(is);
    const auto n = get<std::int32_t>(is);
    b.labels.push_back({static_cast<Arrangement>(a), n});
  }
  b.grid = std::move(grid);
  return b;
}

}  // namespace

void save_sectors(const SectorSet& set, const std::filesystem::path& file) {
  std::filesystem::create_directories(file.parent_path().empty() ? "." : file.parent_path());
  const auto tmp = std::filesystem::path(file.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    put(os, kMagic, sizeof kMagic);
    put(os, set.key);
    put(os, static_cast<std::int32_t>(set.variant));
    put(os, static_cast<std::int32_t>(set.n_L));
    put(os, static_cast<std::int32_t>(set.n_channels));
    put(os, set.m_scaled);
    put(os, set.spec);
    put(os, static_cast<std::int64_t>(set.sectors.size()));
    for (const auto& s : set.sectors) {
      put(os, s.lo);
      put(os, s.hi);
      put(os, s.overlap_defect);
      put_basis(os, s.basis);
      put(os, s.A);
      put(os, static_cast<std::int64_t>(s.rho_v_cheb.size()));
      for (const auto& c : s.rho_v_cheb) put(os, c);
      put(os, s.to_next);
    }
    put_basis(os, set.final_basis);
    put(os, static_cast<std::int64_t>(set.diagnostics.size()));
    for (const auto& d : set.diagnostics) {
      put(os, static_cast<std::int64_t>(d.size()));
      put(os, d.data(), d.size());
    }
    if (!os) throw Error(ErrorKind::Io, "failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

SectorSet load_sectors(const std::filesystem::path& file, std::shared_ptr<const LegendreSpectralGrid> grid) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + file.string());
  char magic[sizeof kMagic];
  get(is, magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw Error(ErrorKind::Io, "not a sector cache: " + file.string());
  SectorSet set;
  set.key = get<std::uint64_t>(is);
  set.variant = static_cast<PotentialVariant>(get<std::int32_t>(is));
  set.n_L = get<std::int32_t>(is);
  set.n_channels = get<std::int32_t>(is);
  set.m_scaled = get<double>(is);
  set.spec = get<SectorGridSpec>(is);
  if (!grid || grid->n_L() != set.n_L) grid = LegendreSpectralGrid::shared(set.n_L);
  const auto ns = get<std::int64_t>(is);
  if (ns <= 0 || ns > 1000000) throw Error(ErrorKind::Io, "corrupt sector cache");
  set.sectors.resize(static_cast<std::size_t>(ns));
  for (auto& s : set.sectors) {
    s.lo = get<double>(is);
    s.hi = get<double>(is);
    s.overlap_defect = get<double>(is);
    s.basis = get_basis(is, grid);
    s.A = get_matrix(is);
    const auto nc = get<std::int64_t>(is);
    if (nc <= 0 || nc > 1000) throw Error(ErrorKind::Io, "corrupt sector cache");
    for (std::int64_t i = 0; i < nc; ++i) s.rho_v_cheb.push_back(get_matrix(is));
    s.to_next = get_matrix(is);
  }
  set.final_basis = get_basis(is, grid);
  const auto nd = get<std::int64_t>(is);
  if (nd < 0 || nd > 1000000) throw Error(ErrorKind::Io, "corrupt sector cache");
  for (std::int64_t i = 0; i < nd; ++i) {
    const auto len = get<std::int64_t>(is);
    if (len < 0 || len > 1 << 20) throw Error(ErrorKind::Io, "corrupt sector cache");
    std::string d(static_cast<std::size_t>(len), '\0');
    get(is, d.data(), d.size());
    set.diagnostics.push_back(std::move(d));
  }
  return set;
}

std::filesystem::path sector_cache_file(const std::filesystem::path& cache_dir, std::uint64_t key) {
  std::ostringstream name;
  name << "sectors-" << std::hex << key << ".bin";
  return cache_dir / name.str();
}

SectorSet load_or_build_sectors(const PotentialModel& model, int n_L, int n_channels,
                                const SectorGridSpec& spec, const std::filesystem::path& cache_dir,
                                unsigned workers, bool* from_cache) {
  if (from_cache) *from_cache = false;
  if (cache_dir.empty()) return build_sectors(model, n_L, n_channels, spec, workers);
  const std::uint64_t key = sector_cache_key(model, n_L, n_channels, spec);
  const auto file = sector_cache_file(cache_dir, key);
  if (std::filesystem::exists(file)) {
    try {
      SectorSet set = load_sectors(file);
      if (set.key == key) {
        if (from_cache) *from_cache = true;
        return set;
      }
    } catch (const Error&) {
      // Rebuild over a corrupt or stale cache file.
    }
  }
  SectorSet set = build_sectors(model, n_L, n_channels, spec, workers);
  save_sectors(set, file);
  return set;
}

}  // namespace mutransfer
