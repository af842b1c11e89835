#include "mutransfer/surface_basis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "mutransfer/error.hpp"

namespace mutransfer {

LegendreSpectralGrid::LegendreSpectralGrid(int n_L, int quadrature_points) : n_L_(n_L) {
  if (n_L < 2) throw Error(ErrorKind::InvalidInput, "surface basis needs n_L >= 2");
  const int nq = quadrature_points > 0 ? quadrature_points : n_L + 16;
  if (nq < n_L + 2) {
    throw Error(ErrorKind::InvalidInput, "quadrature needs at least n_L + 2 points");
  }
  rule_ = gauss_legendre(static_cast<std::size_t>(nq));
  q_ = associated_legendre_table(rule_.x, n_L);

  Eigen::VectorXd g(nq);
  for (int k = 0; k < nq; ++k) {
    const double s = rule_.one_plus_x[k] * rule_.one_minus_x[k];
    g(k) = rule_.w[k] * s * s;
  }
  O_ = q_.transpose() * (q_.array().colwise() * g.array()).matrix();
  O_ = 0.5 * (O_ + O_.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(O_);
  const Eigen::VectorXd lam = eig.eigenvalues();
  o_min_ = lam.minCoeff();
  if (!(o_min_ > 1e-14 * lam.maxCoeff())) {
    throw Error(ErrorKind::Conditioning,
                "overlap matrix numerically singular (smallest eigenvalue " + std::to_string(o_min_) + ")");
  }
  O_inv_sqrt_ = eig.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal() *
                eig.eigenvectors().transpose();
}

Eigen::MatrixXd LegendreSpectralGrid::values_at_nodes(const Eigen::MatrixXd& coefficients) const {
  Eigen::VectorXd s(static_cast<Eigen::Index>(rule_.size()));
  for (Eigen::Index k = 0; k < s.size(); ++k) s(k) = rule_.one_plus_x[k] * rule_.one_minus_x[k];
  return s.asDiagonal() * (q_ * coefficients);
}

Eigen::VectorXd LegendreSpectralGrid::values_at(double one_plus_x, double one_minus_x,
                                                const Eigen::MatrixXd& coefficients) const {
  const double x = 0.5 * (one_plus_x - one_minus_x);
  const Eigen::VectorXd row = associated_legendre_row(x, n_L_);
  return (one_plus_x * one_minus_x) * (coefficients.transpose() * row);
}

std::shared_ptr<const LegendreSpectralGrid> LegendreSpectralGrid::shared(int n_L,
                                                                         int quadrature_points) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::weak_ptr<const LegendreSpectralGrid>> cache;
  const std::lock_guard lock(mutex);
  auto& slot = cache[{n_L, quadrature_points}];
  if (auto p = slot.lock()) return p;
  auto p = std::make_shared<const LegendreSpectralGrid>(n_L, quadrature_points);
  slot = p;
  return p;
}

Eigen::MatrixXd AngularOperatorMatrices::hamiltonian() const {
  Eigen::MatrixXd h = W;
  h.diagonal() -= kinetic_prefactor * D;
  return h;
}

AngularOperatorMatrices build_operator_matrices(double rho, int n_L, const PotentialModel& model) {
  return build_operator_matrices(rho, LegendreSpectralGrid::shared(n_L), model);
}

AngularOperatorMatrices build_operator_matrices(double rho,
                                                std::shared_ptr<const LegendreSpectralGrid> grid,
                                                const PotentialModel& model) {
  if (!(rho > 0.0)) throw Error(ErrorKind::InvalidInput, "surface problem needs rho > 0");
  const MassSet& m = model.masses();
  const int n_L = grid->n_L();
  const auto& rule = grid->rule();
  const auto nq = static_cast<Eigen::Index>(rule.size());
  const double shift = 1.0 / (8.0 * m.m_scaled * rho * rho);

  Eigen::VectorXd g(nq);
  for (Eigen::Index k = 0; k < nq; ++k) {
    const double s = rule.one_plus_x[k] * rule.one_minus_x[k];
    const double reg = model.regularized(rho, rule.one_plus_x[k], rule.one_minus_x[k]);
    if (!std::isfinite(reg)) {
      std::ostringstream os;
      os << "non-finite potential at x=" << rule.x[k] << ", rho=" << rho;
      throw Error(ErrorKind::Assembly, os.str());
    }
    g(k) = rule.w[k] * s * (reg - shift * s);
  }

  AngularOperatorMatrices mats;
  mats.n_L = n_L;
  mats.rho = rho;
  mats.kinetic_prefactor = 2.0 / (m.m_scaled * m.theta_mu * m.theta_mu * rho * rho);
  mats.D.resize(n_L);
  for (int n = 1; n <= n_L; ++n) mats.D(n - 1) = -static_cast<double>(n) * (n + 1);
  const auto& q = grid->q();
  mats.W = q.transpose() * (q.array().colwise() * g.array()).matrix();
  mats.W = 0.5 * (mats.W + mats.W.transpose());
  mats.O = grid->overlap();
  mats.grid = std::move(grid);
  return mats;
}

std::string to_string(const ChannelLabel& label) {
  switch (label.arrangement) {
    case Arrangement::PMu: return "pmu(" + std::to_string(label.n) + ")";
    case Arrangement::MuO: return "muO(" + std::to_string(label.n) + ")";
    case Arrangement::Unassigned: break;
  }
  return "unassigned";
}

namespace {
std::atomic<std::uint64_t> g_solves{0};
}

std::uint64_t surface_solve_count() { return g_solves.load(); }

SectorBasis solve_surface_states(const AngularOperatorMatrices& matrices, int n_keep) {
  ++g_solves;
  if (!matrices.grid) throw Error(ErrorKind::InvalidInput, "operator matrices carry no grid");
  const auto& grid = *matrices.grid;
  if (!(grid.overlap_min_eigenvalue() > 0.0)) {
    throw Error(ErrorKind::Conditioning, "overlap matrix not positive definite (smallest eigenvalue " +
                                             std::to_string(grid.overlap_min_eigenvalue()) + ")");
  }
  const Eigen::MatrixXd& s = grid.overlap_inv_sqrt();
  Eigen::MatrixXd reduced = s * matrices.hamiltonian() * s;
  reduced = 0.5 * (reduced + reduced.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(reduced);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorKind::Conditioning, "surface eigensolver failed at rho=" + std::to_string(matrices.rho));
  }
  const Eigen::Index total = eig.eigenvalues().size();
  const Eigen::Index keep = n_keep > 0 ? std::min<Eigen::Index>(n_keep, total) : total;

  SectorBasis basis;
  basis.rho = matrices.rho;
  basis.energies = eig.eigenvalues().head(keep);
  basis.coefficients = s * eig.eigenvectors().leftCols(keep);
  basis.grid = matrices.grid;

  // Deterministic sign: largest nodal value positive.
  const Eigen::MatrixXd values = grid.values_at_nodes(basis.coefficients);
  for (Eigen::Index j = 0; j < keep; ++j) {
    Eigen::Index arg = 0;
    values.col(j).cwiseAbs().maxCoeff(&arg);
    if (values(arg, j) < 0.0) basis.coefficients.col(j) *= -1.0;
  }
  return basis;
}

Eigen::VectorXd state_localisation(const SectorBasis& basis) {
  const auto& rule = basis.grid->rule();
  const Eigen::MatrixXd values = basis.grid->values_at_nodes(basis.coefficients);
  Eigen::VectorXd wx(static_cast<Eigen::Index>(rule.size()));
  for (Eigen::Index k = 0; k < wx.size(); ++k) wx(k) = rule.w[k] * rule.x[k];
  return (values.array().square().colwise() * wx.array()).colwise().sum().transpose();
}

void label_states(SectorBasis& basis) {
  const Eigen::VectorXd loc = state_localisation(basis);
  basis.labels.assign(static_cast<std::size_t>(basis.size()), {});
  int n_pmu = 0;
  int n_muo = 0;
  for (Eigen::Index i = 0; i < basis.size(); ++i) {
    auto& l = basis.labels[static_cast<std::size_t>(i)];
    if (loc(i) < 0.0) {
      l = {Arrangement::PMu, ++n_pmu};
    } else {
      l = {Arrangement::MuO, ++n_muo};
    }
  }
}

Eigen::MatrixXd sector_overlap(const SectorBasis& a, const SectorBasis& b) {
  if (!a.grid || !b.grid || a.grid->n_L() != b.grid->n_L()) {
    throw Error(ErrorKind::InvalidInput, "sector overlap needs bases of equal n_L");
  }
  return a.coefficients.transpose() * a.grid->overlap() * b.coefficients;
}

Eigen::VectorXd CurveTable::tracked(int j) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rho.size()));
  for (Eigen::Index k = 0; k < out.size(); ++k) out(k) = energies(k, track(k, j));
  return out;
}

int CurveTable::find(const ChannelLabel& label) const {
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (labels[j] == label) return static_cast<int>(j);
  }
  return -1;
}

CurveTable adiabatic_curve_scan(const std::vector<double>& rho_grid, int n_L,
                                const PotentialModel& model, int n_keep) {
  if (rho_grid.empty()) throw Error(ErrorKind::InvalidInput, "empty rho grid");
  for (std::size_t k = 0; k < rho_grid.size(); ++k) {
    if (!(rho_grid[k] > 0.0) || (k > 0 && !(rho_grid[k] > rho_grid[k - 1]))) {
      throw Error(ErrorKind::InvalidInput, "rho grid must be positive and increasing");
    }
  }
  if (n_keep < 1 || n_keep > n_L) throw Error(ErrorKind::InvalidInput, "n_keep must lie in [1, n_L]");
  const auto grid = LegendreSpectralGrid::shared(n_L);
  const int n_store = std::min(n_L, n_keep + std::max(4, n_keep / 4));
  const auto n_rho = static_cast<Eigen::Index>(rho_grid.size());

  CurveTable table;
  table.rho = rho_grid;
  table.energies.resize(n_rho, n_store);
  table.track.resize(n_rho, n_keep);

  std::vector<SectorBasis> bases(rho_grid.size());
  for (std::size_t k = 0; k < rho_grid.size(); ++k) {
    bases[k] = solve_surface_states(build_operator_matrices(rho_grid[k], grid, model), n_store);
    table.energies.row(static_cast<Eigen::Index>(k)) = bases[k].energies.transpose();
  }

  label_states(bases.back());
  table.labels.assign(bases.back().labels.begin(), bases.back().labels.begin() + n_keep);
  for (int j = 0; j < n_keep; ++j) table.track(n_rho - 1, j) = j;

  for (Eigen::Index k = n_rho - 2; k >= 0; --k) {
    const Eigen::MatrixXd t =
        sector_overlap(bases[static_cast<std::size_t>(k + 1)], bases[static_cast<std::size_t>(k)])
            .cwiseAbs();
    struct Candidate {
      double overlap;
      int label;
      int index;
    };
    std::vector<Candidate> cands;
    for (int j = 0; j < n_keep; ++j) {
      const int prev = table.track(k + 1, j);
      for (int i = 0; i < n_store; ++i) cands.push_back({t(prev, i), j, i});
    }
    std::sort(cands.begin(), cands.end(),
              [](const Candidate& a, const Candidate& b) { return a.overlap > b.overlap; });
    std::vector<bool> label_done(static_cast<std::size_t>(n_keep), false);
    std::vector<bool> index_used(static_cast<std::size_t>(n_store), false);
    for (const auto& c : cands) {
      if (label_done[static_cast<std::size_t>(c.label)] || index_used[static_cast<std::size_t>(c.index)]) {
        continue;
      }
      label_done[static_cast<std::size_t>(c.label)] = true;
      index_used[static_cast<std::size_t>(c.index)] = true;
      table.track(k, c.label) = c.index;
      if (c.overlap < 0.6) {
        std::ostringstream os;
        os << "rho=" << rho_grid[static_cast<std::size_t>(k)] << ": label "
           << to_string(table.labels[static_cast<std::size_t>(c.label)]) << " continued with overlap "
           << c.overlap;
        table.diagnostics.push_back(os.str());
      }
    }
  }
  return table;
}

AvoidedCrossing locate_avoided_crossing(const std::vector<double>& rho, const Eigen::VectorXd& e_i,
                                        const Eigen::VectorXd& e_j) {
  const auto n = static_cast<Eigen::Index>(rho.size());
  if (e_i.size() != n || e_j.size() != n) {
    throw Error(ErrorKind::InvalidInput, "curve lengths differ from the rho grid");
  }
  const Eigen::VectorXd gap = (e_i - e_j).cwiseAbs();
  Eigen::Index best = -1;
  for (Eigen::Index k = 1; k + 1 < n; ++k) {
    const bool local = gap(k) <= gap(k - 1) && gap(k) <= gap(k + 1) &&
                       (gap(k) < gap(k - 1) || gap(k) < gap(k + 1));
    if (local && (best < 0 || gap(k) < gap(best))) best = k;
  }
  if (best < 0) throw Error(ErrorKind::NotFound, "no avoided crossing in the window");

  // gap^2 = a (rho - rho_c)^2 + g0^2 through the three nearest points.
  const double x0 = rho[static_cast<std::size_t>(best - 1)];
  const double x1 = rho[static_cast<std::size_t>(best)];
  const double x2 = rho[static_cast<std::size_t>(best + 1)];
  const double y0 = gap(best - 1) * gap(best - 1);
  const double y1 = gap(best) * gap(best);
  const double y2 = gap(best + 1) * gap(best + 1);
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double a = (d12 - d01) / (x2 - x0);
  AvoidedCrossing out;
  if (a > 0.0) {
    const double b = d01 - a * (x0 + x1);
    const double rc = -b / (2.0 * a);
    const double g2 = y1 - a * (x1 - rc) * (x1 - rc);
    out.rho_c = std::clamp(rc, x0, x2);
    out.gap = g2 > 0.0 ? std::sqrt(g2) : gap(best);
    out.slope_difference = std::sqrt(a);
  } else {
    out.rho_c = x1;
    out.gap = gap(best);
    out.slope_difference = std::abs(gap(best + 1) - gap(best - 1)) / (x2 - x0);
  }
  return out;
}

AvoidedCrossing locate_avoided_crossing(const CurveTable& curves, int i, int j) {
  return locate_avoided_crossing(curves.rho, curves.tracked(i), curves.tracked(j));
}

}  // namespace mutransfer
