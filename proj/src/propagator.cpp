#include "mutransfer/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mutransfer/error.hpp"

namespace mutransfer {

namespace {

void check_finite(const Eigen::MatrixXd& m, double rho) {
  if (!m.allFinite()) {
    std::ostringstream os;
    os << "non-finite solution at rho=" << rho;
    throw Error(ErrorKind::BlowUp, os.str());
  }
}

}  // namespace

ApplyFn apply_from(CouplingFn U) {
  return [U = std::move(U)](double rho, const Eigen::MatrixXd& y) -> Eigen::MatrixXd { return U(rho) * y; };
}

void de_vogelaere_start(DeVogelaereState& s, const ApplyFn& apply, double h) {
  s.f = apply(s.rho, s.y);
  const Eigen::MatrixXd back = s.y - 0.5 * h * s.dy + (h * h / 8.0) * s.f;
  s.f_half_back = apply(s.rho - 0.5 * h, back);
}

void de_vogelaere_step(DeVogelaereState& s, const ApplyFn& apply, double h) {
  const double h2 = h * h;
  const Eigen::MatrixXd y_half = s.y + 0.5 * h * s.dy + (h2 / 24.0) * (4.0 * s.f - s.f_half_back);
  Eigen::MatrixXd f_half = apply(s.rho + 0.5 * h, y_half);
  s.y += h * s.dy + (h2 / 6.0) * (s.f + 2.0 * f_half);
  Eigen::MatrixXd f_next = apply(s.rho + h, s.y);
  s.dy += (h / 6.0) * (s.f + 4.0 * f_half + f_next);
  s.rho += h;
  s.f = std::move(f_next);
  s.f_half_back = std::move(f_half);
  check_finite(s.y, s.rho);
}

namespace {

Eigen::MatrixXd arrangement_mask(const Eigen::VectorXi& a, const Eigen::VectorXi& b) {
  Eigen::MatrixXd mask(a.size(), b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    for (Eigen::Index j = 0; j < b.size(); ++j) mask(i, j) = a(i) == b(j) ? 1.0 : 0.0;
  }
  return mask;
}

// 1 for the n_pmu states most localised on the pmu side, 0 otherwise. A fixed
// count keeps both blocks of the boundary overlap square; sign-of-<x> labels
// fluctuate at small rho and the polar factor would then mix arrangements.
Eigen::VectorXi arrangement_groups(const SectorBasis& basis, Eigen::Index n_pmu) {
  const Eigen::VectorXd loc = state_localisation(basis);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(loc.size()));
  for (Eigen::Index i = 0; i < loc.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return loc(a) < loc(b); });
  Eigen::VectorXi g = Eigen::VectorXi::Zero(loc.size());
  for (Eigen::Index i = 0; i < n_pmu; ++i) g(order[static_cast<std::size_t>(i)]) = 1;
  return g;
}

}  // namespace

std::vector<PropagationState> propagate(const std::vector<double>& energies, const SectorSet& set,
                                        const PropagatorOptions& opt) {
  if (energies.empty()) return {};
  if (set.sectors.empty()) throw Error(ErrorKind::InvalidInput, "no sectors");
  const Eigen::Index n = set.sectors.front().size();
  for (const auto& s : set.sectors) {
    if (s.size() != n) throw Error(ErrorKind::ChannelMismatch, "sectors carry different channel counts");
  }
  if (set.final_basis.size() != n) throw Error(ErrorKind::ChannelMismatch, "final basis channel count differs");
  for (double e : energies) {
    if (!std::isfinite(e)) throw Error(ErrorKind::InvalidInput, "non-finite energy");
  }
  if (!(opt.steps_per_sector > 0.0) || !(opt.steps_per_wavelength > 0.0) || opt.check_interval < 1) {
    throw Error(ErrorKind::InvalidInput, "invalid propagator step options");
  }

  const auto ne = static_cast<Eigen::Index>(energies.size());
  const double m = set.m_scaled;
  const double two_m = 2.0 * m;

  DeVogelaereState st;
  st.rho = set.rho_start();
  st.y = Eigen::MatrixXd::Zero(n, n * ne);
  st.dy.resize(n, n * ne);
  for (Eigen::Index j = 0; j < ne; ++j) st.dy.middleCols(j * n, n).setIdentity();

  std::vector<PropagationState> out(energies.size());
  for (std::size_t j = 0; j < energies.size(); ++j) out[j].energy = energies[j];

  // Right-multiplies every stored solution block by R^{-1} where F = QR.
  auto stabilize = [&](bool force) {
    for (Eigen::Index j = 0; j < ne; ++j) {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(st.y.middleCols(j * n, n));
      const Eigen::VectorXd d = qr.matrixQR().diagonal().cwiseAbs();
      const double cond = d.maxCoeff() / std::max(d.minCoeff(), 1e-300);
      auto& o = out[static_cast<std::size_t>(j)];
      if (!force && cond <= opt.stabilize_condition) continue;
      if (!(d.minCoeff() > 0.0)) continue;
      const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
      auto right_solve = [&](Eigen::MatrixXd& m_all) {
        auto blk = m_all.middleCols(j * n, n);
        const Eigen::MatrixXd t =
            R.transpose().triangularView<Eigen::Lower>().solve(Eigen::MatrixXd(blk.transpose()));
        blk = t.transpose();
      };
      right_solve(st.y);
      right_solve(st.dy);
      if (st.f.size()) right_solve(st.f);
      if (st.f_half_back.size()) right_solve(st.f_half_back);
      o.max_condition = std::max(o.max_condition, cond);
      o.stabilizations.push_back({st.rho, cond});
    }
  };

  const Eigen::Index n_pmu = opt.decouple_arrangements ? (state_localisation(set.final_basis).array() < 0.0).count() : 0;
  long steps = 0;
  for (std::size_t k = 0; k < set.sectors.size(); ++k) {
    const Sector& sec = set.sectors[k];
    Eigen::MatrixXd mask;
    Eigen::VectorXi groups;
    if (opt.decouple_arrangements) {
      groups = arrangement_groups(sec.basis, n_pmu);
      mask = arrangement_mask(groups, groups);
    }
    const ApplyFn apply = [&](double rho, const Eigen::MatrixXd& y) -> Eigen::MatrixXd {
      Eigen::MatrixXd u0 = two_m * sec.hamiltonian(rho, m);
      if (mask.size()) u0 = u0.cwiseProduct(mask);
      Eigen::MatrixXd r = u0 * y;
      for (Eigen::Index j = 0; j < ne; ++j) r.middleCols(j * n, n) -= (two_m * energies[static_cast<std::size_t>(j)]) * y.middleCols(j * n, n);
      return r;
    };

    // Step from the fastest local oscillation or decay in the sector.
    double u_max = 0.0;
    for (double rho : {sec.lo, sec.center(), sec.hi}) {
      const Eigen::MatrixXd h = sec.hamiltonian(rho, m);
      for (double e : energies) u_max = std::max(u_max, two_m * (h.diagonal().array() - e).abs().maxCoeff());
    }
    const double width = sec.hi - sec.lo;
    double h = width / opt.steps_per_sector;
    if (u_max > 0.0) h = std::min(h, 2.0 * units::pi / std::sqrt(u_max) / opt.steps_per_wavelength);
    const auto n_steps = static_cast<long>(std::ceil(width / h - 1e-9));
    h = width / static_cast<double>(n_steps);

    st.rho = sec.lo;
    de_vogelaere_start(st, apply, h);
    for (long i = 0; i < n_steps; ++i) {
      de_vogelaere_step(st, apply, h);
      ++steps;
      if (opt.stabilize && (i + 1) % opt.check_interval == 0) stabilize(false);
    }
    st.rho = sec.hi;
    if (opt.stabilize) stabilize(false);

    // Into the next sector basis (or the final adiabatic basis).
    Eigen::MatrixXd T = sec.to_next;
    if (opt.decouple_arrangements) {
      const SectorBasis& next = k + 1 < set.sectors.size() ? set.sectors[k + 1].basis : set.final_basis;
      T = nearest_orthogonal(
          sector_overlap(sec.basis, next).cwiseProduct(arrangement_mask(groups, arrangement_groups(next, n_pmu))));
    }
    st.y = T.transpose() * st.y;
    st.dy = T.transpose() * st.dy;
    st.f.resize(0, 0);
    st.f_half_back.resize(0, 0);
  }
  if (opt.stabilize) stabilize(true);

  for (Eigen::Index j = 0; j < ne; ++j) {
    auto& o = out[static_cast<std::size_t>(j)];
    o.rho = set.rho_end();
    o.F = st.y.middleCols(j * n, n);
    o.Fp = st.dy.middleCols(j * n, n);
    o.steps = steps;
    const Eigen::MatrixXd w = o.F.transpose() * o.Fp - o.Fp.transpose() * o.F;
    o.wronskian_defect = w.norm() / std::max(o.F.norm() * o.Fp.norm(), 1e-300);
  }
  return out;
}

PropagationState propagate(double energy, const SectorSet& sectors, const PropagatorOptions& options) {
  return propagate(std::vector<double>{energy}, sectors, options).front();
}

Eigen::MatrixXd log_derivative(const PropagationState& state) {
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(state.F.transpose());
  Eigen::MatrixXd y = lu.solve(state.Fp.transpose()).transpose();
  return 0.5 * (y + y.transpose());
}

}  // namespace mutransfer
