#include "mutransfer/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <sstream>

#include "mutransfer/error.hpp"

namespace mutransfer {

double FragmentSpectrum::wavefunction(int n, double r) const {
  if (n < 0 || n >= energies.size()) throw Error(ErrorKind::InvalidInput, "fragment level out of range");
  if (r <= 0.0 || r >= box) return 0.0;
  const double opx = 2.0 * r / box;
  const double omx = 2.0 - opx;
  const Eigen::VectorXd v = grid->values_at(opx, omx, coefficients.col(n));
  return v(0) * std::sqrt(2.0 / box);
}

namespace {

FragmentSpectrum solve_fragment_box(const std::function<double(double)>& charge, double mu, double L,
                                    int n_levels, int n_L) {
  const auto grid = LegendreSpectralGrid::shared(n_L);
  const auto& rule = grid->rule();
  const auto nq = static_cast<Eigen::Index>(rule.size());
  Eigen::VectorXd g(nq);
  for (Eigen::Index k = 0; k < nq; ++k) {
    const double s = rule.one_plus_x[k] * rule.one_minus_x[k];
    const double r = 0.5 * L * rule.one_plus_x[k];
    // (1 - x^2) V with V = -Z*(r)/r and r = L (1 + x) / 2.
    const double reg = -2.0 * rule.one_minus_x[k] * charge(r) / L;
    g(k) = rule.w[k] * s * reg;
  }
  AngularOperatorMatrices mats;
  mats.n_L = n_L;
  mats.rho = L;
  mats.kinetic_prefactor = 2.0 / (mu * L * L);
  mats.D.resize(n_L);
  for (int n = 1; n <= n_L; ++n) mats.D(n - 1) = -static_cast<double>(n) * (n + 1);
  mats.W = grid->q().transpose() * g.asDiagonal() * grid->q();
  mats.W = 0.5 * (mats.W + mats.W.transpose());
  mats.O = grid->overlap();
  mats.grid = grid;
  SectorBasis b = solve_surface_states(mats, n_levels);
  FragmentSpectrum f;
  f.reduced_mass = mu;
  f.box = L;
  f.energies = b.energies;
  f.coefficients = b.coefficients;
  f.grid = grid;
  return f;
}

}  // namespace

FragmentSpectrum solve_fragment(const std::function<double(double)>& charge, double Z_asymptotic,
                                double reduced_mass, int n_levels, int n_L) {
  if (!(reduced_mass > 0.0) || n_levels < 1 || !(Z_asymptotic > 0.0)) {
    throw Error(ErrorKind::InvalidInput, "fragment solver needs positive mass, charge and level count");
  }
  const double a = 1.0 / (Z_asymptotic * reduced_mass);
  double L = (6.0 * n_levels * n_levels + 20.0) * a;
  FragmentSpectrum f = solve_fragment_box(charge, reduced_mass, L, n_levels, n_L);
  // Grow the box until the highest level no longer feels the wall.
  for (int i = 0; i < 8; ++i) {
    FragmentSpectrum big = solve_fragment_box(charge, reduced_mass, 1.5 * L, n_levels, n_L);
    const double e = f.energies(n_levels - 1);
    const double e_big = big.energies(n_levels - 1);
    f = std::move(big);
    L *= 1.5;
    if (std::abs(e_big - e) <= 1e-11 * std::abs(e_big)) break;
  }
  return f;
}

std::vector<double> fragment_thresholds(const PotentialModel& model, Arrangement arrangement, int n_max) {
  if (n_max < 1) return {};
  const MassSet& m = model.masses();
  std::vector<double> out(static_cast<std::size_t>(n_max));
  if (arrangement == Arrangement::PMu) {
    for (int n = 1; n <= n_max; ++n) out[static_cast<std::size_t>(n - 1)] = hydrogenic_energy(1.0, m.m_p_mu, n);
    return out;
  }
  if (arrangement != Arrangement::MuO) throw Error(ErrorKind::InvalidInput, "unassigned arrangement");
  if (model.variant() == PotentialVariant::Coulomb) {
    for (int n = 1; n <= n_max; ++n) out[static_cast<std::size_t>(n - 1)] = hydrogenic_energy(model.Z(), m.m_mu_O, n);
    return out;
  }
  const FragmentSpectrum f =
      solve_fragment([&model](double r) { return model.effective_charge(r); }, model.Z(), m.m_mu_O, n_max);
  for (int n = 0; n < n_max; ++n) out[static_cast<std::size_t>(n)] = f.energies(n);
  return out;
}

namespace {

double entrance_first_order(const PotentialModel& model, double rho) {
  static const GaussLegendreRule rule = gauss_legendre(160);
  const MassSet& m = model.masses();
  const double a = 1.0 / m.m_p_mu;
  const double t_max = 36.0;
  const double rs = entrance_r_scale(m);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double t = 0.5 * t_max * rule.one_plus_x[k];
    const double w = 0.5 * t_max * rule.w[k] * 4.0 * t * t * std::exp(-2.0 * t);
    sum += w * model.entrance_interaction(rho, t * a * rs);
  }
  return sum;
}

int find_label(const std::vector<ChannelLabel>& labels, const ChannelLabel& l) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == l) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

AsymptoticModel build_asymptotic_model(const PotentialModel& model, const SectorSet& sectors) {
  AsymptoticModel a;
  a.variant = model.variant();
  a.masses = model.masses();
  a.rho_end = sectors.rho_end();
  a.m_scaled = a.masses.m_scaled;
  a.labels = sectors.final_basis.labels;
  a.local_energies = sectors.final_basis.energies;
  a.entrance = find_label(a.labels, {Arrangement::PMu, 1});
  if (a.entrance < 0) throw Error(ErrorKind::ChannelMismatch, "entrance channel pmu(1) not in the final basis");
  a.entrance_threshold = hydrogenic_energy(1.0, a.masses.m_p_mu, 1);

  int n_pmu = 0, n_muo = 0;
  for (const auto& l : a.labels) {
    if (l.arrangement == Arrangement::PMu) n_pmu = std::max(n_pmu, l.n);
    if (l.arrangement == Arrangement::MuO) n_muo = std::max(n_muo, l.n);
  }
  const auto thr_pmu = fragment_thresholds(model, Arrangement::PMu, n_pmu);
  const auto thr_muo = fragment_thresholds(model, Arrangement::MuO, n_muo);
  a.thresholds.resize(static_cast<Eigen::Index>(a.labels.size()));
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    const auto& l = a.labels[i];
    a.thresholds(static_cast<Eigen::Index>(i)) = l.arrangement == Arrangement::PMu
                                                     ? thr_pmu[static_cast<std::size_t>(l.n - 1)]
                                                     : thr_muo[static_cast<std::size_t>(l.n - 1)];
  }

  // Entrance curve samples approaching rho_end.
  const int n_keep = sectors.n_channels + 8;
  const auto grid = LegendreSpectralGrid::shared(sectors.n_L);
  for (int j = 4; j >= 0; --j) {
    const double rho = a.rho_end * (1.0 - 0.05 * j);
    SectorBasis b = solve_surface_states(build_operator_matrices(rho, grid, model), n_keep);
    label_states(b);
    const int i = find_label(b.labels, {Arrangement::PMu, 1});
    if (i < 0) throw Error(ErrorKind::ChannelMismatch, "entrance channel lost near rho_end");
    a.fit_rho.push_back(rho);
    a.fit_values.push_back(rho * rho * (b.energies(i) - a.entrance_threshold));
  }
  const double eps_end = a.local_energies(a.entrance);
  const double rho2 = a.rho_end * a.rho_end;
  if (a.variant == PotentialVariant::Coulomb) {
    // rho^2 (eps - thr) = -C2 - C3 / rho by least squares.
    Eigen::MatrixXd X(static_cast<Eigen::Index>(a.fit_rho.size()), 2);
    Eigen::VectorXd y(X.rows());
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
      X(j, 0) = 1.0;
      X(j, 1) = 1.0 / a.fit_rho[static_cast<std::size_t>(j)];
      y(j) = a.fit_values[static_cast<std::size_t>(j)];
    }
    const Eigen::Vector2d c = X.colPivHouseholderQr().solve(y);
    a.C2 = -c(0);
    a.C3 = -c(1);
    a.g = 2.0 * a.m_scaled * a.C2;
    a.tail_mismatch = eps_end - (a.entrance_threshold - a.C2 / rho2 - a.C3 / (rho2 * a.rho_end));
  } else {
    a.C2 = 1.0 / (8.0 * a.m_scaled);
    a.C3 = 0.0;
    a.g = 0.25;
    const PotentialModel tf = model;
    a.entrance_potential = [tf](double rho) { return entrance_first_order(tf, rho); };
    double r = a.rho_end;
    while (std::abs(a.entrance_potential(r)) > 1e-12 && r < 1e7) r *= 1.25;
    a.rho_free = r;
    a.tail_mismatch = eps_end - (a.entrance_threshold - a.C2 / rho2 + a.entrance_potential(a.rho_end));
  }

  // Projection of the Jacobi fragment states on the final basis.
  const auto& fb = sectors.final_basis;
  const auto& rule = fb.grid->rule();
  const Eigen::MatrixXd phi = fb.grid->values_at_nodes(fb.coefficients);
  const MassSet& m = a.masses;
  const FragmentSpectrum frag_pmu = solve_fragment([](double) { return 1.0; }, 1.0, m.m_p_mu, std::max(1, n_pmu));
  const FragmentSpectrum frag_muo = solve_fragment(
      [&model](double r) { return model.effective_charge(r); }, model.Z(), m.m_mu_O, std::max(1, n_muo));
  a.projection_residual.resize(static_cast<Eigen::Index>(a.labels.size()));
  for (std::size_t c = 0; c < a.labels.size(); ++c) {
    const auto& l = a.labels[c];
    const bool pmu = l.arrangement == Arrangement::PMu;
    const double scale = std::sqrt(m.m_scaled / (pmu ? m.m_p_mu : m.m_mu_O)) * a.rho_end;
    const FragmentSpectrum& f = pmu ? frag_pmu : frag_muo;
    Eigen::VectorXd J(static_cast<Eigen::Index>(rule.size()));
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const double ang = 0.5 * m.theta_mu * (pmu ? rule.one_plus_x[k] : rule.one_minus_x[k]);
      const double d = scale * std::sin(ang);
      const double jac = scale * std::cos(ang) * 0.5 * m.theta_mu;
      J(static_cast<Eigen::Index>(k)) = rule.w[k] * f.wavefunction(l.n - 1, d) * std::sqrt(jac);
    }
    const Eigen::VectorXd o = phi.transpose() * J;
    a.projection_residual(static_cast<Eigen::Index>(c)) = std::max(0.0, 1.0 - o.squaredNorm());
  }
  return a;
}

std::vector<int> ChannelTable::matched_open() const {
  std::vector<int> out;
  for (const auto& c : channels) {
    if (c.matched_open) out.push_back(c.index);
  }
  return out;
}

ChannelTable build_channel_table(double collision_energy, const AsymptoticModel& a) {
  if (!(collision_energy > 0.0)) throw Error(ErrorKind::Domain, "collision energy must be positive");
  ChannelTable t;
  t.collision_energy = collision_energy;
  t.absolute_energy = a.entrance_threshold + collision_energy;
  t.entrance = a.entrance;
  const double two_m = 2.0 * a.m_scaled;
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    ChannelInfo c;
    c.label = a.labels[i];
    c.index = static_cast<int>(i);
    c.threshold = a.thresholds(ii);
    c.local_energy = a.local_energies(ii);
    c.reduced_mass = c.label.arrangement == Arrangement::PMu ? a.masses.m_O_pmu : a.masses.m_p_muO;
    c.entrance = static_cast<int>(i) == a.entrance;
    c.open = t.absolute_energy > c.threshold;
    if (c.entrance) {
      c.open = true;
      c.matched_open = true;
      c.k = std::sqrt(two_m * collision_energy);
    } else {
      const double kin = t.absolute_energy - c.local_energy;
      c.matched_open = c.open && kin > 0.0;
      c.k = std::sqrt(two_m * std::abs(kin));
    }
    t.channels.push_back(c);
  }
  return t;
}

ReferenceFunctionPair entrance_reference(double collision_energy, const AsymptoticModel& a, double rho,
                                         const RadialOptions& options) {
  if (!(collision_energy > 0.0)) throw Error(ErrorKind::Domain, "entrance channel closed");
  const double k = std::sqrt(2.0 * a.m_scaled * collision_energy);
  ComplexSolution sol;
  if (a.variant == PotentialVariant::Coulomb) {
    // The fitted 1/rho^3 remainder is left out beyond rho_end.
    sol = tail_solution(k, a.g, rho, nullptr, 0.0, options);
  } else {
    const double two_m = 2.0 * a.m_scaled;
    auto extra = [&a, two_m](double r) { return two_m * a.entrance_potential(r); };
    sol = tail_solution(k, a.g, rho, extra, a.rho_free, options);
  }
  ReferenceFunctionPair p;
  p.c = sol.f.real();
  p.dc = sol.df.real();
  p.s = sol.f.imag();
  p.ds = sol.df.imag();
  return p;
}

ReferenceFunctionPair product_reference(double k, double rho) {
  if (!(k > 0.0)) throw Error(ErrorKind::Domain, "product reference requested for a closed channel");
  const double sk = std::sqrt(k);
  ReferenceFunctionPair p;
  p.s = std::sin(k * rho) / sk;
  p.ds = sk * std::cos(k * rho);
  p.c = std::cos(k * rho) / sk;
  p.dc = -sk * std::sin(k * rho);
  return p;
}

double ScatteringResult::probability(const ChannelLabel& label) const {
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (labels[j] == label) return probabilities(static_cast<Eigen::Index>(j));
  }
  return 0.0;
}

ScatteringResult match_and_extract(const PropagationState& state, const ChannelTable& table,
                                   const AsymptoticModel& a) {
  const Eigen::Index n = state.F.rows();
  if (n != static_cast<Eigen::Index>(table.channels.size()) || state.F.cols() != n) {
    throw Error(ErrorKind::ChannelMismatch, "propagated solution and channel table differ in size");
  }
  std::vector<int> open, closed;
  for (const auto& c : table.channels) (c.matched_open ? open : closed).push_back(c.index);
  const auto no = static_cast<Eigen::Index>(open.size());
  const auto nc = static_cast<Eigen::Index>(closed.size());
  const double rho = state.rho;

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, no), ds = s, c = s, dc = s;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, nc), dd = d;
  for (Eigen::Index j = 0; j < no; ++j) {
    const ChannelInfo& ch = table.channels[static_cast<std::size_t>(open[static_cast<std::size_t>(j)])];
    const ReferenceFunctionPair p = ch.entrance ? entrance_reference(table.collision_energy, a, rho)
                                                : product_reference(ch.k, rho);
    s(ch.index, j) = p.s;
    ds(ch.index, j) = p.ds;
    c(ch.index, j) = p.c;
    dc(ch.index, j) = p.dc;
  }
  for (Eigen::Index j = 0; j < nc; ++j) {
    const ChannelInfo& ch = table.channels[static_cast<std::size_t>(closed[static_cast<std::size_t>(j)])];
    d(ch.index, j) = 1.0;
    dd(ch.index, j) = -ch.k;
  }

  // Solution F A = s + c K + d E; derivative F' A = s' + c' K + d' E. With
  // Y = F' F^{-1}: (c' - Y c) K + (d' - Y d) E = -(s' - Y s).
  const Eigen::PartialPivLU<Eigen::MatrixXd> flu(state.F.transpose());
  const Eigen::MatrixXd Y = flu.solve(state.Fp.transpose()).transpose();
  Eigen::MatrixXd M(n, no + nc);
  M << dc - Y * c, dd - Y * d;
  const Eigen::MatrixXd rhs = -(ds - Y * s);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible()) throw Error(ErrorKind::Matching, "rank-deficient matching system");
  const Eigen::MatrixXd X = lu.solve(rhs);

  ScatteringResult r;
  r.collision_energy_eV = units::to_eV(table.collision_energy);
  r.matching_residual = (M * X - rhs).norm() / std::max(rhs.norm(), 1e-300);
  r.wronskian_defect = state.wronskian_defect;
  r.open = open;
  for (int i : open) r.labels.push_back(table.channels[static_cast<std::size_t>(i)].label);
  r.K = X.topRows(no);
  const Eigen::MatrixXcd iK = std::complex<double>(0.0, 1.0) * r.K.cast<std::complex<double>>();
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(no, no);
  r.S = (I - iK).transpose().partialPivLu().solve((I + iK).transpose()).transpose();
  r.unitarity_defect = (r.S.adjoint() * r.S - I).norm();
  r.symmetry_defect = (r.S - r.S.transpose()).norm();
  for (Eigen::Index j = 0; j < no; ++j) {
    if (open[static_cast<std::size_t>(j)] == table.entrance) r.entrance_column = static_cast<int>(j);
  }
  if (r.entrance_column < 0) throw Error(ErrorKind::Matching, "entrance channel not open at matching");
  r.probabilities = r.S.row(r.entrance_column).cwiseAbs2().transpose();
  for (Eigen::Index j = 0; j < no; ++j) {
    if (r.labels[static_cast<std::size_t>(j)].arrangement == Arrangement::MuO) r.total_transfer += r.probabilities(j);
  }
  return r;
}

}  // namespace mutransfer
