#include "mutransfer/models.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "mutransfer/error.hpp"
#include "mutransfer/sectors.hpp"

namespace mutransfer {

double LandauZenerCrossing::single_passage(double E, double m_scaled) const {
  const double kin = E - energy;
  if (!(kin > 0.0)) return -1.0;
  const double v = std::sqrt(2.0 * kin / m_scaled);
  if (!(slope_difference > 0.0)) return coupling > 0.0 ? 0.0 : 1.0;
  return std::exp(-2.0 * units::pi * coupling * coupling / (v * slope_difference));
}

std::vector<double> crossing_scan_grid() { return geometric_edges(0.04, 2.0, 400); }

LandauZenerModel extract_landau_zener(const PotentialModel& model, int n_L, const std::vector<double>& rho_grid) {
  // pmu(1) sits above muO(1..8) at the end of the default grid.
  const CurveTable curves = adiabatic_curve_scan(rho_grid, n_L, model, 14);
  const int entrance = curves.find({Arrangement::PMu, 1});
  const int j6 = curves.find({Arrangement::MuO, 6});
  const int j5 = curves.find({Arrangement::MuO, 5});
  if (entrance < 0 || j6 < 0 || j5 < 0) throw Error(ErrorKind::NotFound, "pmu(1), muO(6) or muO(5) not scanned");
  const double thr = -model.masses().m_p_mu / 2.0;

  auto fit = [&](const std::vector<double>& rho, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                 ChannelLabel label) {
    const AvoidedCrossing ac = locate_avoided_crossing(rho, a, b);
    LandauZenerCrossing c;
    c.product = label;
    c.rho_c = ac.rho_c;
    c.coupling = 0.5 * ac.gap;
    c.slope_difference = ac.slope_difference;
    // Mean of the two curves at the crossing, linear in rho between grid points.
    const auto it = std::upper_bound(rho.begin(), rho.end(), ac.rho_c);
    const auto k = static_cast<Eigen::Index>(
        std::clamp<std::ptrdiff_t>(it - rho.begin(), 1, static_cast<std::ptrdiff_t>(rho.size()) - 1));
    const double x0 = rho[static_cast<std::size_t>(k - 1)];
    const double x1 = rho[static_cast<std::size_t>(k)];
    const double w = std::clamp((ac.rho_c - x0) / (x1 - x0), 0.0, 1.0);
    const double mean0 = 0.5 * (a(k - 1) + b(k - 1));
    const double mean1 = 0.5 * (a(k) + b(k));
    c.energy = (1.0 - w) * mean0 + w * mean1 - thr;
    return c;
  };

  LandauZenerModel lz;
  lz.m_scaled = model.masses().m_scaled;
  lz.outer = fit(curves.rho, curves.tracked(entrance), curves.tracked(j6), {Arrangement::MuO, 6});

  // Inside the outer crossing the entrance diabat runs along the lower
  // adiabat, i.e. the one tracked from muO(6); it meets muO(5) there.
  std::size_t n_in = 0;
  while (n_in < curves.rho.size() && curves.rho[n_in] < lz.outer.rho_c) ++n_in;
  if (n_in < 5) throw Error(ErrorKind::NotFound, "scan grid does not reach inside the muO(6) crossing");
  const std::vector<double> rho_in(curves.rho.begin(), curves.rho.begin() + static_cast<std::ptrdiff_t>(n_in));
  const auto n = static_cast<Eigen::Index>(n_in);
  lz.inner = fit(rho_in, curves.tracked(j6).head(n), curves.tracked(j5).head(n), {Arrangement::MuO, 5});
  return lz;
}

LandauZenerResult landau_zener_total(double E, const LandauZenerModel& lz) {
  if (!(E > 0.0)) throw Error(ErrorKind::Domain, "collision energy must be positive");
  LandauZenerResult r;
  r.p_outer = lz.outer.single_passage(E, lz.m_scaled);
  r.p_inner = lz.inner.single_passage(E, lz.m_scaled);
  if (r.p_outer < 0.0) return r;
  const double p1 = r.p_outer;
  if (r.p_inner < 0.0) {
    // Turned back between the crossings: one in/out pass through muO(6) only.
    r.P6 = 2.0 * p1 * (1.0 - p1);
  } else {
    const double p2 = r.p_inner;
    r.P6 = (1.0 - p1) * p1 * (1.0 + p2 * p2 + (1.0 - p2) * (1.0 - p2));
    r.P5 = 2.0 * p1 * p2 * (1.0 - p2);
  }
  r.total = r.P5 + r.P6;
  return r;
}

namespace {

// Radius beyond which 2 mu |V| is below 1e-9 of the local k^2 + 1/R^2.
double tail_free_radius(const std::function<double(double)>& two_mu_v, double k, double R0) {
  double R = std::max(R0, 1e-3);
  for (int i = 0; i < 200; ++i) {
    if (std::abs(two_mu_v(R)) <= 1e-9 * (k * k + 1.0 / (R * R))) return R;
    R *= 1.25;
  }
  return R;
}

}  // namespace

TransmittanceResult transmittance(double E, const EffectivePotential1Ch& spec, const RadialOptions& options) {
  if (!(E > 0.0)) throw Error(ErrorKind::Domain, "transmittance needs E > 0");
  if (spec.model == nullptr) throw Error(ErrorKind::InvalidInput, "effective potential has no model");
  const double mu = spec.model->masses().m_O_pmu;
  const double R0 = spec.R0;
  TransmittanceResult r;
  r.k = std::sqrt(2.0 * mu * E);

  using cd = std::complex<double>;
  const double K2 = 2.0 * mu * (E - effective_potential(R0, spec));
  // Ingoing wave e^{-iKR}/sqrt(K) in the flat core, unit flux.
  cd F, dF;
  if (K2 > 0.0) {
    r.K = std::sqrt(K2);
    F = std::exp(cd(0.0, -r.K * R0)) / std::sqrt(r.K);
    dF = cd(0.0, -r.K) * F;
  } else {
    // Core closed at this energy: T is evaluated anyway, with the evanescent
    // continuation, and flagged.
    const double kappa = std::sqrt(std::max(-K2, 1e-300));
    r.K = kappa;
    r.tunneling = true;
    F = cd(std::exp(kappa * R0) / std::sqrt(kappa), 0.0);
    dF = kappa * F;
  }

  ComplexSolution out;
  const bool pure_inverse_square =
      spec.dimension == TailDimension::Colinear && spec.model->variant() == PotentialVariant::Coulomb;
  if (pure_inverse_square) {
    const double g = 2.0 * mu * spec.alpha * spec.model->Z();
    out = tail_solution(r.k, g, R0, nullptr, 0.0, options);
  } else {
    auto two_mu_v = [&spec, mu](double R) { return 2.0 * mu * effective_potential(R, spec); };
    const double R_free = tail_free_radius(two_mu_v, r.k, R0);
    out = tail_solution(r.k, 0.0, R0, two_mu_v, R_free, options);
  }
  // Outside, F = A f- + B f+ with f+ = out.f, f- = conj(f+), W(f+, f-) = -2i.
  const cd fp = out.f, dfp = out.df;
  const cd fm = std::conj(fp), dfm = std::conj(dfp);
  const cd A = (F * dfp - dF * fp) / cd(0.0, 2.0);
  const cd B = (F * dfm - dF * fm) / cd(0.0, -2.0);
  r.T = 1.0 / std::abs(A);
  r.reflection = std::abs(B / A);
  r.phase = std::arg(A);
  return r;
}

double factorized_probability(double T, double P_max) {
  if (!(P_max >= 0.0 && P_max <= 1.0)) throw Error(ErrorKind::InvalidInput, "P_max must lie in [0, 1]");
  return T * T * P_max;
}

double transfer_radius(const LandauZenerModel& lz, const MassSet& masses) {
  return lz.outer.rho_c / entrance_R_scale(masses);
}

double estimate_3d(double E, const PotentialModel& coulomb, double R0, double P_max, const RadialOptions& options) {
  const EffectivePotential1Ch spec = make_effective_potential(coulomb, R0, TailDimension::ThreeD);
  return factorized_probability(transmittance(E, spec, options).T, P_max);
}

}  // namespace mutransfer
