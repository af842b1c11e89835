#include "mutransfer/constants.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mutransfer/error.hpp"

namespace mutransfer {

MassSet build_mass_set(double m_p, double m_mu, double m_O) {
  if (!(m_p > 0.0) || !(m_mu > 0.0) || !(m_O > 0.0)) {
    throw Error(ErrorKind::InvalidInput, "masses must be positive (m_p=" + std::to_string(m_p) +
                                             ", m_mu=" + std::to_string(m_mu) +
                                             ", m_O=" + std::to_string(m_O) + ")");
  }
  MassSet m;
  m.m_p = m_p;
  m.m_mu = m_mu;
  m.m_O = m_O;
  const double total = m_p + m_mu + m_O;
  m.m_O_pmu = m_O * (m_p + m_mu) / total;
  m.m_p_mu = m_p * m_mu / (m_p + m_mu);
  m.m_mu_O = m_mu * m_O / (m_mu + m_O);
  m.m_p_muO = m_p * (m_mu + m_O) / total;
  m.m_scaled = std::sqrt(m_O * m_p * m_mu / total);
  m.theta_mu = std::atan(m_mu / m.m_scaled);
  return m;
}

HypersphericalPoint to_hyperspherical(double R, double r) {
  HypersphericalPoint p;
  p.rho = std::hypot(R, r);
  if (p.rho == 0.0) {
    p.theta = 0.0;
    p.theta_undefined = true;
    return p;
  }
  p.theta = std::atan2(r, R);
  return p;
}

InterparticleDistances interparticle_distances_split(double rho, double theta,
                                                     double theta_complement,
                                                     const MassSet& masses) {
  InterparticleDistances d;
  // r = rho sin(theta) is the scaled p-mu length; r' = rho sin(theta_mu - theta)
  // is the scaled mu-O length of the product arrangement (kinematic rotation).
  d.d_pmu = std::sqrt(masses.m_scaled / masses.m_p_mu) * rho * std::sin(theta);
  d.d_muO = std::sqrt(masses.m_scaled / masses.m_mu_O) * rho * std::sin(theta_complement);
  d.d_pO = d.d_pmu + d.d_muO;
  return d;
}

InterparticleDistances interparticle_distances(double rho, double theta, const MassSet& masses) {
  constexpr double slack = 1e-14;
  if (!(theta >= -slack) || !(theta <= masses.theta_mu + slack) || !(rho >= 0.0)) {
    throw Error(ErrorKind::Domain, "theta=" + std::to_string(theta) + " outside [0, theta_mu=" +
                                       std::to_string(masses.theta_mu) +
                                       "] or rho=" + std::to_string(rho) + " < 0");
  }
  theta = std::clamp(theta, 0.0, masses.theta_mu);
  return interparticle_distances_split(rho, theta, masses.theta_mu - theta, masses);
}

JacobiPair jacobi_from_positions(double x_p, double x_mu, double x_O, const MassSet& masses) {
  const double centre = (masses.m_mu * x_mu + masses.m_p * x_p) / (masses.m_p + masses.m_mu);
  JacobiPair j;
  j.R = std::sqrt(masses.m_O_pmu / masses.m_scaled) * (x_O - centre);
  j.r = std::sqrt(masses.m_p_mu / masses.m_scaled) * (x_mu - x_p);
  return j;
}

double entrance_R_scale(const MassSet& masses) {
  return std::sqrt(masses.m_O_pmu / masses.m_scaled);
}
double entrance_r_scale(const MassSet& masses) {
  return std::sqrt(masses.m_p_mu / masses.m_scaled);
}
double product_r_scale(const MassSet& masses) {
  return std::sqrt(masses.m_mu_O / masses.m_scaled);
}
double product_R_scale(const MassSet& masses) {
  return std::sqrt(masses.m_p_muO / masses.m_scaled);
}

}  // namespace mutransfer
