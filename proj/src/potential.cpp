#include "mutransfer/potential.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "mutransfer/error.hpp"
#include "mutransfer/thomas_fermi.hpp"

namespace mutransfer {

std::string to_string(PotentialVariant v) {
  return v == PotentialVariant::Coulomb ? "coulomb" : "tf";
}

PotentialVariant parse_potential_variant(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "coulomb" || s == "c") return PotentialVariant::Coulomb;
  if (s == "tf" || s == "thomas-fermi" || s == "thomasfermi") return PotentialVariant::ThomasFermi;
  throw Error(ErrorKind::Config, "unknown potential variant '" + name + "'");
}

double thomas_fermi_length(double Z) { return 0.8853 * std::cbrt(1.0 / Z); }

double tf_effective_charge(double d, double Z) {
  if (!(d >= 0.0)) throw Error(ErrorKind::Domain, "effective charge needs d >= 0");
  return Z * ThomasFermiFunction::instance().chi(d / thomas_fermi_length(Z));
}

PotentialModel::PotentialModel(PotentialVariant variant, const MassSet& masses, double Z)
    : variant_(variant), masses_(masses), Z_(Z), b_(thomas_fermi_length(Z)) {
  if (!(Z > 0.0)) throw Error(ErrorKind::InvalidInput, "nuclear charge must be positive");
  if (variant_ == PotentialVariant::ThomasFermi) (void)ThomasFermiFunction::instance();
}

double PotentialModel::effective_charge(double d) const {
  if (variant_ == PotentialVariant::Coulomb) {
    if (!(d >= 0.0)) throw Error(ErrorKind::Domain, "effective charge needs d >= 0");
    return Z_;
  }
  if (!(d >= 0.0)) throw Error(ErrorKind::Domain, "effective charge needs d >= 0");
  return Z_ * ThomasFermiFunction::instance().chi(d / b_);
}

double PotentialModel::from_distances(const InterparticleDistances& d) const {
  return -effective_charge(d.d_muO) / d.d_muO + effective_charge(d.d_pO) / d.d_pO - 1.0 / d.d_pmu;
}

double PotentialModel::operator()(double rho, double theta) const {
  const auto d = interparticle_distances(rho, theta, masses_);
  if (d.d_pmu == 0.0 || d.d_muO == 0.0) {
    throw Error(ErrorKind::Singularity, "potential evaluated on a Coulomb singularity (theta=" +
                                            std::to_string(theta) + ")");
  }
  return from_distances(d);
}

double PotentialModel::regularized(double rho, double one_plus_x, double one_minus_x) const {
  const double half = 0.5 * masses_.theta_mu;
  const auto d =
      interparticle_distances_split(rho, half * one_plus_x, half * one_minus_x, masses_);
  // Each singular term is multiplied by the factor that vanishes on its own
  // singularity before the sum is formed.
  const double w = one_plus_x * one_minus_x;
  const double muO = -effective_charge(d.d_muO) * (one_minus_x / d.d_muO) * one_plus_x;
  const double pmu = -(one_plus_x / d.d_pmu) * one_minus_x;
  const double pO = w * effective_charge(d.d_pO) / d.d_pO;
  return muO + pmu + pO;
}

double PotentialModel::entrance_interaction(double R, double r) const {
  const double R_phys = R / entrance_R_scale(masses_);
  const double r_phys = r / entrance_r_scale(masses_);
  const double m_pmu_total = masses_.m_p + masses_.m_mu;
  const double d_muO = R_phys - masses_.m_p / m_pmu_total * r_phys;
  const double d_pO = R_phys + masses_.m_mu / m_pmu_total * r_phys;
  if (!(d_muO > 0.0)) throw Error(ErrorKind::Domain, "entrance geometry puts mu beyond O");
  return -effective_charge(d_muO) / d_muO + effective_charge(d_pO) / d_pO;
}

double PotentialModel::product_interaction(double R_prime, double r_prime) const {
  const double R_phys = R_prime / product_R_scale(masses_);
  const double r_phys = r_prime / product_r_scale(masses_);
  const double m_muO_total = masses_.m_mu + masses_.m_O;
  // p sits on the far side of the mu-O pair; R' measured from the (mu O) centre.
  const double d_pmu = R_phys - masses_.m_O / m_muO_total * r_phys;
  const double d_pO = R_phys + masses_.m_mu / m_muO_total * r_phys;
  if (!(d_pmu > 0.0)) throw Error(ErrorKind::Domain, "product geometry puts mu beyond p");
  return effective_charge(d_pO) / d_pO - 1.0 / d_pmu;
}

double potential(double rho, double theta, const PotentialModel& model) {
  return model(rho, theta);
}

double pmu_polarizability(const MassSet& masses) {
  const double a = 1.0 / masses.m_p_mu;
  return 4.5 * a * a * a;
}

EffectivePotential1Ch make_effective_potential(const PotentialModel& model, double R0,
                                               TailDimension dimension) {
  if (!(R0 > 0.0)) throw Error(ErrorKind::InvalidInput, "transfer radius must be positive");
  EffectivePotential1Ch spec;
  spec.alpha = 3.0 / (2.0 * model.masses().m_p_mu);
  spec.R0 = R0;
  spec.dimension = dimension;
  spec.alpha_d = pmu_polarizability(model.masses());
  spec.model = &model;
  return spec;
}

double effective_potential(double R, const EffectivePotential1Ch& spec) {
  if (!(R > 0.0)) throw Error(ErrorKind::Domain, "effective potential needs R > 0");
  if (spec.model == nullptr) throw Error(ErrorKind::InvalidInput, "effective potential has no model");
  const double Rc = std::max(R, spec.R0);
  const double z = spec.model->effective_charge(Rc);
  if (spec.dimension == TailDimension::Colinear) return -spec.alpha * z / (Rc * Rc);
  const double c4 = 0.5 * spec.alpha_d * z * z;
  return -c4 / (Rc * Rc * Rc * Rc);
}

}  // namespace mutransfer
