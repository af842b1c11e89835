#pragma once

// Colinear three-body interaction for (p mu) + O^{8+} and the one-channel
// effective potentials used by the reduced models.

#include <string>

#include "mutransfer/constants.hpp"

namespace mutransfer {

enum class PotentialVariant { Coulomb, ThomasFermi };

std::string to_string(PotentialVariant v);
/// Accepts "coulomb"/"c" and "tf"/"thomas-fermi"; throws Error(Config) otherwise.
PotentialVariant parse_potential_variant(const std::string& name);

/// Thomas-Fermi screening length 0.8853 Z^{-1/3} in electron Bohr radii.
double thomas_fermi_length(double Z);

/// Z*(d) = Z chi(d / b). Throws Error(Domain) for d < 0.
double tf_effective_charge(double d, double Z = defaults::charge_O);

class PotentialModel {
 public:
  PotentialModel(PotentialVariant variant, const MassSet& masses, double Z = defaults::charge_O);

  PotentialVariant variant() const { return variant_; }
  double Z() const { return Z_; }
  double screening_length() const { return b_; }
  const MassSet& masses() const { return masses_; }

  /// Effective oxygen charge seen at distance d.
  double effective_charge(double d) const;

  /// -Z*(d_muO)/d_muO + Z*(d_pO)/d_pO - 1/d_pmu, hartree.
  double from_distances(const InterparticleDistances& d) const;

  /// Interaction at (rho, theta); Error(Singularity) at theta in {0, theta_mu}.
  double operator()(double rho, double theta) const;

  /// (1 - x^2) V at x = 2 theta / theta_mu - 1, given 1+x and 1-x separately.
  /// Finite up to the Coulomb singularities; used by the surface quadrature.
  double regularized(double rho, double one_plus_x, double one_minus_x) const;

  /// V with the p-mu attraction removed, i.e. the interaction between the
  /// (p mu) fragment and O at entrance Jacobi lengths (R, r) in the scaled frame.
  double entrance_interaction(double R, double r) const;

  /// V with -Z*(d_muO)/d_muO removed, at product Jacobi lengths (R', r').
  double product_interaction(double R_prime, double r_prime) const;

 private:
  PotentialVariant variant_;
  MassSet masses_;
  double Z_;
  double b_;
};

/// free function form
double potential(double rho, double theta, const PotentialModel& model);

enum class TailDimension { Colinear, ThreeD };

/// Static dipole polarizability of ground-state p mu, 9/2 a_{pmu}^3 (au).
double pmu_polarizability(const MassSet& masses);

struct EffectivePotential1Ch {
  /// 3 hbar^2 / (2 m_{p,mu}).
  double alpha = 0.0;
  /// Physical transfer radius (electron Bohr radii).
  double R0 = 0.0;
  TailDimension dimension = TailDimension::Colinear;
  /// Polarizability used by the 3D tail.
  double alpha_d = 0.0;
  const PotentialModel* model = nullptr;
};

EffectivePotential1Ch make_effective_potential(const PotentialModel& model, double R0,
                                               TailDimension dimension);

/// Flat core below R0, -alpha Z*(R)/R^2 (colinear) or -C4/R^4 with
/// C4 = alpha_d Z*(R)^2 / 2 (3D) above it. R physical. Error(Domain) for R <= 0.
double effective_potential(double R, const EffectivePotential1Ch& spec);

}  // namespace mutransfer
