#pragma once

// Scalar radial tools: de Vogelaere integration of u'' = -q2(r) u for a pair
// of real solutions, and the asymptotic (Hankel) anchor for 1/r^2 tails.

#include <complex>
#include <functional>

namespace mutransfer {

/// Complex solution value and derivative.
struct ComplexSolution {
  std::complex<double> f;
  std::complex<double> df;
};

struct RadialOptions {
  /// Steps per local wavelength.
  double steps_per_wavelength = 1600.0;
  /// Upper bound of |h| / r.
  double max_relative_step = 0.000125;
};

/// Integrates u'' = -q2(r) u from r_from to r_to (either direction) for the
/// complex initial data; q2 must be finite on the path.
ComplexSolution integrate_radial(const std::function<double(double)>& q2, double r_from, double r_to,
                                 ComplexSolution start, const RadialOptions& options = {});

/// Outgoing solution of u'' + (k^2 + g / r^2) u = 0 normalised to
/// exp(i k r) / sqrt(k) at infinity, from the asymptotic Hankel series
/// (order i sqrt(g - 1/4), or real order when g < 1/4). Requires k r large
/// enough for the series to converge to double precision; Error(Domain) otherwise.
ComplexSolution hankel_tail_asymptotic(double k, double g, double r);

/// Smallest r at which hankel_tail_asymptotic reaches full precision.
double hankel_anchor_radius(double k, double g);

/// Same solution at any r > 0: series at the anchor radius, then inward
/// integration including an extra short-range term: q2 = k^2 + g/r^2 - extra(r).
ComplexSolution tail_solution(double k, double g, double r,
                              const std::function<double(double)>& extra = nullptr,
                              double r_extra_free = 0.0, const RadialOptions& options = {});

}  // namespace mutransfer
