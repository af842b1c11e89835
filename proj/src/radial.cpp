#include "mutransfer/radial.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "mutransfer/error.hpp"

namespace mutransfer {

using cd = std::complex<double>;

ComplexSolution integrate_radial(const std::function<double(double)>& q2, double r_from, double r_to,
                                 ComplexSolution start, const RadialOptions& opt) {
  if (!(r_from > 0.0) || !(r_to > 0.0)) throw Error(ErrorKind::Domain, "radial integration needs r > 0");
  const double dir = r_to >= r_from ? 1.0 : -1.0;
  constexpr int chunk = 32;
  cd y = start.f;
  cd dy = start.df;
  double r = r_from;
  while (dir * (r_to - r) > 0.0) {
    // Constant step over a chunk; the three-level history restarts per chunk.
    const double qa = std::sqrt(std::abs(q2(r)));
    double h = opt.max_relative_step * r;
    if (qa > 0.0) h = std::min(h, 2.0 * std::numbers::pi / qa / opt.steps_per_wavelength);
    const double left = dir * (r_to - r);
    int n = chunk;
    const bool last = h * chunk >= left;
    if (last) {
      n = std::max(1, static_cast<int>(std::ceil(left / h - 1e-9)));
      h = left / n;
    }
    h *= dir;
    cd f = -q2(r) * y;
    const cd back = y - 0.5 * h * dy + (h * h / 8.0) * f;
    cd f_back = -q2(r - 0.5 * h) * back;
    for (int i = 0; i < n; ++i) {
      const cd y_half = y + 0.5 * h * dy + (h * h / 24.0) * (4.0 * f - f_back);
      const cd f_half = -q2(r + 0.5 * h) * y_half;
      y += h * dy + (h * h / 6.0) * (f + 2.0 * f_half);
      r = (last && i + 1 == n) ? r_to : r + h;
      const cd f_next = -q2(r) * y;
      dy += (h / 6.0) * (f + 4.0 * f_half + f_next);
      f = f_next;
      f_back = f_half;
    }
    if (!std::isfinite(std::abs(y)) || !std::isfinite(std::abs(dy))) {
      std::ostringstream os;
      os << "radial integration diverged at r=" << r;
      throw Error(ErrorKind::BlowUp, os.str());
    }
  }
  return {y, dy};
}

namespace {

// Hankel series S(z) = sum i^k a_k z^-k and dS/dz; false if it does not
// reach double precision before the terms start growing.
bool hankel_series(double g, double z, cd& s, cd& ds) {
  const double four_mu2 = 1.0 - 4.0 * g;
  s = 1.0;
  ds = 0.0;
  double a = 1.0;
  cd ik = 1.0;
  double zk = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 400; ++k) {
    a *= (four_mu2 - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k);
    ik *= cd(0.0, 1.0);
    zk *= z;
    const double mag = std::abs(a) / zk;
    if (mag > prev && mag > 1e-300) return false;
    s += ik * (a / zk);
    ds += ik * (-k * a / (zk * z));
    if (mag < 1e-17) return true;
    prev = mag;
  }
  return false;
}

}  // namespace

ComplexSolution hankel_tail_asymptotic(double k, double g, double r) {
  if (!(k > 0.0) || !(r > 0.0)) throw Error(ErrorKind::Domain, "tail solution needs k > 0 and r > 0");
  const double z = k * r;
  cd s, ds;
  if (!hankel_series(g, z, s, ds)) {
    std::ostringstream os;
    os << "asymptotic series not converged at kr=" << z << " (g=" << g << ")";
    throw Error(ErrorKind::Domain, os.str());
  }
  const cd e = std::exp(cd(0.0, z));
  const double sk = std::sqrt(k);
  return {e * s / sk, sk * e * (cd(0.0, 1.0) * s + ds)};
}

double hankel_anchor_radius(double k, double g) {
  if (!(k > 0.0)) throw Error(ErrorKind::Domain, "anchor needs k > 0");
  double z = 40.0 + 2.0 * std::abs(g);
  cd s, ds;
  for (int i = 0; i < 60 && !hankel_series(g, z, s, ds); ++i) z *= 1.5;
  return z / k;
}

ComplexSolution tail_solution(double k, double g, double r, const std::function<double(double)>& extra,
                              double r_extra_free, const RadialOptions& opt) {
  const double r_anchor = std::max(hankel_anchor_radius(k, g), r_extra_free);
  if (r >= r_anchor && !extra) return hankel_tail_asymptotic(k, g, r);
  const double r0 = std::max(r_anchor, r);
  const ComplexSolution a = hankel_tail_asymptotic(k, g, r0);
  auto q2 = [&](double x) {
    double v = k * k + g / (x * x);
    if (extra) v -= extra(x);
    return v;
  };
  return integrate_radial(q2, r0, r, a, opt);
}

}  // namespace mutransfer
