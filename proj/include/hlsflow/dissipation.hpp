#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "hlsflow/energy.hpp"
#include "hlsflow/radial.hpp"

namespace hlsflow {

/// Power s = (q + (d-2)/(d+2)) / 2 in the substitution u = f^s.
inline double substitution_power(int d, double q) {
  const double dd = d;
  return 0.5 * (q + (dd - 2.0) / (dd + 2.0));
}

/// Coefficient c in  I = -c ||f||_{2d/(d+2)}^{4/(d+2)} int |grad f^s|^2,
/// obtained from the diffusion term ((d-2)/d)||f||^{4/(d+2)} Delta f^{2d/(d+2)}:
///   c = 8 (d-2) q (q-1) / ((d+2) (q + (d-2)/(d+2))^2).
inline double dissipation_coefficient(int d, double q) {
  const double dd = d;
  const double t = q + (dd - 2.0) / (dd + 2.0);
  return 8.0 * (dd - 2.0) * q * (q - 1.0) / ((dd + 2.0) * t * t);
}

/// The same coefficient with (d+1) in place of (d+2) in the denominator, the
/// form used by the nominal threshold prefactor.
inline double dissipation_coefficient_nominal(int d, double q) {
  const double dd = d;
  return dissipation_coefficient(d, q) * (dd + 2.0) / (dd + 1.0);
}

/// sum over interior edges of sigma r_e^{d-1} (u_e - u_{e-1})^2 / (c_e - c_{e-1}),
/// the discrete int |grad u|^2 for nodal values with no-flux ends.
inline double gradient_energy(const RadialGrid& g, const std::vector<double>& u) {
  const auto c = g.centers();
  const auto s = g.surfaces();
  double acc = 0.0;
  for (std::size_t e = 1; e < u.size(); ++e) {
    const double j = u[e] - u[e - 1];
    acc += s[e] * j * j / (c[e] - c[e - 1]);
  }
  return acc;
}

struct DissipationTerms {
  double I = 0.0;
  double II = 0.0;
};

/// Diffusive (I <= 0) and aggregating (II >= 0) parts of d/dt int f^q for
/// q = 2d/(d+2), the exponent of the free-energy norm.
inline DissipationTerms dissipation_terms(const RadialDensity& f, double alpha, double c_hls, int drift_factor = 1) {
  require(c_hls > 0.0, "dissipation_terms: C_HLS must be positive");
  DissipationTerms out;
  if (f.is_zero()) return out;
  const int d = f.grid().dimension();
  const double dd = d;
  const double q = energy_exponent(d);
  const double s = substitution_power(d, q);
  std::vector<double> u(f.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = f[i] > 0.0 ? std::pow(f[i], s) : 0.0;
  const double norm = lp_norm(f, q);
  out.I = -dissipation_coefficient(d, q) * std::pow(norm, 4.0 / (dd + 2.0)) * gradient_energy(f.grid(), u);
  out.II = (q - 1.0) * drift_factor * (alpha / c_hls) * power_integral(f, q + 1.0);
  return out;
}

struct SubstitutionCheck {
  double I_f = 0.0;
  double I_u = 0.0;
  double II_f = 0.0;
  double II_u = 0.0;
  /// max of the relative discrepancies of I and II
  double residual = 0.0;
};

/// Computes I and II twice: in f (chain rule grad f^s = s f^{s-1} grad f, with
/// f^{s-1} Simpson-averaged across each edge, and f-norms) and in u = f^s
/// (differences of u and u-norms with exponents a, b). Returns both and the max
/// relative discrepancy.
inline SubstitutionCheck substitution_check(const RadialDensity& f, double alpha, double c_hls) {
  SubstitutionCheck out;
  if (f.is_zero()) return out;
  const auto& g = f.grid();
  const int d = g.dimension();
  const double dd = d;
  const double q = energy_exponent(d);
  const double s = substitution_power(d, q);
  const double coef = dissipation_coefficient(d, q);
  const double kappa = alpha / c_hls;
  const auto c = g.centers();
  const auto sf = g.surfaces();

  // f-route.
  double grad_f = 0.0;
  for (std::size_t e = 1; e < f.size(); ++e) {
    const double lo = f[e - 1];
    const double hi = f[e];
    if (lo == hi) continue;
    double du = 0.0;
    if (lo > 0.0 && hi > 0.0) {
      const double mid = 0.5 * (lo + hi);
      const double w = (std::pow(lo, s - 1.0) + 4.0 * std::pow(mid, s - 1.0) + std::pow(hi, s - 1.0)) / 6.0;
      du = s * w * (hi - lo);
    } else {
      du = std::pow(std::max(lo, hi), s) * (hi > lo ? 1.0 : -1.0);
    }
    grad_f += sf[e] * du * du / (c[e] - c[e - 1]);
  }
  out.I_f = -coef * std::pow(lp_norm(f, q), 4.0 / (dd + 2.0)) * grad_f;
  out.II_f = (q - 1.0) * kappa * power_integral(f, q + 1.0);

  // u-route.
  const double denom = q * (dd + 2.0) + dd - 2.0;
  const double a = 4.0 * dd / denom;
  const double b = 2.0 * (q + 1.0) * (dd + 2.0) / denom;
  std::vector<double> u(f.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = f[i] > 0.0 ? std::pow(f[i], s) : 0.0;
  const RadialDensity ud(f.grid_ptr(), u);
  const double ua = std::pow(power_integral(ud, a), 1.0 / a);
  out.I_u = -coef * std::pow(ua, 8.0 / denom) * gradient_energy(g, u);
  out.II_u = (q - 1.0) * kappa * power_integral(ud, b);

  auto rel = [](double x, double y) {
    const double scale = std::max(std::abs(x), std::abs(y));
    return scale > 0.0 ? std::abs(x - y) / scale : 0.0;
  };
  out.residual = std::max(rel(out.I_f, out.I_u), rel(out.II_f, out.II_u));
  return out;
}

}  // namespace hlsflow
