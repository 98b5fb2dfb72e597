#pragma once

#include <algorithm>
#include <cmath>

#include "hlsflow/energy.hpp"
#include "hlsflow/quadrature.hpp"
#include "hlsflow/radial.hpp"

namespace hlsflow {

/// Sharp HLS constant for lambda = d - 2, evaluated at the extremizer
/// h = (1 + r^2)^{-(d+2)/2}.
///
/// `kernel_value` is the quotient with the bare kernel |x-y|^{2-d};
/// `value` divides out the Green's function constant (d-2) sigma_{d-1}, which
/// is the normalization in which  int f (-Delta)^{-1} f <= value * ||f||^2.
struct HlsConstant {
  int d = 0;
  double value = 0.0;
  double error = 0.0;
  double kernel_value = 0.0;
  double kernel_error = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

inline double hls_extremizer(int d, double r) { return std::pow(1.0 + r * r, -0.5 * (d + 2)); }

inline HlsConstant chls(int d, double tol = 1e-10) {
  require(d >= 3, "chls: dimension must be >= 3");
  require(tol > 0.0, "chls: tolerance must be positive");
  const double sigma = sphere_surface_area(d);
  const double p = energy_exponent(d);
  HlsConstant out;
  out.d = d;

  const quad::Tolerance inner_tol{0.0, 0.1 * tol, 4000};
  double worst_inner_rel = 0.0;
  bool inner_ok = true;
  std::size_t evals = 0;
  auto enclosed = [&](double s) {
    auto est = quad::integrate([&](double r) { return hls_extremizer(d, r) * std::pow(r, d - 1); }, 0.0, s,
                               inner_tol);
    evals += est.evaluations;
    inner_ok = inner_ok && est.converged;
    if (est.value > 0.0) worst_inner_rel = std::max(worst_inner_rel, est.error / est.value);
    return est.value;
  };
  // sigma^2 * 2 int_0^inf h(s) s^{d-1} s^{2-d} (int_0^s h(r) r^{d-1} dr) ds
  const quad::Tolerance outer_tol{0.0, tol, 4000};
  const auto num = quad::integrate_to_infinity(
      [&](double s) { return s == 0.0 ? 0.0 : hls_extremizer(d, s) * s * enclosed(s); }, 0.0, outer_tol);
  const double numerator = 2.0 * sigma * sigma * num.value;
  const double numerator_rel = num.error / num.value + worst_inner_rel;

  const auto den = quad::integrate_to_infinity(
      [&](double r) { return std::pow(hls_extremizer(d, r), p) * std::pow(r, d - 1); }, 0.0, outer_tol);
  const double norm_p = sigma * den.value;
  const double denominator = std::pow(norm_p, 2.0 / p);
  const double denominator_rel = (2.0 / p) * den.error / den.value;

  out.kernel_value = numerator / denominator;
  out.kernel_error = out.kernel_value * (numerator_rel + denominator_rel);
  const double green = (d - 2) * sigma;
  out.value = out.kernel_value / green;
  out.error = out.kernel_error / green;
  out.evaluations = evals + num.evaluations + den.evaluations;
  out.converged = inner_ok && num.converged && den.converged;
  return out;
}

}  // namespace hlsflow
