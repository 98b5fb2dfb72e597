#pragma once

#include <cmath>

#include "hlsflow/potential.hpp"
#include "hlsflow/radial.hpp"

namespace hlsflow {

/// Exponent 2d/(d+2) of the norm in the free energy; also the diffusion exponent.
inline double energy_exponent(int d) { return 2.0 * d / (d + 2.0); }

/// The two expressions of E_alpha side by side:
///   total     = ||f||^2 - kappa * int f (-Delta)^{-1} f
///   alt_total = alpha * E_1[f] + (1 - alpha) * ||f||^2
struct EnergyBreakdown {
  double norm_term = 0.0;
  double coulomb_term = 0.0;
  double total = 0.0;
  double alt_total = 0.0;
  double alpha = 0.0;
  double kappa = 0.0;
  /// int f (-Delta)^{-1} f without the kappa factor.
  double coulomb_raw = 0.0;

  /// Magnitude used to state relative agreement of total and alt_total.
  double scale() const { return std::max(std::abs(norm_term), std::abs(coulomb_term)); }
};

/// Breakdown from precomputed ||f||_{2d/(d+2)}^2 and int f (-Delta)^{-1} f.
inline EnergyBreakdown energy_from_parts(double norm_sq, double coulomb_raw, double alpha, double c_hls) {
  require(alpha >= 0.0, "energy: alpha must be >= 0");
  require(c_hls > 0.0, "energy: C_HLS must be positive");
  EnergyBreakdown e;
  e.alpha = alpha;
  e.kappa = alpha / c_hls;
  e.norm_term = norm_sq;
  e.coulomb_raw = coulomb_raw;
  e.coulomb_term = e.kappa * coulomb_raw;
  e.total = e.norm_term - e.coulomb_term;
  const double e1 = norm_sq - coulomb_raw / c_hls;
  e.alt_total = alpha * e1 + (1.0 - alpha) * norm_sq;
  return e;
}

inline EnergyBreakdown energy(const RadialDensity& f, double alpha, double c_hls) {
  const double norm = lp_norm(f, energy_exponent(f.grid().dimension()));
  return energy_from_parts(norm * norm, coulomb_energy(f), alpha, c_hls);
}

/// Discrete HLS quotient  int f (-Delta)^{-1} f / ||f||_{2d/(d+2)}^2.
inline double hls_quotient(const RadialDensity& f) {
  require(!f.is_zero(), "hls_quotient: density must be nonzero");
  const double norm = lp_norm(f, energy_exponent(f.grid().dimension()));
  return coulomb_energy(f) / (norm * norm);
}

/// 16 d (d^2 - 4) / ((d+1)(3d-2)^2), the dissipation prefactor in the threshold formula.
inline double dissipation_prefactor(int d) {
  require(d >= 3, "dissipation_prefactor: dimension must be >= 3");
  const double dd = d;
  return 16.0 * dd * (dd * dd - 4.0) / ((dd + 1.0) * (3.0 * dd - 2.0) * (3.0 * dd - 2.0));
}

/// The same prefactor recomputed from the diffusion term of the PDE, 16 d (d-2) / (3d-2)^2.
/// It differs from dissipation_prefactor by the factor (d+1)/(d+2).
inline double dissipation_prefactor_from_pde(int d) {
  require(d >= 3, "dissipation_prefactor_from_pde: dimension must be >= 3");
  const double dd = d;
  return 16.0 * dd * (dd - 2.0) / ((3.0 * dd - 2.0) * (3.0 * dd - 2.0));
}

/// 2(3d+2)/(3d-2), the power of C_GNS in the threshold formula.
inline double gns_power(int d) {
  require(d >= 3, "gns_power: dimension must be >= 3");
  const double dd = d;
  return 2.0 * (3.0 * dd + 2.0) / (3.0 * dd - 2.0);
}

/// Which dissipation prefactor enters alpha_0 and K.
enum class Prefactor { nominal, from_pde };

inline double dissipation_prefactor(int d, Prefactor p) {
  return p == Prefactor::nominal ? dissipation_prefactor(d) : dissipation_prefactor_from_pde(d);
}

/// alpha_0 = prefactor * C_HLS / C_GNS^{2(3d+2)/(3d-2)}.
inline double alpha0(int d, double c_hls, double c_gns, Prefactor p = Prefactor::nominal) {
  require(c_hls > 0.0 && c_gns > 0.0, "alpha0: constants must be positive");
  return dissipation_prefactor(d, p) * c_hls / std::pow(c_gns, gns_power(d));
}

/// K = -((d-2)/(d+2)) * (-prefactor / C_GNS^{power} + alpha / C_HLS).
inline double k_coefficient(int d, double alpha, double c_hls, double c_gns, Prefactor p = Prefactor::nominal) {
  require(c_hls > 0.0 && c_gns > 0.0, "k_coefficient: constants must be positive");
  const double dd = d;
  const double bracket = -dissipation_prefactor(d, p) / std::pow(c_gns, gns_power(d)) + alpha / c_hls;
  return -((dd - 2.0) / (dd + 2.0)) * bracket;
}

}  // namespace hlsflow
