#pragma once

#include <cmath>
#include <cstddef>

namespace hlsflow {

/// An inequality lhs <= rhs passes when rhs - lhs >= -(abs + rel * |scale|).
struct SlackTolerance {
  double abs = 0.0;
  double rel = 0.0;

  double allowance(double scale) const { return abs + rel * std::abs(scale); }
  bool accepts(double slack, double scale) const { return slack >= -allowance(scale); }
};

/// Every tolerance the checks use. Tests and the verifier read them from here.
namespace tolerances {

/// Central-difference derivative of the trace against the dissipation bound.
inline constexpr SlackTolerance rate_fd{1e-10, 1e-3};
/// Monotonicity of int f^{2d/(d+2)} between consecutive records.
inline constexpr SlackTolerance lq_monotone{1e-15, 1e-12};
/// Per-record increase of E_alpha that is still counted as roundoff.
inline constexpr SlackTolerance energy_step{1e-15, 1e-12};
/// Sum of all E_alpha increases relative to |E_alpha(0)|.
inline constexpr double energy_cumulative_rel = 1e-3;
/// |mass(t) - mass(0)| / mass(0).
inline constexpr double mass_drift_rel = 1e-8;
/// Time-average, norm-vs-energy and iteration inequalities (roundoff only).
inline constexpr SlackTolerance iteration{1e-14, 1e-10};
/// Relative ripple allowed in the compensated energy over the final decade.
inline constexpr double decay_ripple = 0.05;
inline constexpr std::size_t decay_min_points = 20;
/// |D - (I + II)| / (|I| + |II|) when I and II are available.
inline constexpr double identity_rel = 5e-3;
/// f-route vs u-route of the dissipation terms.
inline constexpr double substitution_rel = 1e-8;
/// The two expressions of E_alpha.
inline constexpr double energy_identity_rel = 1e-10;
/// Minimum number of records inside [t0, t1] for the time-average quadrature.
inline constexpr std::size_t iteration_min_records = 3;

}  // namespace tolerances

}  // namespace hlsflow
