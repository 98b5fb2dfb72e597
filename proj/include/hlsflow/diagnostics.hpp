#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hlsflow/error.hpp"
#include "hlsflow/run.hpp"
#include "hlsflow/tolerances.hpp"

namespace hlsflow {

/// Outcome of one named check. `worst` is the most adverse value seen, in the
/// units named by `measure`.
struct CheckResult {
  std::string name;
  bool passed = true;
  bool skipped = false;
  double worst = 0.0;
  std::string measure;
  double tolerance = 0.0;
  std::size_t evaluated = 0;
  std::string detail;
};

struct RateCheckRecord {
  double t = 0.0;
  /// central difference of int f^q
  double derivative = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  double allowance = 0.0;
  double dissipation_i = std::numeric_limits<double>::quiet_NaN();
  double dissipation_ii = std::numeric_limits<double>::quiet_NaN();
  double identity_residual = std::numeric_limits<double>::quiet_NaN();

  double relative_identity_residual() const {
    return identity_residual / (std::abs(dissipation_i) + std::abs(dissipation_ii));
  }
};

/// Second-order derivative at record k from records k-1, k, k+1 on a nonuniform grid.
inline double central_derivative(std::span<const TraceRecord> r, std::size_t k, double TraceRecord::*field) {
  const double h1 = r[k].t - r[k - 1].t;
  const double h2 = r[k + 1].t - r[k].t;
  return -h2 / (h1 * (h1 + h2)) * (r[k - 1].*field) + (h2 - h1) / (h1 * h2) * (r[k].*field) +
         h1 / (h2 * (h1 + h2)) * (r[k + 1].*field);
}

/// D = d/dt int f^q against B = -K int f^{q+1} at every interior record.
inline std::vector<RateCheckRecord> rate_check(const EnergyTrace& trace, double k_coef,
                                                 SlackTolerance tol = tolerances::rate_fd) {
  const auto& r = trace.records;
  require(r.size() >= 3, "rate_check: trace needs at least 3 records");
  std::vector<RateCheckRecord> out;
  for (std::size_t k = 1; k + 1 < r.size(); ++k) {
    if (!(r[k].t > r[k - 1].t && r[k + 1].t > r[k].t)) continue;
    RateCheckRecord c;
    c.t = r[k].t;
    c.derivative = central_derivative(r, k, &TraceRecord::lq_mass);
    c.bound = -k_coef * r[k].lq1_mass;
    c.slack = c.bound - c.derivative;
    c.allowance = tol.allowance(c.bound);
    if (trace.has_dissipation) {
      c.dissipation_i = r[k].dissipation_i;
      c.dissipation_ii = r[k].dissipation_ii;
      c.identity_residual = std::abs(c.derivative - (c.dissipation_i + c.dissipation_ii));
    }
    out.push_back(c);
  }
  return out;
}

/// Worst slack is reported relative to |B|.
inline CheckResult summarize_rate(const std::vector<RateCheckRecord>& recs, SlackTolerance tol = tolerances::rate_fd) {
  CheckResult res{"dissipation_rate_bound"};
  res.measure = "min (B - D) / |B|";
  res.tolerance = tol.rel;
  res.worst = std::numeric_limits<double>::infinity();
  for (const auto& c : recs) {
    ++res.evaluated;
    const double scale = std::abs(c.bound) > 0.0 ? std::abs(c.bound) : 1.0;
    res.worst = std::min(res.worst, c.slack / scale);
    if (c.slack < -c.allowance) res.passed = false;
  }
  if (recs.empty()) res.skipped = true;
  return res;
}

inline CheckResult identity_check(const std::vector<RateCheckRecord>& recs, double limit = tolerances::identity_rel) {
  CheckResult res{"dissipation_identity"};
  res.measure = "max |D - (I + II)| / (|I| + |II|)";
  res.tolerance = limit;
  for (const auto& c : recs) {
    if (std::isnan(c.identity_residual)) continue;
    ++res.evaluated;
    const double rel = c.relative_identity_residual();
    res.worst = std::max(res.worst, rel);
    if (!(rel <= limit)) res.passed = false;
  }
  if (res.evaluated == 0) {
    res.skipped = true;
    res.detail = "trace carries no dissipation terms";
  }
  return res;
}

inline CheckResult mass_check(const EnergyTrace& trace, double limit = tolerances::mass_drift_rel) {
  CheckResult res{"mass_conservation"};
  res.measure = "max |M(t) - M(0)| / M(0)";
  res.tolerance = limit;
  const auto& r = trace.records;
  require(!r.empty(), "mass_check: empty trace");
  for (const auto& x : r) {
    ++res.evaluated;
    res.worst = std::max(res.worst, std::abs(x.mass - r[0].mass) / r[0].mass);
  }
  res.passed = res.worst < limit;
  return res;
}

/// E_alpha nonincreasing: the summed increases must stay below a fraction of |E_alpha(0)|.
inline CheckResult energy_dissipation_check(const EnergyTrace& trace, double cumulative = tolerances::energy_cumulative_rel,
                                            SlackTolerance step_tol = tolerances::energy_step) {
  CheckResult res{"energy_dissipation"};
  res.measure = "sum of E increases / |E(0)|";
  res.tolerance = cumulative;
  const auto& r = trace.records;
  require(!r.empty(), "energy_dissipation_check: empty trace");
  double total = 0.0;
  std::size_t bumps = 0;
  for (std::size_t k = 1; k < r.size(); ++k) {
    ++res.evaluated;
    const double rise = r[k].e_alpha - r[k - 1].e_alpha;
    if (rise > step_tol.allowance(r[k - 1].e_alpha)) ++bumps;
    if (rise > 0.0) total += rise;
  }
  const double scale = std::abs(r[0].e_alpha) > 0.0 ? std::abs(r[0].e_alpha) : 1.0;
  res.worst = total / scale;
  res.passed = res.worst < cumulative;
  res.detail = std::to_string(bumps) + " records rose beyond roundoff";
  return res;
}

inline CheckResult lq_monotonicity_check(const EnergyTrace& trace, SlackTolerance tol = tolerances::lq_monotone) {
  CheckResult res{"lq_monotone"};
  res.measure = "max relative increase of int f^q between records";
  res.tolerance = tol.rel;
  const auto& r = trace.records;
  for (std::size_t k = 1; k < r.size(); ++k) {
    ++res.evaluated;
    const double rise = r[k].lq_mass - r[k - 1].lq_mass;
    res.worst = std::max(res.worst, rise / r[k - 1].lq_mass);
    if (rise > tol.allowance(r[k - 1].lq_mass)) res.passed = false;
  }
  return res;
}

/// Both sides of the three inequalities on [t0, t1]; a slack is rhs - lhs.
struct IterationPair {
  double t0 = 0.0;
  double t1 = 0.0;
  std::size_t records = 0;
  /// (1/(t1-t0)) int_{t0}^{t1} int f^{q+1} dt  <=  int f^q(t0) / ((t1-t0) K)
  double average_lhs = 0.0;
  double average_rhs = 0.0;
  /// int f^q(t0)  <=  (E(t0)/(1-alpha))^{d/(d+2)}
  double norm_lhs = 0.0;
  double norm_rhs = 0.0;
  /// E(t1)  <=  ((t1-t0)K)^{-(d^2-4)/(2d^2)} M^{(d+2)^2/(2d^2)} (E(t0)/(1-alpha))^{(d-2)/(2d)}
  double iteration_lhs = 0.0;
  double iteration_rhs = 0.0;
  /// The same right side with M^{1/2}.
  double iteration_rhs_half_mass = 0.0;

  double average_slack() const { return average_rhs - average_lhs; }
  double norm_slack() const { return norm_rhs - norm_lhs; }
  double iteration_slack() const { return iteration_rhs - iteration_lhs; }
};

inline double norm_energy_bound(double e_alpha, double alpha, int d) {
  require(alpha < 1.0, "norm_energy_bound: alpha must be < 1");
  return std::pow(std::max(e_alpha, 0.0) / (1.0 - alpha), d / (d + 2.0));
}

inline IterationPair iteration_pair(std::span<const TraceRecord> r, std::size_t i0, std::size_t i1, int d, double alpha,
                                    double k_coef, double mass) {
  require(i1 > i0 && r[i1].t > r[i0].t, "iteration_pair: need t1 > t0");
  const double dd = d;
  IterationPair p;
  p.t0 = r[i0].t;
  p.t1 = r[i1].t;
  p.records = i1 - i0 + 1;
  double integral = 0.0;
  for (std::size_t k = i0; k < i1; ++k) integral += 0.5 * (r[k].lq1_mass + r[k + 1].lq1_mass) * (r[k + 1].t - r[k].t);
  const double span = p.t1 - p.t0;
  p.average_lhs = integral / span;
  p.average_rhs = r[i0].lq_mass / (span * k_coef);
  p.norm_lhs = r[i0].lq_mass;
  p.norm_rhs = norm_energy_bound(r[i0].e_alpha, alpha, d);
  const double time_part = std::pow(1.0 / (span * k_coef), (dd * dd - 4.0) / (2.0 * dd * dd));
  const double energy_part = std::pow(std::max(r[i0].e_alpha, 0.0) / (1.0 - alpha), (dd - 2.0) / (2.0 * dd));
  p.iteration_lhs = r[i1].e_alpha;
  p.iteration_rhs = time_part * std::pow(mass, (dd + 2.0) * (dd + 2.0) / (2.0 * dd * dd)) * energy_part;
  p.iteration_rhs_half_mass = time_part * std::sqrt(mass) * energy_part;
  return p;
}

struct IterationReport {
  std::vector<IterationPair> pairs;
  /// norm-vs-energy bound on the first record alone
  double initial_norm_lhs = 0.0;
  double initial_norm_rhs = 0.0;
  CheckResult average;
  CheckResult norm;
  CheckResult iteration;
};

/// Dyadic chain ending at the last record: t1 = T, t0 = last record at or
/// below T/2, then t1 = t0 and so on while [t0, t1] holds enough records.
inline IterationReport averaging_iteration_check(const EnergyTrace& trace, double alpha, double k_coef, double mass,
                                                 SlackTolerance tol = tolerances::iteration) {
  require(alpha >= 0.0 && alpha < 1.0, "averaging_iteration_check: alpha must lie in [0, 1)");
  require(k_coef > 0.0, "averaging_iteration_check: K must be positive");
  require(mass > 0.0, "averaging_iteration_check: mass must be positive");
  const auto& r = trace.records;
  require(r.size() >= tolerances::iteration_min_records, "averaging_iteration_check: trace too short");
  IterationReport rep;
  rep.initial_norm_lhs = r[0].lq_mass;
  rep.initial_norm_rhs = norm_energy_bound(r[0].e_alpha, alpha, trace.d);

  std::size_t i1 = r.size() - 1;
  while (i1 > 0) {
    const double half = 0.5 * r[i1].t;
    std::size_t i0 = i1;
    while (i0 > 0 && r[i0].t > half) --i0;
    if (r[i0].t <= 0.0 || i1 - i0 + 1 < tolerances::iteration_min_records) break;
    rep.pairs.push_back(iteration_pair(r, i0, i1, trace.d, alpha, k_coef, mass));
    i1 = i0;
  }
  require(!rep.pairs.empty(), "averaging_iteration_check: trace does not cover any dyadic pair");

  auto fill = [&](CheckResult& c, const char* name, auto lhs, auto rhs) {
    c.name = name;
    c.measure = "min (rhs - lhs) / rhs";
    c.tolerance = tol.rel;
    c.worst = std::numeric_limits<double>::infinity();
    for (const auto& p : rep.pairs) {
      ++c.evaluated;
      const double l = lhs(p);
      const double rr = rhs(p);
      c.worst = std::min(c.worst, (rr - l) / std::abs(rr));
      if (!tol.accepts(rr - l, rr)) c.passed = false;
    }
  };
  fill(rep.average, "time_average_bound", [](const IterationPair& p) { return p.average_lhs; },
       [](const IterationPair& p) { return p.average_rhs; });
  fill(rep.norm, "norm_energy_bound", [](const IterationPair& p) { return p.norm_lhs; },
       [](const IterationPair& p) { return p.norm_rhs; });
  {
    ++rep.norm.evaluated;
    const double s = rep.initial_norm_rhs - rep.initial_norm_lhs;
    rep.norm.worst = std::min(rep.norm.worst, s / std::abs(rep.initial_norm_rhs));
    if (!tol.accepts(s, rep.initial_norm_rhs)) rep.norm.passed = false;
  }
  fill(rep.iteration, "iteration_bound", [](const IterationPair& p) { return p.iteration_lhs; },
       [](const IterationPair& p) { return p.iteration_rhs; });
  return rep;
}

struct DecayFit {
  /// E ~ amplitude * t^{-exponent} over [t_lo, t_hi]
  double exponent = 0.0;
  double amplitude = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t points = 0;
  std::size_t excluded = 0;
  /// rms of the log-log residuals
  double residual = 0.0;
  double bound_exponent = 0.0;
  /// sup over the window of t^{(d-2)/d} E
  double compensated_sup = 0.0;
  double compensated_start = 0.0;
  bool sup_at_start = false;
  /// largest c(t_k) / min_{j <= k} c(t_j) - 1 over the final decade
  double final_decade_ripple = 0.0;
  bool final_decade_nonincreasing = false;
};

inline DecayFit decay_fit(const EnergyTrace& trace, double t_lo, double t_hi, double ripple = tolerances::decay_ripple) {
  require(t_lo > 0.0 && t_hi > t_lo, "decay_fit: window must satisfy 0 < t_lo < t_hi");
  const double dd = trace.d;
  DecayFit fit;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.bound_exponent = (dd - 2.0) / dd;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> ts;
  for (const auto& r : trace.records) {
    if (r.t < t_lo || r.t > t_hi) continue;
    if (!(r.e_alpha > 0.0)) {
      ++fit.excluded;
      continue;
    }
    x.push_back(std::log(r.t));
    y.push_back(std::log(r.e_alpha));
    ts.push_back(r.t);
  }
  fit.points = x.size();
  require(fit.points >= tolerances::decay_min_points, "decay_fit: window holds fewer than the required points");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i];
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  const double icept = my - slope * mx;
  fit.exponent = -slope;
  fit.amplitude = std::exp(icept);
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) ss += std::pow(y[i] - (icept + slope * x[i]), 2);
  fit.residual = std::sqrt(ss / n);

  std::vector<double> comp(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) comp[i] = std::pow(ts[i], fit.bound_exponent) * std::exp(y[i]);
  fit.compensated_start = comp.front();
  fit.compensated_sup = *std::max_element(comp.begin(), comp.end());
  fit.sup_at_start = fit.compensated_sup <= fit.compensated_start * (1.0 + ripple);

  const double decade = t_hi / 10.0;
  double running_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < comp.size(); ++i) {
    if (ts[i] < decade) continue;
    running_min = std::min(running_min, comp[i]);
    fit.final_decade_ripple = std::max(fit.final_decade_ripple, comp[i] / running_min - 1.0);
  }
  fit.final_decade_nonincreasing = std::isfinite(running_min) && fit.final_decade_ripple <= ripple;
  return fit;
}

/// Window [t_burn_fraction * T, T] with T the last record time.
inline DecayFit decay_fit(const EnergyTrace& trace, double t_burn_fraction) {
  require(!trace.records.empty(), "decay_fit: empty trace");
  const double t_end = trace.records.back().t;
  return decay_fit(trace, std::max(t_burn_fraction * t_end, std::numeric_limits<double>::min()), t_end);
}

inline CheckResult decay_check(const DecayFit& fit) {
  CheckResult res{"decay_bound_form"};
  res.measure = "max ripple of t^{(d-2)/d} E over the final decade";
  res.tolerance = tolerances::decay_ripple;
  res.worst = fit.final_decade_ripple;
  res.evaluated = fit.points;
  res.passed = std::isfinite(fit.compensated_sup) && fit.final_decade_nonincreasing;
  res.detail = "fitted exponent " + std::to_string(fit.exponent) + ", bound exponent " +
               std::to_string(fit.bound_exponent);
  return res;
}

}  // namespace hlsflow
