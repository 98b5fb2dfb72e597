#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hlsflow/dissipation.hpp"
#include "hlsflow/solver.hpp"

namespace hlsflow {

/// One row of the monitored functionals. The first ten fields are the CSV
/// columns; the rest are kept in memory only.
struct TraceRecord {
  double t = 0.0;
  double e_alpha = 0.0;
  double norm_term = 0.0;
  double coulomb_term = 0.0;
  double mass = 0.0;
  double second_moment = 0.0;
  /// int f^q, q = 2d/(d+2)
  double lq_mass = 0.0;
  /// int f^{q+1}
  double lq1_mass = 0.0;
  /// last step size
  double dt = 0.0;
  /// max density over the outer 5% of cells divided by the peak density
  double boundary_max = 0.0;

  double dissipation_i = 0.0;
  double dissipation_ii = 0.0;
  double min_density = 0.0;
  double peak_density = 0.0;
};

struct EnergyTrace {
  int d = 3;
  double alpha = 0.0;
  double c_hls = 0.0;
  int drift_factor = 1;
  std::size_t cells = 0;
  double r_max = 0.0;
  double dr_max = 0.0;
  std::vector<TraceRecord> records;
  /// False for traces read back from CSV, which carry no I, II or density extrema.
  bool has_dissipation = true;
  bool aborted = false;
  std::string abort_reason;
  std::size_t steps = 0;
  std::size_t floor_clamps = 0;
  double wall_time = 0.0;
  double dt_max_used = 0.0;
  bool domain_truncated = false;
};

struct RunResult {
  EnergyTrace trace;
  FlowState final_state;
};

/// Output times including 0 and t_end.
inline std::vector<double> output_times(const OutputCadence& c, double t_end) {
  std::vector<double> t{0.0};
  if (c.interval > 0.0) {
    for (std::size_t k = 1;; ++k) {
      const double v = c.interval * static_cast<double>(k);
      if (v >= t_end * (1.0 - 1e-12)) break;
      t.push_back(v);
    }
  } else {
    const double ratio = std::pow(10.0, 1.0 / static_cast<double>(c.per_decade));
    for (std::size_t k = 0;; ++k) {
      const double v = c.first * std::pow(ratio, static_cast<double>(k));
      if (v >= t_end * (1.0 - 1e-12)) break;
      t.push_back(v);
    }
  }
  t.push_back(t_end);
  return t;
}

inline double boundary_fraction(const RadialDensity& f) {
  const auto n = f.size();
  const std::size_t width = std::max<std::size_t>(1, n / 20);
  double outer = 0.0;
  for (std::size_t i = n - width; i < n; ++i) outer = std::max(outer, f[i]);
  const double peak = f.max_value();
  return peak > 0.0 ? outer / peak : 0.0;
}

inline TraceRecord make_record(const FlowState& s, const SolverConfig& cfg, double c_hls) {
  TraceRecord r;
  const double q = energy_exponent(cfg.d);
  r.t = s.t;
  r.e_alpha = s.energy.total;
  r.norm_term = s.energy.norm_term;
  r.coulomb_term = s.energy.coulomb_term;
  r.mass = s.mass;
  r.second_moment = second_moment(s.f);
  r.lq_mass = s.lq_mass;
  r.lq1_mass = power_integral(s.f, q + 1.0);
  r.dt = s.last_dt;
  r.boundary_max = boundary_fraction(s.f);
  const auto terms = dissipation_terms(s.f, cfg.alpha, c_hls, cfg.drift_factor);
  r.dissipation_i = terms.I;
  r.dissipation_ii = terms.II;
  const auto v = s.f.values();
  r.min_density = *std::min_element(v.begin(), v.end());
  r.peak_density = s.f.max_value();
  return r;
}

/// Integrate from the configured initial profile to t_end, recording at the
/// cadence. Numerical aborts end the run early with `aborted` set; the partial
/// trace is kept. `on_record` sees every recorded state.
inline RunResult run(const SolverConfig& cfg, const std::function<void(const FlowState&)>& on_record = {}) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const double c_hls = resolve_c_hls(cfg);
  auto grid = make_grid(cfg.make_grid());
  FlowState state(initial_profile(cfg, grid), 0.0, cfg.alpha, c_hls);

  EnergyTrace trace;
  trace.d = cfg.d;
  trace.alpha = cfg.alpha;
  trace.c_hls = c_hls;
  trace.drift_factor = cfg.drift_factor;
  trace.cells = grid->size();
  trace.r_max = grid->r_max();
  {
    const auto e = grid->edges();
    for (std::size_t i = 0; i + 1 < e.size(); ++i) trace.dr_max = std::max(trace.dr_max, e[i + 1] - e[i]);
  }

  const auto times = output_times(cfg.cadence, cfg.t_end);
  auto record = [&](const FlowState& s) {
    trace.records.push_back(make_record(s, cfg, c_hls));
    if (trace.records.back().boundary_max > cfg.boundary_tol) trace.domain_truncated = true;
    if (on_record) on_record(s);
  };
  record(state);
  try {
    for (std::size_t k = 1; k < times.size(); ++k) {
      const double target = times[k];
      while (state.t < target) {
        if (trace.steps >= cfg.max_steps) throw NumericalAbort("step budget exhausted at t = " + std::to_string(state.t));
        auto out = step(state, cfg, c_hls, target);
        trace.floor_clamps += out.floor_clamps;
        // The last step of an interval lands on the target exactly.
        if (target - out.state.t < 1e-14 * std::max(1.0, target)) out.state.t = target;
        trace.dt_max_used = std::max(trace.dt_max_used, out.state.last_dt);
        state = std::move(out.state);
        ++trace.steps;
      }
      record(state);
    }
  } catch (const NumericalAbort& e) {
    trace.aborted = true;
    trace.abort_reason = e.what();
    record(state);
  }
  trace.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(trace), std::move(state)};
}

}  // namespace hlsflow
