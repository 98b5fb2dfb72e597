#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hlsflow/energy.hpp"
#include "hlsflow/error.hpp"
#include "hlsflow/hls_constant.hpp"
#include "hlsflow/potential.hpp"
#include "hlsflow/radial.hpp"

namespace hlsflow {

enum class ProfileKind { gaussian, extremizer_h, uniform_ball, custom_table };

inline std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::gaussian: return "gaussian";
    case ProfileKind::extremizer_h: return "extremizer_h";
    case ProfileKind::uniform_ball: return "uniform_ball";
    case ProfileKind::custom_table: return "custom_table";
  }
  return "unknown";
}

inline ProfileKind profile_from_string(const std::string& s) {
  if (s == "gaussian") return ProfileKind::gaussian;
  if (s == "extremizer_h") return ProfileKind::extremizer_h;
  if (s == "uniform_ball") return ProfileKind::uniform_ball;
  if (s == "custom_table") return ProfileKind::custom_table;
  throw InvalidArgument("unknown profile '" + s + "'");
}

enum class FloorPolicy { clamp, abort };

struct ProfileSpec {
  ProfileKind kind = ProfileKind::gaussian;
  double mass = 1.0;
  /// Gaussian width, extremizer scale, or ball radius.
  double width = 1.0;
  /// (r, f) samples for custom_table, linearly interpolated and zero past the last node.
  std::vector<std::pair<double, double>> table;
};

/// Output times: t = 0, then `per_decade` log-spaced times from `first` up to
/// t_end, or a uniform spacing when `interval` > 0. t_end is always included.
struct OutputCadence {
  double first = 1e-3;
  std::size_t per_decade = 40;
  double interval = 0.0;
};

struct SolverConfig {
  int d = 3;
  double alpha = 0.0;
  std::size_t cells = 1024;
  double r_max = 40.0;
  double stretch = 1.0;
  ProfileSpec profile;
  double t_end = 1.0;
  double cfl = 0.5;
  /// 1 integrates the PDE as written; 2 uses the first variation of the quadratic Coulomb term.
  int drift_factor = 1;
  OutputCadence cadence;
  /// Supplied C_HLS (Newtonian normalization); computed by quadrature when empty.
  std::optional<double> c_hls;
  FloorPolicy floor = FloorPolicy::clamp;
  std::uint64_t seed = 0;
  double dt_min = 1e-12;
  /// When > 0 every step uses this dt (it must respect the stability bound).
  double dt_fixed = 0.0;
  std::size_t max_steps = 200'000'000;
  double t_burn_fraction = 0.05;
  /// Density in the outer 5% of cells above this fraction of the peak flags truncation.
  double boundary_tol = 1e-6;

  void validate() const {
    require(d >= 3, "config: d must be >= 3");
    require(alpha >= 0.0 && std::isfinite(alpha), "config: alpha must be finite and >= 0");
    require(t_end > 0.0, "config: T must be positive");
    require(cfl > 0.0 && cfl <= 1.0, "config: CFL factor must lie in (0, 1]");
    require(drift_factor == 1 || drift_factor == 2, "config: drift_factor must be 1 or 2");
    require(cells >= 4, "config: need at least 4 cells");
    require(r_max > 0.0, "config: r_max must be positive");
    require(stretch >= 1.0, "config: stretch must be >= 1");
    require(profile.mass > 0.0, "config: profile mass must be positive");
    require(profile.width > 0.0, "config: profile width must be positive");
    require(dt_min > 0.0, "config: dt_min must be positive");
    require(dt_fixed >= 0.0, "config: dt_fixed must be >= 0");
    require(!c_hls || *c_hls > 0.0, "config: supplied C_HLS must be positive");
    require(cadence.interval > 0.0 || (cadence.first > 0.0 && cadence.per_decade > 0),
            "config: invalid output cadence");
    require(t_burn_fraction >= 0.0 && t_burn_fraction < 1.0, "config: t_burn fraction must lie in [0, 1)");
  }

  RadialGrid make_grid() const { return RadialGrid::stretched(d, cells, r_max, stretch); }
};

inline double resolve_c_hls(const SolverConfig& cfg) { return cfg.c_hls ? *cfg.c_hls : chls(cfg.d).value; }

/// f_0 on the configured grid, scaled to the requested mass. Rejects
/// profiles without positive finite mass, second moment and free energy.
inline RadialDensity initial_profile(const SolverConfig& cfg, GridPtr grid) {
  cfg.validate();
  require(grid->dimension() == cfg.d, "initial_profile: grid dimension mismatch");
  const auto& p = cfg.profile;
  const int d = cfg.d;
  const double w = p.width;
  RadialDensity f = RadialDensity::zero(grid);
  switch (p.kind) {
    case ProfileKind::gaussian:
      f = RadialDensity::cell_averages(grid, [&](double r) { return std::exp(-r * r / (w * w)); });
      break;
    case ProfileKind::extremizer_h:
      f = RadialDensity::cell_averages(grid, [&](double r) { return hls_extremizer(d, r / w); });
      break;
    case ProfileKind::uniform_ball: {
      const auto e = grid->edges();
      const auto v = grid->volumes();
      const double sigma = grid->sphere_area();
      std::vector<double> vals(grid->size(), 0.0);
      for (std::size_t i = 0; i < vals.size(); ++i) {
        const double top = std::min(e[i + 1], w);
        if (top > e[i]) vals[i] = sigma * power_difference(e[i], top, d) / d / v[i];
      }
      f = RadialDensity(grid, std::move(vals));
      break;
    }
    case ProfileKind::custom_table: {
      const auto& t = p.table;
      require(t.size() >= 2, "initial_profile: custom table needs at least two rows");
      for (std::size_t i = 0; i < t.size(); ++i) {
        require(std::isfinite(t[i].first) && std::isfinite(t[i].second), "initial_profile: non-finite table entry");
        require(t[i].second >= 0.0, "initial_profile: negative density in table");
        require(i == 0 || t[i].first > t[i - 1].first, "initial_profile: table radii must increase");
      }
      require(t.front().first >= 0.0, "initial_profile: table radii must be >= 0");
      auto interp = [&](double r) {
        if (r <= t.front().first) return t.front().second;
        if (r >= t.back().first) return 0.0;
        auto it = std::upper_bound(t.begin(), t.end(), r, [](double x, const auto& row) { return x < row.first; });
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double s = (r - lo.first) / (hi.first - lo.first);
        return lo.second + s * (hi.second - lo.second);
      };
      f = RadialDensity::cell_averages(grid, interp);
      break;
    }
  }
  const double m = mass(f);
  require(m > 0.0 && std::isfinite(m), "initial_profile: profile has no mass on the grid");
  f = f.scaled(p.mass / m);
  require(std::isfinite(second_moment(f)), "initial_profile: second moment is not finite");
  const auto e = energy(f, cfg.alpha, resolve_c_hls(cfg));
  require(std::isfinite(e.total), "initial_profile: free energy is not finite");
  return f;
}

inline RadialDensity initial_profile(const SolverConfig& cfg) { return initial_profile(cfg, make_grid(cfg.make_grid())); }

/// Density together with the quantities every step and record reuses.
struct FlowState {
  RadialDensity f;
  double t = 0.0;
  double mass = 0.0;
  /// ||f||_{2d/(d+2)}
  double norm = 0.0;
  /// int f^{2d/(d+2)}
  double lq_mass = 0.0;
  std::vector<double> enclosed;
  std::vector<double> g;  // f^{2d/(d+2)} per cell
  EnergyBreakdown energy;
  double last_dt = 0.0;

  FlowState(RadialDensity density, double time, double alpha, double c_hls)
      : f(std::move(density)), t(time) {
    const int d = f.grid().dimension();
    const double m = energy_exponent(d);
    const auto v = f.grid().volumes();
    g.resize(f.size());
    double s = 0.0;
    double ms = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      g[i] = f[i] > 0.0 ? std::pow(f[i], m) : 0.0;
      s += g[i] * v[i];
      ms += f[i] * v[i];
    }
    lq_mass = s;
    mass = ms;
    norm = std::pow(s, 1.0 / m);
    enclosed = cumulative_mass(f);
    energy = energy_from_parts(norm * norm, coulomb_energy(f, enclosed), alpha, c_hls);
  }
};

/// Frozen prefactor A = ((d-2)/d) ||f||^{4/(d+2)}.
inline double diffusion_prefactor(const FlowState& s) {
  const double d = s.f.grid().dimension();
  return ((d - 2.0) / d) * std::pow(s.norm, 4.0 / (d + 2.0));
}

/// Radial drift velocity A * grad c at each edge, -drift_factor * kappa * M / (sigma r^{d-1}).
inline std::vector<double> drift_velocity(const FlowState& s, const SolverConfig& cfg, double kappa) {
  const auto sf = s.f.grid().surfaces();
  std::vector<double> v(sf.size(), 0.0);
  if (kappa == 0.0) return v;
  for (std::size_t e = 1; e + 1 < sf.size(); ++e) v[e] = -cfg.drift_factor * kappa * s.enclosed[e] / sf[e];
  return v;
}

struct StepLimits {
  double diffusive = std::numeric_limits<double>::infinity();
  double advective = std::numeric_limits<double>::infinity();
  double combined = std::numeric_limits<double>::infinity();
};

/// Per-cell outflow rates bounding positivity and linear stability of the explicit step.
inline StepLimits step_limits(const FlowState& s, const SolverConfig& cfg, double kappa) {
  const auto& grid = s.f.grid();
  const auto n = grid.size();
  const auto c = grid.centers();
  const auto sf = grid.surfaces();
  const auto vol = grid.volumes();
  const double m = energy_exponent(grid.dimension());
  const double a = diffusion_prefactor(s);
  const double diff_coef = a * m * std::pow(s.f.max_value(), m - 1.0);
  const auto vel = drift_velocity(s, cfg, kappa);
  double max_diff = 0.0;
  double max_adv = 0.0;
  double max_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double geo = 0.0;
    if (i > 0) geo += sf[i] / (c[i] - c[i - 1]);
    if (i + 1 < n) geo += sf[i + 1] / (c[i + 1] - c[i]);
    const double rd = diff_coef * geo / vol[i];
    // Limited reconstruction lets a donor export up to twice its average.
    double ra = 0.0;
    if (i > 0 && vel[i] < 0.0) ra += 2.0 * -vel[i] * sf[i] / vol[i];
    if (i + 1 < n && vel[i + 1] > 0.0) ra += 2.0 * vel[i + 1] * sf[i + 1] / vol[i];
    max_diff = std::max(max_diff, rd);
    max_adv = std::max(max_adv, ra);
    max_sum = std::max(max_sum, rd + ra);
  }
  StepLimits lim;
  if (max_diff > 0.0) lim.diffusive = 1.0 / max_diff;
  if (max_adv > 0.0) lim.advective = 1.0 / max_adv;
  if (max_sum > 0.0) lim.combined = 1.0 / max_sum;
  return lim;
}

/// CFL-controlled time step; throws NumericalAbort below cfg.dt_min.
inline double dt_cfl(const FlowState& s, const SolverConfig& cfg, double kappa) {
  require(s.mass > 0.0, "dt_cfl: zero-mass state");
  const double dt = cfg.cfl * step_limits(s, cfg, kappa).combined;
  if (!(dt >= cfg.dt_min)) {
    throw NumericalAbort("CFL step " + std::to_string(dt) + " fell below dt_min at t = " + std::to_string(s.t) +
                         " (suspected concentration)");
  }
  return dt;
}

inline double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

/// Net outward flux through each edge (zero at r = 0 and r = R_max):
/// nonlinear diffusion of f^{2d/(d+2)} plus drift of a minmod-limited upwind face value.
inline std::vector<double> edge_fluxes(const FlowState& s, const SolverConfig& cfg, double kappa) {
  const auto& grid = s.f.grid();
  const auto n = grid.size();
  const auto c = grid.centers();
  const auto e = grid.edges();
  const auto sf = grid.surfaces();
  const auto f = s.f.values();
  const double a = diffusion_prefactor(s);
  const auto vel = drift_velocity(s, cfg, kappa);
  auto slope = [&](std::size_t i) {
    if (i == 0 || i + 1 >= n) return 0.0;
    return minmod((f[i + 1] - f[i]) / (c[i + 1] - c[i]), (f[i] - f[i - 1]) / (c[i] - c[i - 1]));
  };
  std::vector<double> flux(n + 1, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    double fl = -a * (s.g[k] - s.g[k - 1]) / (c[k] - c[k - 1]);
    if (vel[k] < 0.0) {
      fl += vel[k] * (f[k] + slope(k) * (e[k] - c[k]));
    } else if (vel[k] > 0.0) {
      fl += vel[k] * (f[k - 1] + slope(k - 1) * (e[k] - c[k - 1]));
    }
    flux[k] = sf[k] * fl;
  }
  return flux;
}

struct StepOutcome {
  FlowState state;
  std::size_t floor_clamps = 0;
};

/// Advance by dt (already chosen) with the flux-difference update.
inline StepOutcome advance(const FlowState& s, const SolverConfig& cfg, double c_hls, double dt) {
  require(s.mass > 0.0, "step: zero-mass state");
  const double kappa = cfg.alpha / c_hls;
  const auto flux = edge_fluxes(s, cfg, kappa);
  const auto vol = s.f.grid().volumes();
  const auto f = s.f.values();
  std::vector<double> next(f.size());
  std::size_t clamps = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double v = f[i] - dt * (flux[i + 1] - flux[i]) / vol[i];
    if (!std::isfinite(v)) throw NumericalAbort("non-finite density at t = " + std::to_string(s.t));
    if (v < 0.0) {
      if (cfg.floor == FloorPolicy::abort) {
        throw NumericalAbort("negative density at t = " + std::to_string(s.t));
      }
      v = 0.0;
      ++clamps;
    }
    next[i] = v;
  }
  StepOutcome out{FlowState(RadialDensity(s.f.grid_ptr(), std::move(next)), s.t + dt, cfg.alpha, c_hls), clamps};
  out.state.last_dt = dt;
  return out;
}

/// One CFL-controlled step, never past t_limit.
inline StepOutcome step(const FlowState& s, const SolverConfig& cfg, double c_hls,
                        double t_limit = std::numeric_limits<double>::infinity()) {
  require(s.mass > 0.0, "step: zero-mass state");
  const double kappa = cfg.alpha / c_hls;
  double dt = dt_cfl(s, cfg, kappa);
  if (cfg.dt_fixed > 0.0) {
    if (cfg.dt_fixed > dt / cfg.cfl) {
      throw NumericalAbort("fixed dt exceeds the stability bound at t = " + std::to_string(s.t));
    }
    dt = cfg.dt_fixed;
  }
  if (s.t + dt > t_limit) dt = t_limit - s.t;
  return advance(s, cfg, c_hls, dt);
}

}  // namespace hlsflow
