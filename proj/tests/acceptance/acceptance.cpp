// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "hlsflow/constants_report.hpp"
#include "hlsflow/diagnostics.hpp"
#include "hlsflow/dissipation.hpp"
#include "hlsflow/potential.hpp"
#include "hlsflow/run.hpp"
#include "hlsflow/trace_io.hpp"
#include "../unit/oracles.hpp"

using namespace hlsflow;
using std::numbers::pi;

namespace {

struct Line {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<Line> g_lines;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void report(int id, std::string name, bool passed, std::string detail) {
  std::printf("%s  %2d  %s  %s\n", passed ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  g_lines.push_back({id, std::move(name), passed, std::move(detail)});
}

void info(const std::string& s) {
  std::printf("INFO      %s\n", s.c_str());
  std::fflush(stdout);
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Shared state for the long runs.
ConstantsReport g_c3;

struct LongRun {
  double alpha = 0.0;
  SolverConfig cfg;
  EnergyTrace trace;
  std::vector<double> dt_at_record;
};

SolverConfig long_config(double alpha) {
  SolverConfig c;
  c.d = 3;
  c.alpha = alpha;
  c.cells = 1024;
  c.r_max = 40.0;
  c.t_end = 1000.0;
  c.c_hls = g_c3.hls.value;
  c.cadence.first = 1e-3;
  c.cadence.per_decade = 200;
  return c;
}

LongRun long_run(double alpha) {
  LongRun r;
  r.alpha = alpha;
  r.cfg = long_config(alpha);
  const double kappa = alpha / g_c3.hls.value;
  auto res = run(r.cfg, [&](const FlowState& s) { r.dt_at_record.push_back(dt_cfl(s, r.cfg, kappa)); });
  r.trace = std::move(res.trace);
  return r;
}

/// Volume-weighted L1 distance after restricting `fine` (2N cells) onto `coarse` (N cells).
double restricted_l1(const RadialDensity& coarse, const RadialDensity& fine) {
  const auto vc = coarse.grid().volumes();
  const auto vf = fine.grid().volumes();
  double s = 0.0;
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    const double avg = (fine[2 * i] * vf[2 * i] + fine[2 * i + 1] * vf[2 * i + 1]) / (vf[2 * i] + vf[2 * i + 1]);
    s += std::abs(coarse[i] - avg) * vc[i];
  }
  return s;
}

double l1(const RadialDensity& a, const RadialDensity& b) {
  const auto v = a.grid().volumes();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]) * v[i];
  return s;
}

/// Fixed-dt integration to exactly t_end.
RadialDensity integrate_fixed(SolverConfig cfg, double dt, double t_end) {
  const double c_hls = resolve_c_hls(cfg);
  FlowState s(initial_profile(cfg), 0.0, cfg.alpha, c_hls);
  const auto n = static_cast<std::size_t>(std::llround(t_end / dt));
  const double kappa = cfg.alpha / c_hls;
  for (std::size_t k = 0; k < n; ++k) {
    if (dt > dt_cfl(s, cfg, kappa) / cfg.cfl) throw NumericalAbort("integrate_fixed: dt above the stability bound");
    s = advance(s, cfg, c_hls, dt).state;
  }
  return s.f;
}

// 1 ------------------------------------------------------------------------
void criterion1() {
  auto g = make_grid(RadialGrid::uniform(3, 1024, 2.0));
  std::vector<double> v(1024, 0.0);
  for (std::size_t i = 0; i < 512; ++i) v[i] = 1.0;
  const RadialDensity f(g, v);
  const auto u = newtonian_potential(f);
  const double m = mass(f);
  double worst = std::abs(u.value_at(0.0) - 0.5) / 0.5;
  for (double r : {1.0, 1.25, 1.5, 2.0, 5.0, 100.0}) {
    const double ref = m / (4.0 * pi * r);
    worst = std::max(worst, std::abs(u.value_at(r) - ref) / ref);
  }
  report(1, "potential oracle (uniform ball, d=3, N=1024)", worst < 1e-6, fmt("max rel err %.3e < 1e-6", worst));
}

// 2 ------------------------------------------------------------------------
void criterion2() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0;
  for (int d : {3, 4}) {
    auto g = make_grid(RadialGrid::stretched(d, 256, 6.0, 4.0));
    std::vector<double> v(256);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-g->centers()[i]) * (0.5 + unif(rng));
    const RadialDensity f(g, v);
    const std::vector<double> edges(g->edges().begin(), g->edges().end());
    const double ref = oracle::coulomb_double_sum(d, edges, v);
    worst = std::max(worst, std::abs(coulomb_energy(f) - ref) / ref);
  }
  report(2, "Coulomb form vs O(N^2) kernel double sum (N=256, d=3,4)", worst < 1e-8,
         fmt("max rel diff %.3e < 1e-8", worst));
}

// 3 ------------------------------------------------------------------------
void criterion3() {
  const auto& c = g_c3;
  const auto mc = oracle::mc_radial_double_integral(3, [](double r) { return hls_extremizer(3, r); }, 4'000'000, 2024);
  const double sigma = oracle::sphere_area(3);
  const double denom = std::pow(
      sigma * oracle::simpson_half_line([](double r) { return std::pow(hls_extremizer(3, r), 1.2) * r * r; }), 2.0 / 1.2);
  const double mc_val = sigma * sigma * mc.mean / denom;
  const double mc_se = sigma * sigma * mc.stderr_ / denom;
  const double z = std::abs(c.hls.kernel_value - mc_val) / mc_se;
  const double lieb = oracle::lieb_kernel_constant(3);
  const double lieb_rel = std::abs(c.hls.kernel_value - lieb) / lieb;
  const bool hls_ok = z < 3.0 && lieb_rel <= std::max(c.hls.error / c.hls.value, 1e-10) * 10.0;

  const GnsOptions opts;
  const auto fine = cgns(1.2, 3, RadialGrid::uniform(3, 2 * c.gns_cells, c.gns_r_max), opts);
  const auto wide = cgns(1.2, 3, RadialGrid::uniform(3, 2 * c.gns_cells, 2.0 * c.gns_r_max), opts);
  const double dg = std::abs(fine.value / c.gns.value - 1.0);
  const double dr = std::abs(wide.value / c.gns.value - 1.0);
  const bool gns_ok = dg < 0.01 && dr < 0.01;
  const bool flag_ok = (c.alpha0 > 0.0 && c.alpha0 < 1.0) || c.alpha0_flagged();
  report(3, "constants sanity (C_HLS vs Monte Carlo and closed form, C_GNS stability, alpha0 flag)",
         hls_ok && gns_ok && flag_ok,
         fmt("MC z=%.2f, closed-form rel %.1e, C_GNS=%.6f grid %.2e radius %.2e, alpha0=%.4f flagged=%s", z, lieb_rel,
             c.gns.value, dg, dr, c.alpha0, c.alpha0_flagged() ? "yes" : "no"));
  info(fmt("C_HLS=%.15f (kernel form %.13f), alpha0 with PDE prefactor %.4f, alpha ceiling %.1f", c.hls.value,
           c.hls.kernel_value, c.alpha0_from_pde, c.alpha_ceiling()));
}

// 4 ------------------------------------------------------------------------
void criterion4() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto g3 = make_grid(RadialGrid::uniform(3, 128, 8.0));
  auto g4 = make_grid(RadialGrid::stretched(4, 128, 8.0, 6.0));
  const double c4 = chls(4).value;
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    auto g = k % 2 ? g4 : g3;
    std::vector<double> v(g->size());
    const double w = 0.3 + 3.0 * u(rng);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double r = g->centers()[i];
      v[i] = std::exp(-r * r / (w * w)) * (0.2 + u(rng)) + (u(rng) < 0.05 ? 2.0 * u(rng) : 0.0);
    }
    const auto e = energy(RadialDensity(g, v), 2.0 * u(rng), k % 2 ? c4 : g_c3.hls.value);
    worst = std::max(worst, std::abs(e.total - e.alt_total) / e.scale());
  }
  report(4, "two expressions of E_alpha (200 random densities and alpha)", worst < 1e-10,
         fmt("max rel diff %.3e < 1e-10", worst));
}

// 5 ------------------------------------------------------------------------
void criterion5(const std::vector<LongRun>& runs) {
  bool ok = true;
  std::string detail;
  for (const auto& r : runs) {
    const auto m = mass_check(r.trace);
    const auto e = energy_dissipation_check(r.trace);
    const auto q = lq_monotonicity_check(r.trace);
    const bool clean = !r.trace.aborted && !r.trace.domain_truncated && r.trace.floor_clamps == 0;
    ok = ok && m.passed && e.passed && q.passed && clean;
    detail += fmt("[alpha=%.2f mass %.1e, E rise %.1e (%s), lq rise %.1e, steps %zu, clamps %zu%s] ", r.alpha, m.worst,
                  e.worst, e.detail.c_str(), q.worst, r.trace.steps, r.trace.floor_clamps,
                  r.trace.domain_truncated ? ", truncated" : "");
  }
  report(5, "conservation and dissipation (d=3, alpha in {0, 0.5 ceiling}, T=1000)", ok, detail);
}

// 6 ------------------------------------------------------------------------
/// Identity residual coefficients from fixed-dt refinement: e = D - (I+II) = c1 dt + c2 h^2.
struct IdentityConstants {
  double c1 = 0.0;
  double c2 = 0.0;
};

IdentityConstants measure_identity_constants(double alpha) {
  SolverConfig base = long_config(alpha);
  base.t_end = 5.0;
  base.cadence.interval = 0.02;
  auto residuals = [&](std::size_t cells, double dt) {
    SolverConfig c = base;
    c.cells = cells;
    c.dt_fixed = dt;
    const auto t = run(c).trace;
    if (t.aborted) throw NumericalAbort("identity refinement run aborted: " + t.abort_reason);
    std::vector<double> e;
    for (const auto& rec : rate_check(t, 0.0)) {
      e.push_back((rec.derivative - (rec.dissipation_i + rec.dissipation_ii)) /
                  (std::abs(rec.dissipation_i) + std::abs(rec.dissipation_ii)));
    }
    return e;
  };
  // The pair brackets the production grid (1024 cells).
  const std::size_t n = 512;
  const double h = base.r_max / n;
  // Stable on the finer grid; divides the record interval.
  const double dt = 0.02 / 20.0;
  const auto a = residuals(n, dt);
  const auto b = residuals(2 * n, dt);
  const auto c = residuals(n, dt / 2.0);
  IdentityConstants k;
  for (std::size_t i = 0; i < a.size(); ++i) {
    k.c2 = std::max(k.c2, std::abs(a[i] - b[i]) / (0.75 * h * h));
    k.c1 = std::max(k.c1, std::abs(a[i] - c[i]) / (dt / 2.0));
  }
  return k;
}

void criterion6(const std::vector<LongRun>& runs) {
  bool rate_ok = true;
  bool identity_ok = true;
  std::string detail;
  for (const auto& r : runs) {
    const double k_pub = g_c3.k(r.alpha);
    const auto recs = rate_check(r.trace, k_pub);
    const auto s = summarize_rate(recs);
    rate_ok = rate_ok && s.passed;

    const auto ic = measure_identity_constants(r.alpha);
    const double dr = r.trace.dr_max;
    double worst_ratio = 0.0;
    double worst_rel = 0.0;
    for (std::size_t k = 0; k < recs.size(); ++k) {
      const double rel = recs[k].relative_identity_residual();
      // recs[k] sits at trace record k + 1.
      const double allowed = ic.c1 * r.dt_at_record[k + 1] + ic.c2 * dr * dr;
      worst_rel = std::max(worst_rel, rel);
      worst_ratio = std::max(worst_ratio, rel / allowed);
    }
    identity_ok = identity_ok && worst_ratio <= 1.0;
    detail += fmt("[alpha=%.2f K=%.5f min slack/|B| %.4f, identity max %.2e, max residual/(c1 dt + c2 dr^2) %.3f] ",
                  r.alpha, k_pub, s.worst, worst_rel, worst_ratio);
    info(fmt("alpha=%.2f identity constants (relative to |I|+|II|): c1 = %.4e, c2 = %.4e", r.alpha, ic.c1, ic.c2));
    const double k_pde = g_c3.k(r.alpha, Prefactor::from_pde);
    const auto sp = summarize_rate(rate_check(r.trace, k_pde));
    info(fmt("alpha=%.2f rate bound with the prefactor recomputed from the PDE: K=%.5f, min slack/|B| %.4f (%s)", r.alpha,
             k_pde, sp.worst, sp.passed ? "holds" : "fails"));
  }
  report(6, "dissipation rate-bound slack and identity residual (criterion-5 runs)", rate_ok && identity_ok, detail);
}

// 7 ------------------------------------------------------------------------
void criterion7() {
  double worst = 0.0;
  for (int d : {3, 4}) {
    for (double w : {0.5, 1.0, 2.0}) {
      auto g = make_grid(RadialGrid::uniform(d, 2000, 8.0 * std::max(1.0, w)));
      const auto f = RadialDensity::cell_averages(g, [w](double r) { return std::exp(-r * r / (w * w)); });
      worst = std::max(worst, substitution_check(f, 0.5, g_c3.hls.value).residual);
    }
  }
  std::vector<double> res;
  for (std::size_t n : {25, 50, 100, 200}) {
    auto g = make_grid(RadialGrid::uniform(3, n, 6.0));
    res.push_back(substitution_check(RadialDensity::cell_averages(g, [](double r) { return std::exp(-r * r); }), 0.5,
                                     g_c3.hls.value)
                      .residual);
  }
  double min_order = 1e300;
  for (std::size_t k = 0; k + 1 < res.size(); ++k) min_order = std::min(min_order, std::log2(res[k] / res[k + 1]));
  report(7, "substitution bookkeeping (f-route vs u-route)", worst < 1e-8 && min_order >= 2.0,
         fmt("max rel diff %.3e < 1e-8, min observed order %.2f >= 2", worst, min_order));
}

// 8 ------------------------------------------------------------------------
void criterion8(const LongRun& r) {
  const double k = g_c3.k(r.alpha);
  const auto rep = averaging_iteration_check(r.trace, r.alpha, k, r.trace.records.front().mass);
  double worst_half = std::numeric_limits<double>::infinity();
  for (const auto& p : rep.pairs) {
    worst_half = std::min(worst_half, (p.iteration_rhs_half_mass - p.iteration_lhs) / p.iteration_rhs_half_mass);
  }
  report(8, "iteration chain (d=3, alpha=0.1 ceiling, dyadic pairs)",
         rep.average.passed && rep.norm.passed && rep.iteration.passed,
         fmt("%zu pairs, min rel slack: time average %.4f, norm-energy %.4f, iteration %.4f (K=%.5f)", rep.pairs.size(),
             rep.average.worst, rep.norm.worst, rep.iteration.worst, k));
  info(fmt("iteration bound with M^{1/2} instead of the derived mass power: min rel slack %.4f (M = %.3g)", worst_half,
           r.trace.records.front().mass));
  const double kp = g_c3.k(r.alpha, Prefactor::from_pde);
  const auto rp = averaging_iteration_check(r.trace, r.alpha, kp, r.trace.records.front().mass);
  info(fmt("iteration chain with the prefactor recomputed from the PDE (K=%.5f): min rel slack %.4f / %.4f / %.4f", kp,
           rp.average.worst, rp.norm.worst, rp.iteration.worst));
}

// 9 ------------------------------------------------------------------------
void criterion9(const std::vector<LongRun>& runs) {
  bool ok = true;
  std::string detail;
  for (const auto& r : runs) {
    const auto fit = decay_fit(r.trace, r.cfg.t_burn_fraction);
    const bool bounded = std::isfinite(fit.compensated_sup) && fit.compensated_sup > 0.0;
    ok = ok && bounded && decay_check(fit).passed;
    detail += fmt("[alpha=%.2f window [%.0f, %.0f], sup t^{1/3}E %.4f (start %.4f), final-decade ripple %.4f, fitted rate %.4f] ",
                  r.alpha, fit.t_lo, fit.t_hi, fit.compensated_sup, fit.compensated_start, fit.final_decade_ripple,
                  fit.exponent);
  }
  report(9, "compensated energy t^{(d-2)/d} E bounded and nonincreasing (criterion-5 runs)", ok, detail);
}

// 10 -----------------------------------------------------------------------
void criterion10() {
  SolverConfig c;
  c.d = 3;
  c.alpha = 0.0;
  c.r_max = 8.0;
  c.c_hls = g_c3.hls.value;
  const double t_end = 0.5;

  // Spatial: N, 2N, 4N with a common small dt stable on the finest grid.
  const std::size_t n = 64;
  const double dt_s = t_end / 20000.0;
  std::vector<RadialDensity> sols;
  for (std::size_t m : {n, 2 * n, 4 * n}) {
    c.cells = m;
    sols.push_back(integrate_fixed(c, dt_s, t_end));
  }
  const double e1 = restricted_l1(sols[0], sols[1]);
  const double e2 = restricted_l1(sols[1], sols[2]);
  const double p_space = std::log2(e1 / e2);

  // Temporal: dt, dt/4, dt/16 on a fixed grid.
  c.cells = 128;
  const double dt_t = t_end / 250.0;
  const auto a = integrate_fixed(c, dt_t, t_end);
  const auto b = integrate_fixed(c, dt_t / 4.0, t_end);
  const auto d = integrate_fixed(c, dt_t / 16.0, t_end);
  const double p_time = std::log(l1(a, b) / l1(b, d)) / std::log(4.0);
  report(10, "self-convergence at alpha=0 (grid doubling, dt quartering)", p_space >= 1.8 && p_time >= 0.9,
         fmt("spatial order %.3f >= 1.8 (L1 diffs %.2e, %.2e), temporal order %.3f >= 0.9", p_space, e1, e2, p_time));
}

// 11 -----------------------------------------------------------------------
void criterion11() {
  SolverConfig c;
  c.d = 3;
  c.alpha = 0.3;
  c.cells = 200;
  c.r_max = 20.0;
  c.t_end = 20.0;
  c.seed = 7;
  c.c_hls = g_c3.hls.value;
  const auto a = trace_csv(run(c).trace);
  const auto b = trace_csv(run(c).trace);
  report(11, "determinism (byte-identical trace CSV)", a == b && !a.empty(),
         fmt("%zu bytes, %s", a.size(), a == b ? "identical" : "differ"));
}

void guarded(int id, const char* name, const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  g_c3 = compute_constants(3);

  guarded(1, "potential oracle", criterion1);
  guarded(2, "Coulomb form", criterion2);
  guarded(3, "constants sanity", criterion3);
  guarded(4, "two expressions of E_alpha", criterion4);

  std::vector<LongRun> runs;
  try {
    const double ceil = g_c3.alpha_ceiling();
    runs.push_back(long_run(0.0));
    runs.push_back(long_run(0.5 * ceil));
    info(fmt("criterion-5 runs finished after %.1f s", elapsed(t0)));
  } catch (const std::exception& e) {
    info(std::string("long runs failed: ") + e.what());
  }
  if (runs.size() == 2) {
    guarded(5, "conservation and dissipation", [&] { criterion5(runs); });
    guarded(6, "dissipation rate bound", [&] { criterion6(runs); });
  } else {
    report(5, "conservation and dissipation", false, "runs unavailable");
    report(6, "dissipation rate bound", false, "runs unavailable");
  }
  guarded(7, "substitution bookkeeping", criterion7);
  guarded(8, "iteration chain", [&] { criterion8(long_run(0.1 * g_c3.alpha_ceiling())); });
  if (runs.size() == 2) {
    guarded(9, "compensated energy", [&] { criterion9(runs); });
  } else {
    report(9, "compensated energy", false, "runs unavailable");
  }
  guarded(10, "self-convergence", criterion10);
  guarded(11, "determinism", criterion11);

  int failed = 0;
  for (const auto& l : g_lines) failed += l.passed ? 0 : 1;
  std::printf("%d of %zu criteria passed (%.0f s)\n", static_cast<int>(g_lines.size()) - failed, g_lines.size(),
              elapsed(t0));
  return failed == 0 ? 0 : 1;
}
