#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hlsflow/radial.hpp"

namespace hlsflow {

/// Lebesgue exponents and weights of the GNS inequality
///   ||u||_b <= C ||u||_a^{theta_a} ||grad u||_2^{theta_grad}
/// attached to the L^q dissipation estimate.
struct GnsExponents {
  double q = 0.0;
  int d = 0;
  double a = 0.0;
  double b = 0.0;
  double theta_a = 0.0;
  double theta_grad = 0.0;
};

inline GnsExponents gns_exponents(double q, int d) {
  require(d >= 3, "gns_exponents: dimension must be >= 3");
  require(q > 1.0, "gns_exponents: q must be > 1");
  const double dd = d;
  const double denom = q * (dd + 2.0) + dd - 2.0;
  GnsExponents ex;
  ex.q = q;
  ex.d = d;
  ex.a = 4.0 * dd / denom;
  ex.b = 2.0 * (q + 1.0) * (dd + 2.0) / denom;
  ex.theta_a = 4.0 / ((q + 1.0) * (dd + 2.0));
  ex.theta_grad = denom / ((q + 1.0) * (dd + 2.0));
  require(ex.a > 0.0 && ex.b > 0.0 && ex.theta_a > 0.0 && ex.theta_grad > 0.0,
          "gns_exponents: exponents are not admissible");
  require(ex.b < 2.0 * dd / (dd - 2.0), "gns_exponents: b must be below the Sobolev exponent");
  return ex;
}

namespace detail {

/// Discrete pieces of the GNS quotient for nodal values at cell centers with
/// u = 0 imposed at R_max.
struct GnsParts {
  double sa = 0.0;  // sum u^a V
  double sb = 0.0;  // sum u^b V
  double grad = 0.0;  // sum_e w_e (jump)^2
};

/// Edge weights w_e = sigma r_e^{d-1} / (distance between neighbouring nodes).
/// Entry e couples node e-1 and e for e = 1..n-1; entry n couples node n-1 to the wall.
inline std::vector<double> gns_edge_weights(const RadialGrid& g) {
  const auto n = g.size();
  const auto c = g.centers();
  const auto s = g.surfaces();
  std::vector<double> w(n + 1, 0.0);
  for (std::size_t e = 1; e < n; ++e) w[e] = s[e] / (c[e] - c[e - 1]);
  w[n] = s[n] / (g.r_max() - c[n - 1]);
  return w;
}

inline GnsParts gns_parts(const RadialGrid& g, std::span<const double> w, std::span<const double> u,
                          const GnsExponents& ex) {
  const auto n = g.size();
  const auto v = g.volumes();
  GnsParts p;
  for (std::size_t i = 0; i < n; ++i) {
    if (u[i] > 0.0) {
      p.sa += std::pow(u[i], ex.a) * v[i];
      p.sb += std::pow(u[i], ex.b) * v[i];
    }
  }
  for (std::size_t e = 1; e < n; ++e) {
    const double j = u[e] - u[e - 1];
    p.grad += w[e] * j * j;
  }
  p.grad += w[n] * u[n - 1] * u[n - 1];
  return p;
}

inline double gns_log_quotient(const GnsParts& p, const GnsExponents& ex) {
  return std::log(p.sb) / ex.b - ex.theta_a * std::log(p.sa) / ex.a - 0.5 * ex.theta_grad * std::log(p.grad);
}

/// Solve the symmetric tridiagonal system (diag, off) x = rhs in place (Thomas algorithm).
/// off[i] couples i-1 and i.
inline void solve_tridiagonal(std::vector<double> diag, std::span<const double> off, std::vector<double>& x) {
  const auto n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = off[i] / diag[i - 1];
    diag[i] -= m * off[i];
    x[i] -= m * x[i - 1];
  }
  x[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (x[i] - off[i + 1] * x[i + 1]) / diag[i];
}

}  // namespace detail

/// GNS quotient ||u||_b / (||u||_a^{theta_a} ||grad u||_2^{theta_grad}) of the
/// nodal function u (cell centers, u = 0 at R_max) on the grid.
inline double gns_quotient(const RadialGrid& g, std::span<const double> u, double q) {
  require(u.size() == g.size(), "gns_quotient: size mismatch");
  std::vector<double> abs_u(u.begin(), u.end());
  for (auto& x : abs_u) x = std::abs(x);
  const auto ex = gns_exponents(q, g.dimension());
  const auto w = detail::gns_edge_weights(g);
  const auto parts = detail::gns_parts(g, w, abs_u, ex);
  require(parts.sb > 0.0 && parts.grad > 0.0, "gns_quotient: function must be nonzero");
  return std::exp(detail::gns_log_quotient(parts, ex));
}

struct GnsOptions {
  std::size_t max_iterations = 6000;
  /// Stop when the relative gain of the log-quotient over `stall_window` iterations drops below this.
  double stall_tol = 1e-12;
  std::size_t stall_window = 200;
  /// Physical width of the deterministic starts.
  double length_scale = 1.0;
  std::size_t random_starts = 3;
  std::uint64_t seed = 12345;
  double spread_tol = 1e-2;
};

struct GnsStart {
  std::string label;
  double value = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
};

struct GnsEstimate {
  double q = 0.0;
  int d = 0;
  double value = 0.0;
  /// Projected Euler-Lagrange residual of the best start.
  double residual = 0.0;
  /// (max - min) / max over starts.
  double spread = 0.0;
  std::size_t iterations = 0;
  bool low_confidence = false;
  std::vector<GnsStart> starts;
  std::vector<double> maximizer;
};

namespace detail {

struct AscentResult {
  double log_value = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
  std::vector<double> u;
};

/// Projected Sobolev-gradient ascent of the log GNS quotient over nonnegative
/// nodal functions. Search directions are preconditioned with (L + M/l^2) and
/// stripped of their dilation component; every iterate is renormalized to max 1.
inline AscentResult gns_ascent(const RadialGrid& g, const GnsExponents& ex, std::vector<double> u,
                               const GnsOptions& opts) {
  const auto n = g.size();
  const auto v = g.volumes();
  const auto c = g.centers();
  const auto w = gns_edge_weights(g);
  const double shift = 1.0 / (opts.length_scale * opts.length_scale);

  std::vector<double> pdiag(n, 0.0);
  std::vector<double> poff(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) pdiag[i] = shift * v[i];
  for (std::size_t e = 1; e < n; ++e) {
    pdiag[e - 1] += w[e];
    pdiag[e] += w[e];
    poff[e] = -w[e];
  }
  pdiag[n - 1] += w[n];
  auto apply_p = [&](std::span<const double> x, std::vector<double>& y) {
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = pdiag[i] * x[i];
      if (i > 0) y[i] += poff[i] * x[i - 1];
      if (i + 1 < n) y[i] += poff[i + 1] * x[i + 1];
    }
  };

  auto normalize = [](std::vector<double>& x) {
    const double m = *std::max_element(x.begin(), x.end());
    for (auto& y : x) y /= m;
  };
  for (auto& x : u) x = std::max(0.0, x);
  normalize(u);

  std::vector<double> grad(n), dir(n), trial(n), xi(n), pxi(n), pdir(n);
  auto parts = gns_parts(g, w, u, ex);
  double value = gns_log_quotient(parts, ex);

  auto gradient = [&](const std::vector<double>& x, const GnsParts& p, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) {
      double gi = 0.0;
      if (x[i] > 0.0) {
        gi = std::pow(x[i], ex.b - 1.0) * v[i] / p.sb - ex.theta_a * std::pow(x[i], ex.a - 1.0) * v[i] / p.sa;
      }
      double lap = 0.0;
      if (i > 0) lap += w[i] * (x[i] - x[i - 1]);
      if (i + 1 < n) lap += w[i + 1] * (x[i] - x[i + 1]);
      else lap += w[n] * x[i];
      out[i] = gi - ex.theta_grad * lap / p.grad;
    }
  };
  auto kkt_residual = [&](const std::vector<double>& x, const std::vector<double>& gr) {
    double rr = 0.0;
    double uu = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double ri = gr[i] / v[i];
      if (x[i] <= 0.0) ri = std::max(0.0, ri);
      rr += ri * ri * v[i];
      uu += x[i] * x[i] * v[i];
    }
    return std::sqrt(rr * uu);
  };

  double step = 1.0;
  std::vector<double> history;
  history.reserve(opts.max_iterations + 1);
  history.push_back(value);
  std::size_t it = 0;
  for (; it < opts.max_iterations; ++it) {
    gradient(u, parts, grad);
    dir = grad;
    solve_tridiagonal(pdiag, poff, dir);
    // Dilation generator r u'(r).
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i > 0 ? i - 1 : 0;
      const double ul = u[lo];
      const double cl = c[lo];
      const double ur = i + 1 < n ? u[i + 1] : 0.0;
      const double cr = i + 1 < n ? c[i + 1] : g.r_max();
      xi[i] = c[i] * (ur - ul) / (cr - cl);
    }
    apply_p(xi, pxi);
    apply_p(dir, pdir);
    double xpx = 0.0;
    double dpx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      xpx += xi[i] * pxi[i];
      dpx += dir[i] * pxi[i];
    }
    if (xpx > 0.0) {
      const double coef = dpx / xpx;
      for (std::size_t i = 0; i < n; ++i) dir[i] -= coef * xi[i];
    }
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) slope += grad[i] * dir[i];
    if (!(slope > 0.0)) break;

    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      double gain_lin = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = std::max(0.0, u[i] + step * dir[i]);
        gain_lin += grad[i] * (trial[i] - u[i]);
      }
      const auto tp = gns_parts(g, w, trial, ex);
      if (tp.sb > 0.0 && tp.grad > 0.0) {
        const double tv = gns_log_quotient(tp, ex);
        if (std::isfinite(tv) && tv >= value + 1e-4 * gain_lin && tv >= value) {
          u.swap(trial);
          normalize(u);
          parts = gns_parts(g, w, u, ex);
          value = gns_log_quotient(parts, ex);
          accepted = true;
          step *= 1.5;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) break;
    history.push_back(value);
    if (history.size() > opts.stall_window) {
      const double old = history[history.size() - 1 - opts.stall_window];
      if (std::abs(value - old) < opts.stall_tol * std::max(1.0, std::abs(value))) {
        ++it;
        break;
      }
    }
  }
  gradient(u, parts, grad);
  AscentResult res;
  res.log_value = value;
  res.residual = kkt_residual(u, grad);
  res.iterations = it;
  res.u = std::move(u);
  return res;
}

}  // namespace detail

/// Estimate of the sharp GNS constant by maximizing the discrete quotient over
/// radial nonnegative trial functions from several starts.
inline GnsEstimate cgns(double q, int d, const RadialGrid& grid, const GnsOptions& opts = {}) {
  require(grid.dimension() == d, "cgns: grid dimension mismatch");
  require(opts.length_scale > 0.0 && opts.length_scale < grid.r_max(), "cgns: length scale must lie inside the grid");
  const auto ex = gns_exponents(q, d);
  const auto c = grid.centers();
  const double R = grid.r_max();
  const double ell = opts.length_scale;
  auto cutoff = [&](double r) {
    const double x = r / R;
    return (1.0 - x * x) * (1.0 - x * x);
  };

  std::vector<std::pair<std::string, std::vector<double>>> starts;
  {
    std::vector<double> u(c.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::exp(-c[i] * c[i] / (ell * ell)) * cutoff(c[i]);
    starts.emplace_back("gaussian", u);
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] = std::pow(1.0 + c[i] * c[i] / (ell * ell), -0.5 * (d + 2)) * cutoff(c[i]);
    }
    starts.emplace_back("extremizer_shape", u);
  }
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t k = 0; k < opts.random_starts; ++k) {
    std::vector<double> u(c.size(), 0.0);
    const int bumps = 2 + static_cast<int>(unit(rng) * 3.0);
    for (int b = 0; b < bumps; ++b) {
      const double centre = ell * unit(rng);
      const double width = ell * (0.5 + unit(rng));
      const double amp = 0.2 + 0.8 * unit(rng);
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double z = (c[i] - centre) / width;
        u[i] += amp * std::exp(-z * z);
      }
    }
    for (std::size_t i = 0; i < u.size(); ++i) u[i] *= cutoff(c[i]);
    starts.emplace_back("random_" + std::to_string(k), u);
  }

  GnsEstimate out;
  out.q = q;
  out.d = d;
  double best = -std::numeric_limits<double>::infinity();
  double worst = std::numeric_limits<double>::infinity();
  bool diverged = false;
  for (auto& [label, u0] : starts) {
    auto res = detail::gns_ascent(grid, ex, std::move(u0), opts);
    const double val = std::exp(res.log_value);
    if (!std::isfinite(val)) {
      diverged = true;
      continue;
    }
    out.starts.push_back({label, val, res.residual, res.iterations});
    out.iterations += res.iterations;
    worst = std::min(worst, val);
    if (val > best) {
      best = val;
      out.value = val;
      out.residual = res.residual;
      out.maximizer = std::move(res.u);
    }
  }
  require(!out.starts.empty(), "cgns: every start diverged");
  out.spread = (best - worst) / best;
  out.low_confidence = diverged || out.spread > opts.spread_tol;
  return out;
}

}  // namespace hlsflow
