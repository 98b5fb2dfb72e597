#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include "hlsflow/error.hpp"
#include "hlsflow/quadrature.hpp"

namespace hlsflow {

/// Surface area of the unit sphere S^{d-1} in R^d, 2 pi^{d/2} / Gamma(d/2).
inline double sphere_surface_area(int d) {
  require(d >= 1, "sphere_surface_area: dimension must be >= 1");
  const double half = 0.5 * d;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

/// b^k - a^k for 0 <= a <= b without cancellation for integer k.
inline double power_difference(double a, double b, int k) {
  double s = 0.0;
  for (int j = 0; j < k; ++j) s += std::pow(b, k - 1 - j) * std::pow(a, j);
  return (b - a) * s;
}

/// Finite-volume discretization of [0, R_max] for radial functions on R^d.
///
/// Cell i spans [r_i, r_{i+1}] and carries the exact spherical shell volume
/// sigma_{d-1} (r_{i+1}^d - r_i^d) / d. Centers are the shell midpoints.
class RadialGrid {
 public:
  RadialGrid(int dimension, std::vector<double> edges) : d_(dimension), edges_(std::move(edges)) {
    require(d_ >= 3, "RadialGrid: dimension must be >= 3");
    require(edges_.size() >= 3, "RadialGrid: need at least two cells");
    require(edges_.front() == 0.0, "RadialGrid: first edge must be exactly 0");
    for (std::size_t i = 1; i < edges_.size(); ++i) {
      require(edges_[i] > edges_[i - 1] && std::isfinite(edges_[i]),
              "RadialGrid: edges must be finite and strictly increasing");
    }
    sigma_ = sphere_surface_area(d_);
    const std::size_t n = edges_.size() - 1;
    centers_.resize(n);
    volumes_.resize(n);
    moment_weights_.resize(n);
    square_widths_.resize(n);
    self_weights_.resize(n);
    const quad::GaussLegendre gl(8);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = edges_[i];
      const double b = edges_[i + 1];
      centers_[i] = 0.5 * (a + b);
      volumes_[i] = sigma_ * power_difference(a, b, d_) / d_;
      moment_weights_[i] = sigma_ * power_difference(a, b, d_ + 2) / (d_ + 2);
      square_widths_[i] = power_difference(a, b, 2);
      self_weights_[i] = (2.0 / d_) * gl([&](double s) { return s * power_difference(a, s, d_); }, a, b);
    }
    surfaces_.resize(edges_.size());
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      surfaces_[i] = sigma_ * std::pow(edges_[i], d_ - 1);
    }
  }

  static RadialGrid uniform(int dimension, std::size_t cells, double r_max) {
    require(cells >= 2, "RadialGrid::uniform: need at least two cells");
    require(r_max > 0.0, "RadialGrid::uniform: r_max must be positive");
    std::vector<double> e(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) {
      e[i] = r_max * static_cast<double>(i) / static_cast<double>(cells);
    }
    e.back() = r_max;
    return RadialGrid(dimension, std::move(e));
  }

  /// Geometrically stretched grid: widths grow by a constant factor so that
  /// the last cell is `stretch` times wider than the first.
  static RadialGrid stretched(int dimension, std::size_t cells, double r_max, double stretch) {
    require(stretch >= 1.0, "RadialGrid::stretched: stretch must be >= 1");
    if (stretch == 1.0) return uniform(dimension, cells, r_max);
    require(cells >= 2, "RadialGrid::stretched: need at least two cells");
    const double g = std::pow(stretch, 1.0 / static_cast<double>(cells - 1));
    double total = 0.0;
    double w = 1.0;
    std::vector<double> widths(cells);
    for (std::size_t i = 0; i < cells; ++i) {
      widths[i] = w;
      total += w;
      w *= g;
    }
    std::vector<double> e(cells + 1, 0.0);
    for (std::size_t i = 0; i < cells; ++i) e[i + 1] = e[i] + widths[i] * r_max / total;
    e.back() = r_max;
    return RadialGrid(dimension, std::move(e));
  }

  int dimension() const noexcept { return d_; }
  std::size_t size() const noexcept { return centers_.size(); }
  double r_max() const noexcept { return edges_.back(); }
  /// sigma_{d-1}
  double sphere_area() const noexcept { return sigma_; }

  std::span<const double> edges() const noexcept { return edges_; }
  std::span<const double> centers() const noexcept { return centers_; }
  std::span<const double> volumes() const noexcept { return volumes_; }
  /// sigma_{d-1} * integral of s^{d+1} over each cell.
  std::span<const double> moment_weights() const noexcept { return moment_weights_; }
  /// r_{i+1}^2 - r_i^2 per cell.
  std::span<const double> square_widths() const noexcept { return square_widths_; }
  /// (2/d) * integral over the cell of s (s^d - r_i^d) ds: the shell self-interaction weight.
  std::span<const double> self_weights() const noexcept { return self_weights_; }
  /// sigma_{d-1} r_i^{d-1} at every edge (zero at the origin).
  std::span<const double> surfaces() const noexcept { return surfaces_; }

  double ball_volume() const { return sigma_ * std::pow(r_max(), d_) / d_; }

  /// Index of the cell containing r (clamped to the grid).
  std::size_t locate(double r) const {
    auto it = std::upper_bound(edges_.begin(), edges_.end(), r);
    if (it == edges_.begin()) return 0;
    const auto i = static_cast<std::size_t>(std::distance(edges_.begin(), it)) - 1;
    return std::min(i, size() - 1);
  }

  bool operator==(const RadialGrid& o) const { return d_ == o.d_ && edges_ == o.edges_; }

 private:
  int d_;
  double sigma_ = 0.0;
  std::vector<double> edges_;
  std::vector<double> centers_;
  std::vector<double> volumes_;
  std::vector<double> moment_weights_;
  std::vector<double> surfaces_;
  std::vector<double> square_widths_;
  std::vector<double> self_weights_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

inline GridPtr make_grid(RadialGrid g) { return std::make_shared<const RadialGrid>(std::move(g)); }

/// Nonnegative cell averages on a radial grid.
class RadialDensity {
 public:
  RadialDensity(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    require(grid_ != nullptr, "RadialDensity: null grid");
    require(values_.size() == grid_->size(), "RadialDensity: value count does not match grid");
    for (double v : values_) {
      require(std::isfinite(v) && v >= 0.0, "RadialDensity: values must be finite and nonnegative");
    }
  }

  static RadialDensity zero(GridPtr grid) {
    const auto n = grid->size();
    return RadialDensity(std::move(grid), std::vector<double>(n, 0.0));
  }

  /// Exact cell averages (1/V_i) * integral_{cell} f dx, by Gauss-Legendre per cell.
  template <class F>
  static RadialDensity cell_averages(GridPtr grid, F&& f, std::size_t points = 8) {
    const quad::GaussLegendre gl(points);
    const auto e = grid->edges();
    const auto v = grid->volumes();
    const int d = grid->dimension();
    const double sigma = grid->sphere_area();
    std::vector<double> vals(grid->size());
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double integral = gl([&](double r) { return f(r) * sigma * std::pow(r, d - 1); }, e[i], e[i + 1]);
      vals[i] = std::max(0.0, integral / v[i]);
    }
    return RadialDensity(std::move(grid), std::move(vals));
  }

  /// Point samples at the cell centers.
  template <class F>
  static RadialDensity sampled(GridPtr grid, F&& f) {
    const auto c = grid->centers();
    std::vector<double> vals(c.size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = std::max(0.0, f(c[i]));
    return RadialDensity(std::move(grid), std::move(vals));
  }

  const RadialGrid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  double max_value() const { return *std::max_element(values_.begin(), values_.end()); }
  bool is_zero() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
  }

  RadialDensity scaled(double c) const {
    require(c >= 0.0 && std::isfinite(c), "RadialDensity::scaled: factor must be finite and >= 0");
    std::vector<double> v(values_);
    for (auto& x : v) x *= c;
    return RadialDensity(grid_, std::move(v));
  }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// sum_i f_i^p V_i, the integral of f^p for p > 0.
inline double power_integral(const RadialDensity& f, double p) {
  require(p > 0.0, "power_integral: exponent must be positive");
  const auto v = f.grid().volumes();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] > 0.0) s += std::pow(f[i], p) * v[i];
  }
  return s;
}

inline double mass(const RadialDensity& f) {
  const auto v = f.grid().volumes();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * v[i];
  return s;
}

inline double lp_norm(const RadialDensity& f, double p) {
  require(p >= 1.0, "lp_norm: exponent must be >= 1");
  return std::pow(power_integral(f, p), 1.0 / p);
}

/// Integral of |x|^2 f over the truncated domain.
inline double second_moment(const RadialDensity& f) {
  const auto w = f.grid().moment_weights();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * w[i];
  return s;
}

/// Cumulative mass M_i enclosed by edge r_i; M_0 = 0 and M_N = mass(f).
inline std::vector<double> cumulative_mass(const RadialDensity& f) {
  const auto v = f.grid().volumes();
  std::vector<double> m(f.size() + 1, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) m[i + 1] = m[i] + f[i] * v[i];
  return m;
}

/// beta = (d-2)/(2d), the interpolation weight placing 2d/(d+2) between 1 and (3d+2)/(d+2).
inline double beta_exponent(int d) {
  require(d >= 3, "beta_exponent: dimension must be >= 3");
  return static_cast<double>(d - 2) / (2.0 * d);
}

/// |2d/(d+2) - (beta (3d+2)/(d+2) + (1 - beta))|
inline double beta_identity_residual(int d) {
  const double beta = beta_exponent(d);
  const double dd = d;
  return std::abs(2.0 * dd / (dd + 2.0) - (beta * (3.0 * dd + 2.0) / (dd + 2.0) + (1.0 - beta)));
}

/// RHS - LHS of  int f^{2d/(d+2)} <= (int f^{(3d+2)/(d+2)})^beta (int f)^{1-beta}.
/// Zero for the zero density.
inline double holder_interpolation_gap(const RadialDensity& f) {
  const int d = f.grid().dimension();
  const double dd = d;
  if (f.is_zero()) return 0.0;
  const double beta = beta_exponent(d);
  const double lhs = power_integral(f, 2.0 * dd / (dd + 2.0));
  const double rhs = std::pow(power_integral(f, (3.0 * dd + 2.0) / (dd + 2.0)), beta) *
                     std::pow(mass(f), 1.0 - beta);
  return rhs - lhs;
}

}  // namespace hlsflow
