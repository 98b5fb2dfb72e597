#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "hlsflow/radial.hpp"

namespace hlsflow {

/// Newtonian potential u = (-Delta)^{-1} f of a radial cell-average density.
///
/// The density is read as piecewise constant on the cells, so the enclosed
/// mass M(r), the field u'(r) = -M(r) / (sigma r^{d-1}) and u itself are exact
/// for it. Outside R_max the density vanishes and u is the monopole
/// M r^{2-d} / ((d-2) sigma).
class PotentialField {
 public:
  explicit PotentialField(RadialDensity f) : f_(std::move(f)) {
    const auto& g = f_.grid();
    const auto n = g.size();
    const auto s = g.surfaces();
    enclosed_ = cumulative_mass(f_);
    // outer_[i] = (1/2) sum_{j >= i} f_j (r_{j+1}^2 - r_j^2)
    outer_.assign(n + 1, 0.0);
    for (std::size_t j = n; j-- > 0;) {
      outer_[j] = outer_[j + 1] + 0.5 * f_[j] * g.square_widths()[j];
    }
    slope_.assign(n + 1, 0.0);
    for (std::size_t i = 1; i <= n; ++i) slope_[i] = -enclosed_[i] / s[i];
    const auto c = g.centers();
    values_.resize(n);
    for (std::size_t i = 0; i < n; ++i) values_[i] = evaluate_in_cell(i, c[i]);
  }

  const RadialGrid& grid() const noexcept { return f_.grid(); }
  /// u at cell centers.
  std::span<const double> values() const noexcept { return values_; }
  /// u'(r_i) at every edge; zero at the origin.
  std::span<const double> slopes() const noexcept { return slope_; }
  /// Mass enclosed by each edge.
  std::span<const double> enclosed_mass() const noexcept { return enclosed_; }

  /// u(r) for any r >= 0.
  double value_at(double r) const {
    require(r >= 0.0, "PotentialField::value_at: r must be >= 0");
    const auto& g = grid();
    const int d = g.dimension();
    if (r >= g.r_max()) return enclosed_.back() * std::pow(r, 2 - d) / ((d - 2) * g.sphere_area());
    return evaluate_in_cell(g.locate(r), r);
  }

  /// u'(r) for any r >= 0.
  double slope_at(double r) const {
    require(r >= 0.0, "PotentialField::slope_at: r must be >= 0");
    const auto& g = grid();
    const int d = g.dimension();
    if (r == 0.0) return 0.0;
    return -enclosed_at(r) / (g.sphere_area() * std::pow(r, d - 1));
  }

  double enclosed_at(double r) const {
    const auto& g = grid();
    if (r >= g.r_max()) return enclosed_.back();
    const auto i = g.locate(r);
    const double a = g.edges()[i];
    return enclosed_[i] + f_[i] * g.sphere_area() * power_difference(a, r, g.dimension()) / g.dimension();
  }

 private:
  double evaluate_in_cell(std::size_t i, double r) const {
    const auto& g = grid();
    const int d = g.dimension();
    const double sigma = g.sphere_area();
    const double a = g.edges()[i];
    const double b = g.edges()[i + 1];
    double inner = 0.0;
    if (r > 0.0) {
      const double m = enclosed_[i] + f_[i] * sigma * power_difference(a, r, d) / d;
      inner = m * std::pow(r, 2 - d) / ((d - 2) * sigma);
    }
    const double outer = 0.5 * f_[i] * power_difference(r, b, 2) + outer_[i + 1];
    return inner + outer / (d - 2);
  }

  RadialDensity f_;
  std::vector<double> enclosed_;
  std::vector<double> outer_;
  std::vector<double> slope_;
  std::vector<double> values_;
};

inline PotentialField newtonian_potential(const RadialDensity& f) { return PotentialField(f); }

/// Radial component of the drift field
///   grad c = d kappa / ((d-2) ||f||_{2d/(d+2)}^{4/(d+2)}) * u'(r)
/// at every grid edge (zero at the origin, the outer edge included).
inline std::vector<double> drift_field(const RadialDensity& f, double kappa) {
  const int d = f.grid().dimension();
  const double dd = d;
  const double norm = lp_norm(f, 2.0 * dd / (dd + 2.0));
  require(norm > 0.0, "drift_field: density must be nonzero");
  require(kappa >= 0.0, "drift_field: kappa must be nonnegative");
  const double scale = dd * kappa / ((dd - 2.0) * std::pow(norm, 4.0 / (dd + 2.0)));
  const auto m = cumulative_mass(f);
  const auto s = f.grid().surfaces();
  std::vector<double> field(m.size(), 0.0);
  for (std::size_t i = 1; i < m.size(); ++i) field[i] = -scale * m[i] / s[i];
  return field;
}

/// Coulomb energy  int f (-Delta)^{-1} f dx, exact for the piecewise-constant
/// density. `enclosed` is the cumulative mass at the edges.
inline double coulomb_energy(const RadialDensity& f, std::span<const double> enclosed) {
  const auto& g = f.grid();
  const int d = g.dimension();
  const double sigma = g.sphere_area();
  const auto w2 = g.square_widths();
  const auto ws = g.self_weights();
  const auto n = g.size();
  // Pairs (inner cell j, outer cell i) weigh f_j V_j f_i (r_{i+1}^2 - r_i^2)/2, twice.
  double pairs = 0.0;
  double self = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pairs += f[i] * enclosed[i] * w2[i];
    self += f[i] * f[i] * ws[i];
  }
  return (pairs + sigma * self) / (d - 2);
}

inline double coulomb_energy(const RadialDensity& f) {
  const auto m = cumulative_mass(f);
  return coulomb_energy(f, m);
}

}  // namespace hlsflow
