#pragma once

#include <algorithm>
#include <cstdint>
#include <string>

#include "json.hpp"

#include "hlsflow/energy.hpp"
#include "hlsflow/gns_constant.hpp"
#include "hlsflow/hls_constant.hpp"

namespace hlsflow {

struct ConstantsOptions {
  double tol = 1e-10;
  std::size_t gns_cells = 400;
  double gns_r_max = 8.0;
  GnsOptions gns;
};

struct ConstantsReport {
  int d = 0;
  HlsConstant hls;
  GnsEstimate gns;
  double alpha0 = 0.0;
  double prefactor = 0.0;
  double exponent = 0.0;
  /// Threshold with the prefactor recomputed from the PDE.
  double alpha0_from_pde = 0.0;
  double prefactor_from_pde = 0.0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  std::size_t gns_cells = 0;
  double gns_r_max = 0.0;

  /// alpha_0 >= 1 contradicts 0 < alpha_0 < 1; downstream checks then cap alpha at 1.
  bool alpha0_flagged() const { return !(alpha0 > 0.0 && alpha0 < 1.0); }
  double alpha_ceiling() const { return std::min(alpha0, 1.0); }

  double k(double alpha, Prefactor p = Prefactor::nominal) const {
    return k_coefficient(d, alpha, hls.value, gns.value, p);
  }
};

inline ConstantsReport compute_constants(int d, const ConstantsOptions& opts = {}) {
  require(d >= 3, "constants: dimension must be >= 3");
  ConstantsReport rep;
  rep.d = d;
  rep.tol = opts.tol;
  rep.seed = opts.gns.seed;
  rep.gns_cells = opts.gns_cells;
  rep.gns_r_max = opts.gns_r_max;
  rep.hls = chls(d, opts.tol);
  const auto grid = RadialGrid::uniform(d, opts.gns_cells, opts.gns_r_max);
  rep.gns = cgns(energy_exponent(d), d, grid, opts.gns);
  rep.prefactor = dissipation_prefactor(d);
  rep.prefactor_from_pde = dissipation_prefactor_from_pde(d);
  rep.exponent = gns_power(d);
  rep.alpha0 = alpha0(d, rep.hls.value, rep.gns.value);
  rep.alpha0_from_pde = alpha0(d, rep.hls.value, rep.gns.value, Prefactor::from_pde);
  return rep;
}

inline nlohmann::json to_json(const ConstantsReport& r) {
  nlohmann::json starts = nlohmann::json::array();
  for (const auto& s : r.gns.starts) {
    starts.push_back({{"label", s.label}, {"value", s.value}, {"residual", s.residual}, {"iterations", s.iterations}});
  }
  return {
      {"d", r.d},
      {"c_hls", r.hls.value},
      {"c_hls_err", r.hls.error},
      {"c_gns", r.gns.value},
      {"c_gns_residual", r.gns.residual},
      {"c_gns_spread", r.gns.spread},
      {"alpha0", r.alpha0},
      {"prefactor", r.prefactor},
      {"exponent", r.exponent},
      {"seed", r.seed},
      {"alpha0_flag", r.alpha0_flagged()},
      {"alpha_ceiling", r.alpha_ceiling()},
      {"c_hls_kernel", r.hls.kernel_value},
      {"c_hls_converged", r.hls.converged},
      {"c_gns_iterations", r.gns.iterations},
      {"c_gns_low_confidence", r.gns.low_confidence},
      {"c_gns_starts", starts},
      {"gns_grid", {{"cells", r.gns_cells}, {"r_max", r.gns_r_max}}},
      {"tol", r.tol},
      {"prefactor_from_pde", r.prefactor_from_pde},
      {"alpha0_from_pde", r.alpha0_from_pde},
  };
}

/// Reads the fields the verifier needs; optional diagnostics are left at defaults.
inline ConstantsReport constants_from_json(const nlohmann::json& j) {
  ConstantsReport r;
  try {
    r.d = j.at("d").get<int>();
    r.hls.d = r.d;
    r.hls.value = j.at("c_hls").get<double>();
    r.hls.error = j.value("c_hls_err", 0.0);
    r.gns.d = r.d;
    r.gns.q = energy_exponent(r.d);
    r.gns.value = j.at("c_gns").get<double>();
    r.gns.residual = j.value("c_gns_residual", 0.0);
    r.gns.spread = j.value("c_gns_spread", 0.0);
    r.alpha0 = j.at("alpha0").get<double>();
    r.prefactor = j.value("prefactor", dissipation_prefactor(r.d));
    r.exponent = j.value("exponent", gns_power(r.d));
    r.seed = j.value("seed", std::uint64_t{0});
    r.prefactor_from_pde = dissipation_prefactor_from_pde(r.d);
    r.alpha0_from_pde = alpha0(r.d, r.hls.value, r.gns.value, Prefactor::from_pde);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("constants report: ") + e.what());
  }
  require(r.d >= 3 && r.hls.value > 0.0 && r.gns.value > 0.0, "constants report: invalid values");
  return r;
}

}  // namespace hlsflow
