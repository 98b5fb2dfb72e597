#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "hlsflow/constants_report.hpp"
#include "hlsflow/diagnostics.hpp"

namespace hlsflow {

struct VerificationReport {
  std::vector<CheckResult> checks;
  Prefactor prefactor = Prefactor::nominal;
  double k = 0.0;
  double alpha0 = 0.0;

  bool passed() const {
    for (const auto& c : checks) {
      if (!c.skipped && !c.passed) return false;
    }
    return true;
  }
};

inline std::string to_string(Prefactor p) { return p == Prefactor::nominal ? "nominal" : "pde"; }

inline Prefactor prefactor_from_string(const std::string& s) {
  if (s == "nominal") return Prefactor::nominal;
  if (s == "pde") return Prefactor::from_pde;
  throw InvalidArgument("unknown prefactor '" + s + "' (expected nominal or pde)");
}

inline CheckResult skipped_check(std::string name, std::string why) {
  CheckResult c{std::move(name)};
  c.skipped = true;
  c.detail = std::move(why);
  return c;
}

/// Every trace check the diagnostics provide. Checks whose hypotheses fail
/// (alpha at or above the threshold, too few records) are reported as skipped.
inline VerificationReport verify_trace(const EnergyTrace& trace, const ConstantsReport& constants,
                                       Prefactor prefactor = Prefactor::nominal, double t_burn_fraction = 0.05) {
  require(trace.d == constants.d, "verify: trace dimension " + std::to_string(trace.d) +
                                      " does not match constants dimension " + std::to_string(constants.d));
  require(trace.records.size() >= 3, "verify: trace needs at least 3 records");
  VerificationReport rep;
  rep.prefactor = prefactor;
  rep.alpha0 = alpha0(constants.d, constants.hls.value, constants.gns.value, prefactor);
  rep.k = constants.k(trace.alpha, prefactor);
  const double ceiling = std::min(rep.alpha0, 1.0);
  const bool below = trace.alpha < ceiling;

  rep.checks.push_back(mass_check(trace));
  rep.checks.push_back(energy_dissipation_check(trace));
  if (below) {
    rep.checks.push_back(lq_monotonicity_check(trace));
  } else {
    rep.checks.push_back(skipped_check("lq_monotone", "alpha is not below min(alpha0, 1)"));
  }
  const auto rate = rate_check(trace, rep.k);
  rep.checks.push_back(summarize_rate(rate));
  rep.checks.push_back(identity_check(rate));
  if (below && rep.k > 0.0) {
    try {
      const auto it = averaging_iteration_check(trace, trace.alpha, rep.k, trace.records.front().mass);
      rep.checks.push_back(it.average);
      rep.checks.push_back(it.norm);
      rep.checks.push_back(it.iteration);
    } catch (const InvalidArgument& e) {
      rep.checks.push_back(skipped_check("iteration_chain", e.what()));
    }
    try {
      rep.checks.push_back(decay_check(decay_fit(trace, t_burn_fraction)));
    } catch (const InvalidArgument& e) {
      rep.checks.push_back(skipped_check("decay_bound_form", e.what()));
    }
  } else {
    rep.checks.push_back(skipped_check("iteration_chain", "alpha is not below min(alpha0, 1)"));
    rep.checks.push_back(skipped_check("decay_bound_form", "alpha is not below min(alpha0, 1)"));
  }
  return rep;
}

inline nlohmann::json to_json(const CheckResult& c) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  return {{"name", c.name},         {"passed", c.passed},       {"skipped", c.skipped},
          {"worst", num(c.worst)},  {"measure", c.measure},     {"tolerance", c.tolerance},
          {"evaluated", c.evaluated}, {"detail", c.detail}};
}

inline nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  return {{"passed", r.passed()}, {"prefactor", to_string(r.prefactor)}, {"k", r.k}, {"alpha0", r.alpha0},
          {"checks", checks}};
}

}  // namespace hlsflow
