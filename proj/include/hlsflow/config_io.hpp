#pragma once

#include <array>
#include <cstdio>
#include <set>
#include <string>

#include <openssl/evp.h>

#include "json.hpp"

#include "hlsflow/error.hpp"
#include "hlsflow/solver.hpp"

namespace hlsflow {

inline nlohmann::json to_json(const SolverConfig& c) {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& [r, f] : c.profile.table) table.push_back({r, f});
  nlohmann::json j = {
      {"d", c.d},
      {"alpha", c.alpha},
      {"cells", c.cells},
      {"r_max", c.r_max},
      {"stretch", c.stretch},
      {"profile", {{"kind", to_string(c.profile.kind)}, {"mass", c.profile.mass}, {"width", c.profile.width}, {"table", table}}},
      {"t_end", c.t_end},
      {"cfl", c.cfl},
      {"drift_factor", c.drift_factor},
      {"cadence", {{"first", c.cadence.first}, {"per_decade", c.cadence.per_decade}, {"interval", c.cadence.interval}}},
      {"c_hls", c.c_hls ? nlohmann::json(*c.c_hls) : nlohmann::json(nullptr)},
      {"floor", c.floor == FloorPolicy::clamp ? "clamp" : "abort"},
      {"seed", c.seed},
      {"dt_min", c.dt_min},
      {"dt_fixed", c.dt_fixed},
      {"max_steps", c.max_steps},
      {"t_burn_fraction", c.t_burn_fraction},
      {"boundary_tol", c.boundary_tol},
  };
  return j;
}

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  require(j.is_object(), where + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    require(known.count(k) > 0, "unknown config key '" + where + "." + k + "'");
  }
}

}  // namespace detail

/// Overlays the keys present in `j` onto `base`. Unknown keys are errors.
inline SolverConfig config_from_json(const nlohmann::json& j, SolverConfig base = {}) {
  detail::reject_unknown(j,
                         {"d", "alpha", "cells", "r_max", "stretch", "profile", "t_end", "cfl", "drift_factor", "cadence",
                          "c_hls", "floor", "seed", "dt_min", "dt_fixed", "max_steps", "t_burn_fraction",
                          "boundary_tol"},
                         "config");
  SolverConfig c = std::move(base);
  try {
    auto get = [&](const char* key, auto& dst) {
      if (j.contains(key)) dst = j.at(key).get<std::decay_t<decltype(dst)>>();
    };
    get("d", c.d);
    get("alpha", c.alpha);
    get("cells", c.cells);
    get("r_max", c.r_max);
    get("stretch", c.stretch);
    get("t_end", c.t_end);
    get("cfl", c.cfl);
    get("drift_factor", c.drift_factor);
    get("seed", c.seed);
    get("dt_min", c.dt_min);
    get("dt_fixed", c.dt_fixed);
    get("max_steps", c.max_steps);
    get("t_burn_fraction", c.t_burn_fraction);
    get("boundary_tol", c.boundary_tol);
    if (j.contains("c_hls")) {
      if (j.at("c_hls").is_null()) c.c_hls.reset();
      else c.c_hls = j.at("c_hls").get<double>();
    }
    if (j.contains("floor")) {
      const auto f = j.at("floor").get<std::string>();
      require(f == "clamp" || f == "abort", "config: floor must be 'clamp' or 'abort'");
      c.floor = f == "clamp" ? FloorPolicy::clamp : FloorPolicy::abort;
    }
    if (j.contains("profile")) {
      const auto& p = j.at("profile");
      detail::reject_unknown(p, {"kind", "mass", "width", "table"}, "profile");
      if (p.contains("kind")) c.profile.kind = profile_from_string(p.at("kind").get<std::string>());
      if (p.contains("mass")) c.profile.mass = p.at("mass").get<double>();
      if (p.contains("width")) c.profile.width = p.at("width").get<double>();
      if (p.contains("table")) {
        c.profile.table.clear();
        for (const auto& row : p.at("table")) {
          require(row.is_array() && row.size() == 2, "config: profile table rows must be [r, f] pairs");
          c.profile.table.emplace_back(row[0].get<double>(), row[1].get<double>());
        }
      }
    }
    if (j.contains("cadence")) {
      const auto& k = j.at("cadence");
      detail::reject_unknown(k, {"first", "per_decade", "interval"}, "cadence");
      if (k.contains("first")) c.cadence.first = k.at("first").get<double>();
      if (k.contains("per_decade")) c.cadence.per_decade = k.at("per_decade").get<std::size_t>();
      if (k.contains("interval")) c.cadence.interval = k.at("interval").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  return c;
}

/// Hex SHA-1 of `data` framed as a git blob ("blob <size>\0<data>").
inline std::string git_blob_hash(const std::string& data) {
  const std::string framed = "blob " + std::to_string(data.size()) + '\0' + data;
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(framed.data(), framed.size(), md.data(), &len, EVP_sha1(), nullptr) != 1) {
    throw std::runtime_error("SHA-1 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

/// Hash of the canonical (key-sorted, compact) JSON form of the effective config.
inline std::string config_hash(const SolverConfig& c) { return git_blob_hash(to_json(c).dump()); }

}  // namespace hlsflow
