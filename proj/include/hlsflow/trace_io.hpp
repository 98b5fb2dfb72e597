#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hlsflow/error.hpp"
#include "hlsflow/run.hpp"

namespace hlsflow {

inline constexpr const char* kTraceHeader =
    "t,E_alpha,norm_term,coulomb_term,mass,second_moment,lq_mass,lq1_mass,dt,boundary_max";

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_trace_csv(std::ostream& os, const EnergyTrace& trace) {
  os << kTraceHeader << '\n';
  for (const auto& r : trace.records) {
    const double row[] = {r.t,    r.e_alpha,       r.norm_term, r.coulomb_term, r.mass,
                          r.second_moment, r.lq_mass, r.lq1_mass,     r.dt,   r.boundary_max};
    for (std::size_t i = 0; i < std::size(row); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << '\n';
  }
}

inline std::string trace_csv(const EnergyTrace& trace) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  return os.str();
}

/// Records only; dimension and alpha come from the run summary.
inline EnergyTrace read_trace_csv(std::istream& is) {
  EnergyTrace trace;
  trace.has_dissipation = false;
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), "trace: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == kTraceHeader, "trace: unexpected header '" + line + "'");
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    double v[10];
    std::size_t n = 0;
    const char* p = line.c_str();
    while (true) {
      char* end = nullptr;
      const double x = std::strtod(p, &end);
      require(end != p && n < 10, "trace: malformed row at line " + std::to_string(lineno));
      v[n++] = x;
      if (*end == '\0') break;
      require(*end == ',', "trace: malformed row at line " + std::to_string(lineno));
      p = end + 1;
    }
    require(n == 10, "trace: expected 10 columns at line " + std::to_string(lineno));
    TraceRecord r;
    r.t = v[0];
    r.e_alpha = v[1];
    r.norm_term = v[2];
    r.coulomb_term = v[3];
    r.mass = v[4];
    r.second_moment = v[5];
    r.lq_mass = v[6];
    r.lq1_mass = v[7];
    r.dt = v[8];
    r.boundary_max = v[9];
    trace.records.push_back(r);
  }
  return trace;
}

inline EnergyTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "trace: cannot open '" + path + "'");
  return read_trace_csv(in);
}

/// Summary written next to a trace: `<trace>.summary.json`.
inline std::string summary_path(const std::string& trace_path) { return trace_path + ".summary.json"; }

inline nlohmann::json trace_summary(const EnergyTrace& t) {
  return {
      {"d", t.d},
      {"alpha", t.alpha},
      {"c_hls", t.c_hls},
      {"drift_factor", t.drift_factor},
      {"cells", t.cells},
      {"r_max", t.r_max},
      {"dr_max", t.dr_max},
      {"records", t.records.size()},
      {"aborted", t.aborted},
      {"abort_reason", t.abort_reason},
      {"steps", t.steps},
      {"floor_clamps", t.floor_clamps},
      {"wall_time", t.wall_time},
      {"dt_max_used", t.dt_max_used},
      {"domain_truncated", t.domain_truncated},
  };
}

inline void apply_summary(EnergyTrace& t, const nlohmann::json& j) {
  try {
    t.d = j.at("d").get<int>();
    t.alpha = j.at("alpha").get<double>();
    t.c_hls = j.value("c_hls", 0.0);
    t.drift_factor = j.value("drift_factor", 1);
    t.cells = j.value("cells", std::size_t{0});
    t.r_max = j.value("r_max", 0.0);
    t.dr_max = j.value("dr_max", 0.0);
    t.aborted = j.value("aborted", false);
    t.abort_reason = j.value("abort_reason", std::string{});
    t.steps = j.value("steps", std::size_t{0});
    t.floor_clamps = j.value("floor_clamps", std::size_t{0});
    t.wall_time = j.value("wall_time", 0.0);
    t.dt_max_used = j.value("dt_max_used", 0.0);
    t.domain_truncated = j.value("domain_truncated", false);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("trace summary: ") + e.what());
  }
}

}  // namespace hlsflow
