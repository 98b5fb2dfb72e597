#pragma once

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hlsflow/config_io.hpp"
#include "hlsflow/constants_report.hpp"
#include "hlsflow/trace_io.hpp"
#include "hlsflow/verify.hpp"

namespace hlsflow::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { ok = 0, usage = 2, numerical_abort = 3, verification_failed = 4, domain_truncated = 5 };

inline std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("HLSFLOW_OUTPUT_DIR"); env && *env) return env;
  return "hlsflow_out";
}

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot write '" + path.string() + "'");
  out << text;
}

/// Run flags; each one overrides the config file only when given.
struct RunFlags {
  std::string config_path;
  SolverConfig values;
  std::string profile;
  std::string floor;
  double c_hls = 0.0;
  std::map<CLI::Option*, std::function<void(SolverConfig&)>> apply;

  void add(CLI::App& app) {
    auto& v = values;
    app.add_option("--config", config_path, "JSON config file; flags override its values")->check(CLI::ExistingFile);
    bind(app.add_option("--d", v.d, "Dimension (>= 3)"), [this](SolverConfig& c) { c.d = values.d; });
    bind(app.add_option("--alpha", v.alpha, "Coupling alpha >= 0"), [this](SolverConfig& c) { c.alpha = values.alpha; });
    bind(app.add_option("-N,--cells", v.cells, "Number of radial cells"), [this](SolverConfig& c) { c.cells = values.cells; });
    bind(app.add_option("--r-max", v.r_max, "Outer radius of the domain"), [this](SolverConfig& c) { c.r_max = values.r_max; });
    bind(app.add_option("--stretch", v.stretch, "Ratio of outer to inner cell width (1 = uniform)"),
         [this](SolverConfig& c) { c.stretch = values.stretch; });
    bind(app.add_option("--T", v.t_end, "Final time"), [this](SolverConfig& c) { c.t_end = values.t_end; });
    bind(app.add_option("--profile", profile, "gaussian | extremizer_h | uniform_ball | custom_table"),
         [this](SolverConfig& c) { c.profile.kind = profile_from_string(profile); });
    bind(app.add_option("--mass", v.profile.mass, "Initial mass"), [this](SolverConfig& c) { c.profile.mass = values.profile.mass; });
    bind(app.add_option("--width", v.profile.width, "Profile width (Gaussian width, extremizer scale, ball radius)"),
         [this](SolverConfig& c) { c.profile.width = values.profile.width; });
    bind(app.add_option("--cfl", v.cfl, "CFL safety factor in (0, 1]"), [this](SolverConfig& c) { c.cfl = values.cfl; });
    bind(app.add_option("--drift-factor", v.drift_factor, "1 (PDE as written) or 2 (variational)"),
         [this](SolverConfig& c) { c.drift_factor = values.drift_factor; });
    bind(app.add_option("--per-decade", v.cadence.per_decade, "Log-spaced records per decade of time"),
         [this](SolverConfig& c) { c.cadence.per_decade = values.cadence.per_decade; });
    bind(app.add_option("--first-output", v.cadence.first, "First log-spaced record time"),
         [this](SolverConfig& c) { c.cadence.first = values.cadence.first; });
    bind(app.add_option("--interval", v.cadence.interval, "Uniform record spacing (overrides log spacing)"),
         [this](SolverConfig& c) { c.cadence.interval = values.cadence.interval; });
    bind(app.add_option("--c-hls", c_hls, "Supply C_HLS instead of computing it"),
         [this](SolverConfig& c) { c.c_hls = c_hls; });
    bind(app.add_option("--floor", floor, "Negative-density policy: clamp | abort"), [this](SolverConfig& c) {
      require(floor == "clamp" || floor == "abort", "floor must be clamp or abort");
      c.floor = floor == "clamp" ? FloorPolicy::clamp : FloorPolicy::abort;
    });
    bind(app.add_option("--seed", v.seed, "Seed recorded with the run"), [this](SolverConfig& c) { c.seed = values.seed; });
    bind(app.add_option("--dt-fixed", v.dt_fixed, "Fixed time step (must respect the stability bound)"),
         [this](SolverConfig& c) { c.dt_fixed = values.dt_fixed; });
    bind(app.add_option("--dt-min", v.dt_min, "Abort when the CFL step falls below this"),
         [this](SolverConfig& c) { c.dt_min = values.dt_min; });
    bind(app.add_option("--max-steps", v.max_steps, "Step budget"), [this](SolverConfig& c) { c.max_steps = values.max_steps; });
  }

  void bind(CLI::Option* opt, std::function<void(SolverConfig&)> fn) { apply[opt] = std::move(fn); }

  SolverConfig merged() const {
    SolverConfig c;
    if (!config_path.empty()) c = config_from_json(read_json_file(config_path));
    for (const auto& [opt, fn] : apply) {
      if (opt->count() > 0) fn(c);
    }
    c.validate();
    return c;
  }
};

struct Io {
  std::ostream& out;
  std::ostream& err;
};

inline nlohmann::json manifest(const SolverConfig& cfg, const std::string& trace_path, const std::string& started) {
  return {{"config", to_json(cfg)},
          {"config_hash", config_hash(cfg)},
          {"outputs", {{"trace", trace_path}, {"summary", summary_path(trace_path)}}},
          {"started", started},
          {"finished", utc_now()},
          {"tool", "hlsflow"},
          {"version", kVersion}};
}

struct RunOutcome {
  EnergyTrace trace;
  std::string trace_path;
  int code = ExitCode::ok;
};

inline int run_exit_code(const EnergyTrace& t) {
  if (t.aborted) return ExitCode::numerical_abort;
  if (t.domain_truncated) return ExitCode::domain_truncated;
  return ExitCode::ok;
}

/// Runs one configuration and writes `<trace>.csv` and its summary.
inline RunOutcome execute_run(const SolverConfig& cfg, std::filesystem::path trace_path) {
  const auto started = utc_now();
  auto result = run(cfg);
  RunOutcome o{std::move(result.trace), trace_path.string(), ExitCode::ok};
  write_text(trace_path, trace_csv(o.trace));
  auto summary = trace_summary(o.trace);
  summary["manifest"] = manifest(cfg, o.trace_path, started);
  write_text(summary_path(o.trace_path), summary.dump(2) + "\n");
  o.code = run_exit_code(o.trace);
  return o;
}

inline ConstantsReport load_or_compute_constants(const std::string& path, int d, Io& io) {
  if (!path.empty()) return constants_from_json(read_json_file(path));
  io.err << "computing constants for d = " << d << "\n";
  return compute_constants(d);
}

inline std::vector<double> parse_number_list(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      require(used == tok.size(), "not a number: '" + tok + "'");
      out.push_back(v);
    }
  }
  return out;
}

/// Sorted, with exact duplicates removed; `dropped` counts the removed entries.
inline std::vector<double> dedup_sorted(std::vector<double> v, std::size_t& dropped) {
  std::sort(v.begin(), v.end());
  const auto before = v.size();
  v.erase(std::unique(v.begin(), v.end()), v.end());
  dropped = before - v.size();
  return v;
}

struct SweepRow {
  int d = 0;
  double alpha = 0.0;
  double alpha0 = 0.0;
  std::string status;
  std::string hash;
  std::string trace_path;
  double fitted_exponent = std::numeric_limits<double>::quiet_NaN();
  double compensated_sup = std::numeric_limits<double>::quiet_NaN();
  double final_ripple = std::numeric_limits<double>::quiet_NaN();
  double rate_min_nominal = std::numeric_limits<double>::quiet_NaN();
  double rate_min_pde = std::numeric_limits<double>::quiet_NaN();
  bool lq_monotone = false;
  bool energy_ok = false;
  std::string error;
};

inline std::string sweep_header() {
  return "d,alpha,alpha_over_alpha0,status,fitted_exponent,compensated_sup,final_decade_ripple,"
         "rate_min_slack_nominal,rate_min_slack_pde,lq_monotone,energy_nonincreasing,config_hash,trace";
}

inline std::string sweep_line(const SweepRow& r) {
  std::ostringstream os;
  os << r.d << ',' << format_double(r.alpha) << ',' << format_double(r.alpha / r.alpha0) << ',' << r.status << ','
     << format_double(r.fitted_exponent) << ',' << format_double(r.compensated_sup) << ','
     << format_double(r.final_ripple) << ',' << format_double(r.rate_min_nominal) << ','
     << format_double(r.rate_min_pde) << ',' << (r.lq_monotone ? 1 : 0) << ',' << (r.energy_ok ? 1 : 0) << ','
     << r.hash << ',' << r.trace_path;
  return os.str();
}

inline SweepRow sweep_task(const SolverConfig& cfg, const ConstantsReport& constants, const std::filesystem::path& dir) {
  SweepRow row;
  row.d = cfg.d;
  row.alpha = cfg.alpha;
  row.alpha0 = constants.alpha0;
  row.hash = config_hash(cfg);
  try {
    auto o = execute_run(cfg, dir / ("run_" + row.hash.substr(0, 12) + ".csv"));
    row.trace_path = o.trace_path;
    row.status = o.code == ExitCode::ok ? "ok" : o.code == ExitCode::numerical_abort ? "aborted" : "truncated";
    const auto& t = o.trace;
    row.energy_ok = energy_dissipation_check(t).passed;
    row.lq_monotone = lq_monotonicity_check(t).passed;
    if (t.records.size() >= 3) {
      row.rate_min_nominal = summarize_rate(rate_check(t, constants.k(cfg.alpha))).worst;
      row.rate_min_pde = summarize_rate(rate_check(t, constants.k(cfg.alpha, Prefactor::from_pde))).worst;
    }
    try {
      const auto fit = decay_fit(t, cfg.t_burn_fraction);
      row.fitted_exponent = fit.exponent;
      row.compensated_sup = fit.compensated_sup;
      row.final_ripple = fit.final_decade_ripple;
    } catch (const InvalidArgument& e) {
      row.error = e.what();
    }
  } catch (const std::exception& e) {
    row.status = "failed";
    row.error = e.what();
  }
  return row;
}

inline int main_impl(int argc, const char* const* argv, Io io) {
  CLI::App app{"Radial free-energy flow: sharp constants, simulation and trace verification"};
  app.require_subcommand(1);
  std::string out_dir;
  app.add_option("--output-dir", out_dir, "Output directory (default $HLSFLOW_OUTPUT_DIR or ./hlsflow_out)");
  app.set_version_flag("--version", kVersion);

  auto* constants_cmd = app.add_subcommand("constants", "Compute C_HLS, C_GNS, alpha0 and K");
  int c_d = 3;
  double c_tol = 1e-10;
  ConstantsOptions c_opts;
  std::string c_out;
  constants_cmd->add_option("--d", c_d, "Dimension (>= 3)")->required()->check(CLI::Range(3, 16));
  constants_cmd->add_option("--tol", c_tol, "Relative quadrature tolerance for C_HLS")->check(CLI::PositiveNumber);
  constants_cmd->add_option("--gns-cells", c_opts.gns_cells, "Cells of the GNS optimization grid")->check(CLI::Range(16, 1 << 16));
  constants_cmd->add_option("--gns-r-max", c_opts.gns_r_max, "Outer radius of the GNS grid")->check(CLI::PositiveNumber);
  constants_cmd->add_option("--gns-iterations", c_opts.gns.max_iterations, "Iteration cap per optimizer start");
  constants_cmd->add_option("--gns-random-starts", c_opts.gns.random_starts, "Random optimizer starts");
  constants_cmd->add_option("--seed", c_opts.gns.seed, "Seed of the random starts");
  constants_cmd->add_option("--out", c_out, "Report path (default <output-dir>/constants_d<d>.json)");

  auto* run_cmd = app.add_subcommand("run", "Integrate the flow and write a trace CSV with a JSON summary");
  RunFlags run_flags;
  run_flags.add(*run_cmd);
  std::string r_out;
  run_cmd->add_option("--out", r_out, "Trace path (default <output-dir>/run_<hash>.csv)");

  auto* verify_cmd = app.add_subcommand("verify", "Check a trace against the dissipation and decay inequalities");
  std::string v_trace, v_constants, v_summary, v_prefactor = "nominal", v_out;
  verify_cmd->add_option("--trace", v_trace, "Trace CSV")->required();
  verify_cmd->add_option("--constants", v_constants, "Constants JSON")->required();
  verify_cmd->add_option("--summary", v_summary, "Run summary (default <trace>.summary.json)");
  verify_cmd->add_option("--prefactor", v_prefactor, "Dissipation prefactor in K: nominal | pde")
      ->check(CLI::IsMember({"nominal", "pde"}));
  verify_cmd->add_option("--out", v_out, "Verification JSON (default <trace>.verify.json)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run a grid of (d, alpha) and tabulate decay and rate-bound slack");
  std::vector<std::string> s_alpha, s_frac;
  std::vector<int> s_dims{3};
  std::string s_constants, s_out;
  std::size_t s_jobs = std::max(1u, std::thread::hardware_concurrency());
  RunFlags sweep_flags;
  sweep_flags.add(*sweep_cmd);
  sweep_cmd->add_option("--alphas", s_alpha, "Alpha values (comma separated or repeated)");
  sweep_cmd->add_option("--alpha-fractions", s_frac, "Alpha as fractions of min(alpha0, 1)");
  sweep_cmd->add_option("--dims", s_dims, "Dimensions")->check(CLI::Range(3, 16));
  sweep_cmd->add_option("--constants", s_constants, "Constants JSON (single dimension only)");
  sweep_cmd->add_option("--jobs", s_jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out", s_out, "Summary CSV (default <output-dir>/sweep.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, io.out, io.err);
    return code == 0 ? ExitCode::ok : ExitCode::usage;
  }
  const std::filesystem::path dir = out_dir.empty() ? default_output_dir() : std::filesystem::path(out_dir);

  try {
    if (*constants_cmd) {
      c_opts.tol = c_tol;
      const auto rep = compute_constants(c_d, c_opts);
      const auto path = c_out.empty() ? dir / ("constants_d" + std::to_string(c_d) + ".json") : std::filesystem::path(c_out);
      write_text(path, to_json(rep).dump(2) + "\n");
      io.out << "d = " << c_d << "  C_HLS = " << format_double(rep.hls.value) << "  C_GNS = " << format_double(rep.gns.value)
             << "  alpha0 = " << format_double(rep.alpha0);
      if (rep.alpha0_flagged()) io.out << "  [flag: alpha0 outside (0, 1); tested alpha capped at " << rep.alpha_ceiling() << "]";
      io.out << "\nwrote " << path.string() << "\n";
      if (!rep.hls.converged || rep.gns.low_confidence) {
        io.err << "warning: " << (!rep.hls.converged ? "C_HLS quadrature did not converge; " : "")
               << (rep.gns.low_confidence ? "C_GNS starts disagree beyond the spread tolerance" : "") << "\n";
        return ExitCode::numerical_abort;
      }
      return ExitCode::ok;
    }

    if (*run_cmd) {
      const auto cfg = run_flags.merged();
      const auto path = r_out.empty() ? dir / ("run_" + config_hash(cfg).substr(0, 12) + ".csv") : std::filesystem::path(r_out);
      const auto o = execute_run(cfg, path);
      const auto& t = o.trace;
      io.out << "steps = " << t.steps << "  t = " << format_double(t.records.back().t)
             << "  E = " << format_double(t.records.back().e_alpha) << "  mass drift = "
             << format_double(mass_check(t).worst) << "  wall = " << t.wall_time << " s\n";
      if (t.aborted) io.err << "numerical abort: " << t.abort_reason << "\n";
      if (t.domain_truncated) io.err << "warning: density reached the outer boundary (domain truncated)\n";
      io.out << "wrote " << o.trace_path << "\n";
      return o.code;
    }

    if (*verify_cmd) {
      auto trace = read_trace_csv(v_trace);
      apply_summary(trace, read_json_file(v_summary.empty() ? summary_path(v_trace) : v_summary));
      const auto constants = constants_from_json(read_json_file(v_constants));
      const auto rep = verify_trace(trace, constants, prefactor_from_string(v_prefactor));
      const auto path = v_out.empty() ? v_trace + ".verify.json" : v_out;
      write_text(path, to_json(rep).dump(2) + "\n");
      for (const auto& c : rep.checks) {
        io.out << (c.skipped ? "SKIP " : c.passed ? "PASS " : "FAIL ") << c.name;
        if (!c.skipped) io.out << "  worst = " << format_double(c.worst) << "  (" << c.measure << ")";
        if (!c.detail.empty()) io.out << "  " << c.detail;
        io.out << "\n";
      }
      io.out << "wrote " << path << "\n";
      return rep.passed() ? ExitCode::ok : ExitCode::verification_failed;
    }

    if (*sweep_cmd) {
      auto alphas = parse_number_list(s_alpha);
      const auto fracs = parse_number_list(s_frac);
      require(!alphas.empty() || !fracs.empty(), "sweep: give at least one value in --alphas or --alpha-fractions");
      require(s_constants.empty() || s_dims.size() == 1, "sweep: --constants applies to a single dimension");
      std::size_t dropped = 0;
      auto dims = std::vector<int>(s_dims);
      std::sort(dims.begin(), dims.end());
      dims.erase(std::unique(dims.begin(), dims.end()), dims.end());
      const auto base = sweep_flags.merged();

      std::vector<std::pair<SolverConfig, ConstantsReport>> jobs;
      for (int d : dims) {
        auto constants = load_or_compute_constants(s_constants, d, io);
        require(constants.d == d, "sweep: constants file is for d = " + std::to_string(constants.d));
        std::vector<double> values = alphas;
        for (double f : fracs) values.push_back(f * constants.alpha_ceiling());
        values = dedup_sorted(values, dropped);
        if (dropped > 0) io.err << "warning: dropped " << dropped << " duplicate alpha value(s) for d = " << d << "\n";
        for (double a : values) {
          SolverConfig cfg = base;
          cfg.d = d;
          cfg.alpha = a;
          cfg.c_hls = constants.hls.value;
          cfg.validate();
          jobs.emplace_back(cfg, constants);
        }
      }

      std::map<std::string, SweepRow> rows;
      for (std::size_t start = 0; start < jobs.size(); start += s_jobs) {
        std::vector<std::future<SweepRow>> batch;
        for (std::size_t k = start; k < std::min(jobs.size(), start + s_jobs); ++k) {
          batch.push_back(std::async(std::launch::async, sweep_task, jobs[k].first, jobs[k].second, dir));
        }
        for (auto& f : batch) {
          auto row = f.get();
          rows.emplace(row.hash, std::move(row));
        }
      }
      std::vector<SweepRow> ordered;
      for (auto& [hash, row] : rows) ordered.push_back(std::move(row));
      std::sort(ordered.begin(), ordered.end(),
                [](const SweepRow& a, const SweepRow& b) { return std::tie(a.d, a.alpha) < std::tie(b.d, b.alpha); });
      std::ostringstream table;
      table << sweep_header() << "\n";
      bool any_failed = false;
      for (const auto& r : ordered) {
        table << sweep_line(r) << "\n";
        if (r.status == "failed") {
          any_failed = true;
          io.err << "run d = " << r.d << " alpha = " << r.alpha << " failed: " << r.error << "\n";
        }
      }
      const auto path = s_out.empty() ? dir / "sweep.csv" : std::filesystem::path(s_out);
      write_text(path, table.str());
      io.out << table.str() << "wrote " << path.string() << "\n";
      return any_failed ? ExitCode::numerical_abort : ExitCode::ok;
    }
  } catch (const InvalidArgument& e) {
    io.err << "error: " << e.what() << "\n";
    return ExitCode::usage;
  } catch (const NumericalAbort& e) {
    io.err << "numerical abort: " << e.what() << "\n";
    return ExitCode::numerical_abort;
  } catch (const std::filesystem::filesystem_error& e) {
    io.err << "error: " << e.what() << "\n";
    return ExitCode::usage;
  }
  return ExitCode::usage;
}

inline int main_impl(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<const char*> argv{"hlsflow"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return main_impl(static_cast<int>(argv.size()), argv.data(), Io{out, err});
}

}  // namespace hlsflow::cli
