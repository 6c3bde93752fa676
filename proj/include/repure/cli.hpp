#pragma once

// Command-line front end: simulate (purity trajectory), analyze (oscillation
// report), sweep (threshold map over a p_up x 2*eps*tau/pi grid).
//
// Options can come from flags or from a json config file (--config); explicit
// flags win over file values. Time units: epsilon = 1, so the frequency is
// entered as omega/epsilon and the pulse spacing as epsilon*tau.
//
// Exit codes: 0 success, 2 invalid config, 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "repure/errors.hpp"
#include "repure/io.hpp"
#include "repure/purification.hpp"
#include "repure/two_qubit.hpp"
#include "repure/version.hpp"

namespace repure::cli {

enum class Command { simulate, analyze, sweep };

inline const char* name_of(Command c) {
  switch (c) {
    case Command::simulate: return "simulate";
    case Command::analyze: return "analyze";
    default: return "sweep";
  }
}

/// Fully merged and validated run description.
struct RunConfig {
  Command command = Command::simulate;

  // model + initial state (simulate, analyze)
  double omega_over_eps = 0.0;
  double eps_tau = 0.0;
  double theta = 0.0;
  double p_up = 0.0;
  double coh_re = 0.0;
  double coh_im = 0.0;
  long steps = 0;  // simulate only

  // grid (sweep)
  double p_lo = 0.1, p_hi = 0.9;
  double x_lo = 0.1, x_hi = 0.9;
  long np = 32, nx = 32;
  double eta_cap = 1e3;

  std::string out;
  io::FileFormat format = io::FileFormat::csv;
};

/// Raw option state as parsed; unset fields fall back to config-file values.
struct CliOptions {
  std::optional<double> omega_over_eps, eps_tau, theta, p_up, coh_re, coh_im;
  std::optional<long> steps;
  std::optional<double> p_lo, p_hi, x_lo, x_hi, eta_cap;
  std::optional<long> np, nx;
  std::optional<std::string> format, out;
  std::string config_path;
};

namespace detail {

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) known = true;
    if (!known) throw ConfigError("config: unknown key '" + where + item.key() + "'");
  }
}

inline nlohmann::json load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  check_keys(j, {"model", "state", "steps", "grid", "output"}, "");
  if (j.contains("model"))
    check_keys(j.at("model"), {"omega_over_eps", "eps_tau", "theta"}, "model.");
  if (j.contains("state")) check_keys(j.at("state"), {"p_up", "coh_re", "coh_im"}, "state.");
  if (j.contains("grid"))
    check_keys(j.at("grid"), {"p_lo", "p_hi", "x_lo", "x_hi", "np", "nx", "eta_cap"}, "grid.");
  if (j.contains("output")) check_keys(j.at("output"), {"path", "format"}, "output.");
  return j;
}

inline const nlohmann::json* block(const nlohmann::json& j, const char* key) {
  return j.contains(key) ? &j.at(key) : nullptr;
}

template <typename T>
T merged(const std::optional<T>& flag, const nlohmann::json* blk, const char* key,
         std::type_identity_t<std::optional<T>> fallback, const char* flag_name) {
  if (flag) return *flag;
  if (blk && blk->contains(key)) {
    try {
      return blk->at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
    }
  }
  if (fallback) return *fallback;
  throw ConfigError(std::string("missing required option ") + flag_name);
}

inline void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw ConfigError(std::string(name) + " must be finite");
}

}  // namespace detail

/// Merge flags over config-file values over defaults, then validate.
inline RunConfig build_run_config(Command cmd, const CliOptions& o) {
  using detail::merged;
  nlohmann::json file;
  if (!o.config_path.empty()) file = detail::load_config_file(o.config_path);
  const nlohmann::json* jm = detail::block(file, "model");
  const nlohmann::json* js = detail::block(file, "state");
  const nlohmann::json* jg = detail::block(file, "grid");
  const nlohmann::json* jo = detail::block(file, "output");

  RunConfig c;
  c.command = cmd;
  c.out = merged<std::string>(o.out, jo, "path", std::nullopt, "--out");
  c.format = io::format_from_string(
      merged<std::string>(o.format, jo, "format", std::string("csv"), "--format"));

  if (cmd == Command::simulate || cmd == Command::analyze) {
    c.omega_over_eps =
        merged(o.omega_over_eps, jm, "omega_over_eps", std::nullopt, "--omega-over-eps");
    c.eps_tau = merged(o.eps_tau, jm, "eps_tau", std::nullopt, "--eps-tau");
    c.theta = merged(o.theta, jm, "theta", std::nullopt, "--theta");
    c.p_up = merged(o.p_up, js, "p_up", std::nullopt, "--p-up");
    c.coh_re = merged(o.coh_re, js, "coh_re", 0.0, "--coh-re");
    c.coh_im = merged(o.coh_im, js, "coh_im", 0.0, "--coh-im");

    detail::require_finite(c.omega_over_eps, "--omega-over-eps");
    detail::require_finite(c.eps_tau, "--eps-tau");
    detail::require_finite(c.theta, "--theta");
    detail::require_finite(c.p_up, "--p-up");
    detail::require_finite(c.coh_re, "--coh-re");
    detail::require_finite(c.coh_im, "--coh-im");
    if (c.omega_over_eps <= 0.0) throw ConfigError("--omega-over-eps must be positive");
    if (c.eps_tau < 0.0) throw ConfigError("--eps-tau must be nonnegative");
    if (c.theta < 0.0 || c.theta > std::numbers::pi)
      throw ConfigError("--theta must lie in [0, pi]");
    if (c.p_up < 0.0 || c.p_up > 1.0) throw ConfigError("--p-up must lie in [0, 1]");
    const double coh2 = c.coh_re * c.coh_re + c.coh_im * c.coh_im;
    if (coh2 > c.p_up * (1.0 - c.p_up) + 1e-12)
      throw ConfigError("coherence too large: need |coh|^2 <= p_up (1 - p_up)");
  }
  if (cmd == Command::simulate) {
    c.steps = merged(o.steps, file.is_object() ? &file : nullptr, "steps", std::nullopt,
                     "--steps");
    if (c.steps < 0) throw ConfigError("--steps must be nonnegative");
  }
  if (cmd == Command::sweep) {
    c.p_lo = merged(o.p_lo, jg, "p_lo", 0.1, "--p-lo");
    c.p_hi = merged(o.p_hi, jg, "p_hi", 0.9, "--p-hi");
    c.x_lo = merged(o.x_lo, jg, "x_lo", 0.1, "--x-lo");
    c.x_hi = merged(o.x_hi, jg, "x_hi", 0.9, "--x-hi");
    c.np = merged(o.np, jg, "np", 32L, "--np");
    c.nx = merged(o.nx, jg, "nx", 32L, "--nx");
    c.eta_cap = merged(o.eta_cap, jg, "eta_cap", 1e3, "--eta-cap");

    detail::require_finite(c.p_lo, "--p-lo");
    detail::require_finite(c.p_hi, "--p-hi");
    detail::require_finite(c.x_lo, "--x-lo");
    detail::require_finite(c.x_hi, "--x-hi");
    detail::require_finite(c.eta_cap, "--eta-cap");
    if (!(c.p_lo <= c.p_hi)) throw ConfigError("--p-lo must not exceed --p-hi");
    if (!(c.x_lo <= c.x_hi)) throw ConfigError("--x-lo must not exceed --x-hi");
    if (c.p_lo <= 0.0 || c.p_hi >= 1.0)
      throw ConfigError("sweep populations must lie strictly inside (0, 1)");
    if (c.np < 1 || c.nx < 1) throw ConfigError("--np and --nx must be at least 1");
    if (c.eta_cap < 1.0) throw ConfigError("--eta-cap must be at least 1");
  }
  return c;
}

namespace detail {

inline nlohmann::json config_echo(const RunConfig& c) {
  nlohmann::json j;
  j["command"] = name_of(c.command);
  j["output"] = {{"path", c.out}, {"format", io::to_string(c.format)}};
  if (c.command == Command::simulate || c.command == Command::analyze) {
    j["model"] = {{"omega_over_eps", c.omega_over_eps}, {"eps_tau", c.eps_tau},
                  {"theta", c.theta}};
    j["state"] = {{"p_up", c.p_up}, {"coh_re", c.coh_re}, {"coh_im", c.coh_im}};
  }
  if (c.command == Command::simulate) j["steps"] = c.steps;
  if (c.command == Command::sweep)
    j["grid"] = {{"p_lo", c.p_lo}, {"p_hi", c.p_hi}, {"x_lo", c.x_lo}, {"x_hi", c.x_hi},
                 {"np", c.np},     {"nx", c.nx},     {"eta_cap", c.eta_cap}};
  return j;
}

inline nlohmann::json meta_block(const RunConfig& c) {
  return {{"tool", "repure"}, {"version", kVersion}, {"command", name_of(c.command)},
          {"config", config_echo(c)}};
}

inline twoqubit::ModelParams model_of(const RunConfig& c) {
  return {c.omega_over_eps, 1.0, c.eps_tau, c.theta};
}

inline DensityMatrix initial_state(const RunConfig& c) {
  return DensityMatrix::from_populations(c.p_up, Cx{c.coh_re, c.coh_im});
}

template <typename Row>
inline void emit(const RunConfig& c, const std::vector<Row>& rows) {
  std::string content;
  if (c.format == io::FileFormat::csv) {
    std::ostringstream os;
    io::write_csv(os, rows);
    content = os.str();
  } else {
    content = io::to_json_document(meta_block(c), rows);
  }
  io::write_file(c.out, content);
}

/// Evenly spaced grid points, lo..hi inclusive; a single point sits at lo.
inline double grid_point(double lo, double hi, long i, long n) {
  if (n <= 1) return lo;
  return lo + (hi - lo) * (static_cast<double>(i) / static_cast<double>(n - 1));
}

/// Run fn(i) for i in [0, n) on a small thread pool; exceptions are kept per
/// index and the lowest-index one is rethrown, so failures are deterministic.
template <typename Fn>
inline void parallel_for(long n, Fn&& fn) {
  if (n <= 0) return;
  unsigned hw = std::thread::hardware_concurrency();
  long n_threads = std::clamp<long>(hw == 0 ? 1 : static_cast<long>(hw), 1, n);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (long t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t] {
      for (long i = t; i < n; i += n_threads) {
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

inline void cmd_simulate(const RunConfig& c) {
  const twoqubit::ModelParams model = detail::model_of(c);
  twoqubit::validate(model);
  const Mat2 V = twoqubit::v_operator(model);
  const PurityTrajectory traj = trajectory(detail::initial_state(c), V, c.steps);
  if (traj.truncated)
    throw StateAnnihilated("record probability vanished at step " +
                           std::to_string(traj.truncated_at) + "; no output written");
  std::vector<io::TrajectoryRow> rows;
  rows.reserve(traj.steps.size());
  for (const TrajectoryStep& s : traj.steps) rows.push_back(io::to_row(s));
  detail::emit(c, rows);
}

inline void cmd_analyze(const RunConfig& c) {
  const twoqubit::ModelParams model = detail::model_of(c);
  twoqubit::validate(model);
  const SpectralData s = eig_biorthogonal(twoqubit::v_operator(model));
  const InitialDecomposition d = decompose(detail::initial_state(c), s);
  const OscillationReport rep = analyze_oscillations(d, s.g);
  io::AnalysisRecord r;
  r.g = s.g;
  r.a = d.a;
  r.b = d.b;
  r.c_tilde = d.c_tilde;
  r.det_rho0 = d.det_rho0;
  r.local_min_at_1 = rep.local_min_at_1;
  r.local_max_at_1_possible = rep.local_max_at_1_possible;
  r.k_monotonic_sufficient = rep.k_monotonic_sufficient;
  r.k_monotonic_simplified = rep.k_monotonic_simplified;
  r.simplified_is_exact = rep.simplified_is_exact;
  detail::emit(c, std::vector<io::AnalysisRecord>{r});
}

inline void cmd_sweep(const RunConfig& c) {
  const long n = c.np * c.nx;
  std::vector<io::SweepRow> rows(static_cast<std::size_t>(n));
  detail::parallel_for(n, [&](long i) {
    const long ip = i / c.nx;
    const long ix = i % c.nx;
    io::SweepRow& r = rows[static_cast<std::size_t>(i)];
    r.p_up = detail::grid_point(c.p_lo, c.p_hi, ip, c.np);
    r.two_eps_tau_over_pi = detail::grid_point(c.x_lo, c.x_hi, ix, c.nx);
    const double eps_tau = r.two_eps_tau_over_pi * std::numbers::pi / 2.0;
    r.eta_raw = twoqubit::eta_threshold(r.p_up, eps_tau);
    r.eta = std::min(r.eta_raw, c.eta_cap);
    r.monotonic = r.eta_raw < 1.0;
  });
  detail::emit(c, rows);
}

inline void execute(const RunConfig& c) {
  switch (c.command) {
    case Command::simulate: cmd_simulate(c); break;
    case Command::analyze: cmd_analyze(c); break;
    case Command::sweep: cmd_sweep(c); break;
  }
}

namespace detail {

inline void add_output_flags(CLI::App* sub, CliOptions& o) {
  sub->add_option("--config", o.config_path, "json config file; explicit flags override it");
  sub->add_option("--format", o.format, "output format: csv or json (default csv)");
  sub->add_option("--out", o.out, "output file path");
}

inline void add_model_flags(CLI::App* sub, CliOptions& o) {
  sub->add_option("--omega-over-eps", o.omega_over_eps, "Bohr frequency over coupling");
  sub->add_option("--eps-tau", o.eps_tau, "coupling times pulse spacing");
  sub->add_option("--theta", o.theta, "measured-state angle in [0, pi]");
  sub->add_option("--p-up", o.p_up, "initial population of the up state");
  sub->add_option("--coh-re", o.coh_re, "initial coherence, real part (default 0)");
  sub->add_option("--coh-im", o.coh_im, "initial coherence, imaginary part (default 0)");
}

}  // namespace detail

/// Parse argv and run. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& err = std::cerr) {
  CLI::App app{"repeated-measurement purification: trajectories, oscillation "
               "reports, threshold maps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CliOptions sim_o, ana_o, swp_o;
  CLI::App* sim = app.add_subcommand("simulate", "emit a purity trajectory");
  detail::add_model_flags(sim, sim_o);
  sim->add_option("--steps", sim_o.steps, "number of measurements to apply");
  detail::add_output_flags(sim, sim_o);

  CLI::App* ana = app.add_subcommand("analyze", "emit an oscillation report");
  detail::add_model_flags(ana, ana_o);
  detail::add_output_flags(ana, ana_o);

  CLI::App* swp = app.add_subcommand("sweep", "emit a threshold map grid");
  swp->add_option("--p-lo", swp_o.p_lo, "lowest up population (default 0.1)");
  swp->add_option("--p-hi", swp_o.p_hi, "highest up population (default 0.9)");
  swp->add_option("--x-lo", swp_o.x_lo, "lowest 2*eps*tau/pi (default 0.1)");
  swp->add_option("--x-hi", swp_o.x_hi, "highest 2*eps*tau/pi (default 0.9)");
  swp->add_option("--np", swp_o.np, "population grid points (default 32)");
  swp->add_option("--nx", swp_o.nx, "spacing grid points (default 32)");
  swp->add_option("--eta-cap", swp_o.eta_cap, "cap on the reported eta (default 1000)");
  detail::add_output_flags(swp, swp_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    err << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    Command cmd;
    const CliOptions* opts;
    if (sim->parsed()) {
      cmd = Command::simulate;
      opts = &sim_o;
    } else if (ana->parsed()) {
      cmd = Command::analyze;
      opts = &ana_o;
    } else {
      cmd = Command::sweep;
      opts = &swp_o;
    }
    execute(build_run_config(cmd, *opts));
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace repure::cli
