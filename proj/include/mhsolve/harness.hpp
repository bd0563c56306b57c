#pragma once

// Experiment driver behind the mhsolve command-line tool: presets, h-sweeps
// against a tight reference, observable tracking and CSV/JSON output.
// Needs the vendored CLI11 and nlohmann/json headers on the include path.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mhsolve/presets.hpp"
#include "mhsolve/stepper.hpp"

namespace mhsolve {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::array<std::string_view, 6> kMethodNames = {"strang", "bm",  "mhbm",
                                                                  "mhc",    "mhk", "dense"};
inline constexpr std::array<std::string_view, 3> kRunModes = {"all", "convergence", "observables"};

struct ExperimentSpec {
  std::string preset = "gp-defocusing-driven";
  std::vector<std::string> methods = {"mhc"};
  std::vector<double> h_list = {0.1, 0.03125, 0.01, 0.0031546, 0.001};
  double T = 1.0;
  int K = 3;
  std::optional<double> delta;
  std::uint64_t seed = 7;
  int n = 0;  // 0: preset default
  std::string output_dir = ".";
  bool strang_first = true;
  double lanczos_tol = 1e-8;
  std::string run = "all";

  void validate() const;
};

class CliError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for --help; what() is the usage text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <std::size_t N>
std::string join_names(const std::array<std::string_view, N>& names) {
  std::string s;
  for (auto n : names) {
    if (!s.empty()) s += ", ";
    s += n;
  }
  return s;
}

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& names, std::string_view v) {
  return std::find(names.begin(), names.end(), v) != names.end();
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace detail

inline void ExperimentSpec::validate() const {
  if (!is_preset_name(preset))
    throw CliError("unknown preset '" + preset + "'; valid presets: " + preset_name_list());
  if (methods.empty()) throw CliError("no backend selected");
  for (const auto& m : methods)
    if (!detail::contains(kMethodNames, m))
      throw CliError("unknown backend '" + m + "'; valid backends: " +
                     detail::join_names(kMethodNames));
  if (!detail::contains(kRunModes, run))
    throw CliError("unknown run mode '" + run + "'; valid modes: " + detail::join_names(kRunModes));
  if (h_list.empty()) throw CliError("empty step-size list");
  for (std::size_t i = 0; i < h_list.size(); ++i) {
    if (!(h_list[i] > 0) || !std::isfinite(h_list[i]))
      throw CliError("step sizes must be positive and finite");
    if (i > 0 && !(h_list[i] < h_list[i - 1]))
      throw CliError("step sizes must be strictly decreasing");
  }
  if (!(T > 0)) throw CliError("T must be positive");
  if (K < 1) throw CliError("K must be at least 1");
  if (delta && !(*delta > 0)) throw CliError("delta must be positive");
  if (!(lanczos_tol > 0)) throw CliError("Lanczos tolerance must be positive");
  if (n < 0) throw CliError("n must be positive");
  const bool matrix = preset.starts_with("matrix");
  for (const auto& m : methods) {
    if (matrix && (m == "strang" || m == "bm" || m == "mhbm" || m == "mhc"))
      throw CliError("backend '" + m + "' needs a grid preset; use mhk or dense with " + preset);
  }
}

/// Applies keys of a JSON config object onto a spec. Keys mirror the long
/// CLI flags without dashes ("h-list", "strang-first", ...).
inline void apply_config(ExperimentSpec& s, const nlohmann::json& j,
                         const std::map<std::string, bool>& set_on_cli = {}) {
  auto skip = [&](const char* key) {
    auto it = set_on_cli.find(key);
    return !j.contains(key) || (it != set_on_cli.end() && it->second);
  };
  auto list_of_strings = [](const nlohmann::json& v) {
    if (v.is_array()) return v.get<std::vector<std::string>>();
    return detail::split_list(v.get<std::string>());
  };
  static const std::array<std::string_view, 14> known = {
      "preset", "backend", "h", "h-list", "steps", "T", "K", "delta",
      "seed", "n", "out", "strang-first", "lanczos-tol", "run"};
  for (const auto& [k, v] : j.items())
    if (!detail::contains(known, k)) throw CliError("unknown config key '" + k + "'");
  try {
    if (!skip("preset")) s.preset = j["preset"].get<std::string>();
    if (!skip("backend")) s.methods = list_of_strings(j["backend"]);
    if (!skip("h-list")) {
      const auto& v = j["h-list"];
      if (v.is_array()) {
        s.h_list = v.get<std::vector<double>>();
      } else {
        s.h_list.clear();
        for (const auto& x : detail::split_list(v.get<std::string>())) s.h_list.push_back(std::stod(x));
      }
    }
    if (!skip("h")) s.h_list = {j["h"].get<double>()};
    if (!skip("T")) s.T = j["T"].get<double>();
    if (!skip("steps")) s.h_list = {s.T / j["steps"].get<int>()};
    if (!skip("K")) s.K = j["K"].get<int>();
    if (!skip("delta")) s.delta = j["delta"].get<double>();
    if (!skip("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (!skip("n")) s.n = j["n"].get<int>();
    if (!skip("out")) s.output_dir = j["out"].get<std::string>();
    if (!skip("lanczos-tol")) s.lanczos_tol = j["lanczos-tol"].get<double>();
    if (!skip("run")) s.run = j["run"].get<std::string>();
    if (!skip("strang-first")) {
      const auto& v = j["strang-first"];
      s.strang_first = v.is_boolean() ? v.get<bool>() : v.get<std::string>() == "on";
    }
  } catch (const nlohmann::json::exception& e) {
    throw CliError(std::string("bad config value: ") + e.what());
  }
}

/// Parses command-line arguments (without the program name).
inline ExperimentSpec parse_cli(const std::vector<std::string>& args) {
  ExperimentSpec s;
  CLI::App app{"Iterated-linearisation Magnus-Hermite solver for cubic NLS / Gross-Pitaevskii",
               "mhsolve"};
  app.set_help_flag("--help", "Print this help message and exit");
  std::string preset, backend, h_list, strang_first = "on", config, run;
  double h = 0, T = 1, delta = 0, tol = 0;
  int steps = 0, K = 0, n = 0;
  std::uint64_t seed = 0;
  std::string out;
  app.add_option("--preset", preset, "Problem: " + preset_name_list());
  app.add_option("--backend", backend,
                 "Method(s), comma separated: " + detail::join_names(kMethodNames));
  auto* h_opt = app.add_option("--h", h, "Single time step");
  auto* hl_opt = app.add_option("--h-list", h_list, "Comma-separated decreasing time steps");
  auto* steps_opt = app.add_option("--steps", steps, "Number of steps N (h = T/N)");
  h_opt->excludes(hl_opt)->excludes(steps_opt);
  hl_opt->excludes(steps_opt);
  app.add_option("--T", T, "Final time");
  app.add_option("--K", K, "Magnus-Hermite iterations per step");
  app.add_option("--delta", delta, "Early-exit threshold on the iterate update");
  app.add_option("--seed", seed, "Seed for the random-matrix presets");
  app.add_option("--n", n, "Grid points or matrix dimension");
  app.add_option("--out", out, "Output directory");
  app.add_option("--strang-first", strang_first, "Start each step from a Strang step")
      ->check(CLI::IsMember({"on", "off"}));
  app.add_option("--config", config, "JSON file with default values for the flags")
      ->check(CLI::ExistingFile);
  app.add_option("--lanczos-tol", tol, "Lanczos tolerance for mhk");
  app.add_option("--run", run, "What to run: all, convergence, observables");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw CliError(std::string(e.what()) + "\n\n" + app.help());
  }

  std::map<std::string, bool> on_cli;
  for (const char* f : {"preset", "backend", "h", "h-list", "steps", "T", "K", "delta", "seed",
                        "n", "out", "strang-first", "lanczos-tol", "run"})
    on_cli[f] = app.count(std::string("--") + f) > 0;
  // any of the three step flags on the CLI overrides all of them in the file
  const bool steps_on_cli = on_cli["h"] || on_cli["h-list"] || on_cli["steps"];
  if (steps_on_cli) on_cli["h"] = on_cli["h-list"] = on_cli["steps"] = true;

  if (!config.empty()) {
    std::ifstream in(config);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CliError("cannot parse config file '" + config + "': " + e.what());
    }
    if (!j.is_object()) throw CliError("config file must hold a JSON object");
    apply_config(s, j, on_cli);
  }

  if (on_cli["preset"]) s.preset = preset;
  if (on_cli["backend"]) s.methods = detail::split_list(backend);
  if (on_cli["T"]) s.T = T;
  if (on_cli["h"]) s.h_list = {h};
  if (on_cli["h-list"]) {
    s.h_list.clear();
    try {
      for (const auto& x : detail::split_list(h_list)) s.h_list.push_back(std::stod(x));
    } catch (const std::exception&) {
      throw CliError("--h-list expects comma-separated numbers, got '" + h_list + "'");
    }
  }
  if (app.count("--steps") > 0) {
    if (steps < 1) throw CliError("--steps must be >= 1");
    s.h_list = {s.T / steps};
  }
  if (on_cli["K"]) s.K = K;
  if (on_cli["delta"]) s.delta = delta;
  if (on_cli["seed"]) s.seed = seed;
  if (on_cli["n"]) s.n = n;
  if (on_cli["out"]) s.output_dir = out;
  if (on_cli["strang-first"]) s.strang_first = strang_first == "on";
  if (on_cli["lanczos-tol"]) s.lanczos_tol = tol;
  if (on_cli["run"]) s.run = run;
  s.validate();
  return s;
}

inline StepConfig method_config(std::string_view method, const ExperimentSpec& s) {
  StepConfig cfg;
  cfg.K = s.K;
  cfg.delta = s.delta;
  cfg.strang_first = s.strang_first;
  cfg.backend = ExpBackend::lanczos(s.lanczos_tol, 128);
  if (method == "strang") {
    cfg.scheme = Scheme::Strang;
  } else if (method == "bm") {
    cfg.scheme = Scheme::BlanesMoan;
  } else if (method == "mhbm") {
    cfg.backend = ExpBackend::blanes_moan();
  } else if (method == "mhc") {
    cfg.backend = ExpBackend::chin_chen();
  } else if (method == "dense") {
    cfg.backend = ExpBackend::dense();
  } else if (method != "mhk") {
    throw CliError("unknown backend '" + std::string(method) + "'");
  }
  return cfg;
}

inline int steps_for(double T, double h) {
  return std::max(1, static_cast<int>(std::lround(T / h)));
}

/// Least-squares slope of log(error) against log(h), ignoring non-finite
/// and non-positive errors. NaN when fewer than two points remain.
inline double fit_slope(const std::vector<double>& h, const std::vector<double>& err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < h.size() && i < err.size(); ++i) {
    if (!std::isfinite(err[i]) || !(err[i] > 0) || !(h[i] > 0)) continue;
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) return std::nan("");
  const double den = m * sxx - sx * sx;
  if (den == 0) return std::nan("");
  return (m * sxy - sx * sy) / den;
}

struct ConvergenceRow {
  std::string method;
  double h = 0;
  double error = 0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::map<std::string, double> slopes;

  std::vector<double> errors(std::string_view method) const {
    std::vector<double> e;
    for (const auto& r : rows)
      if (r.method == method) e.push_back(r.error);
    return e;
  }
  std::vector<double> steps(std::string_view method) const {
    std::vector<double> h;
    for (const auto& r : rows)
      if (r.method == method) h.push_back(r.h);
    return h;
  }
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline Preset preset_for(const ExperimentSpec& s) {
  return make_preset(s.preset, PresetOptions{s.n, s.seed});
}

/// Error of one run against a given reference; NaN when the run breaks down.
inline double run_error(const Preset& p, std::string_view method, const ExperimentSpec& s, double h,
                        const CVector& reference) {
  StepConfig cfg = method_config(method, s);
  EvolveOptions opt;
  opt.record_observables = false;
  try {
    const Trajectory tr = evolve(p.model, p.u0, s.T, steps_for(s.T, h), cfg, opt);
    if (!tr.final_state.allFinite()) return std::nan("");
    return model_norm(p.model, CVector(tr.final_state - reference));
  } catch (const StepError&) {
    return std::nan("");
  } catch (const LanczosError&) {
    return std::nan("");
  }
}

/// Runs every method at every h to T and measures the error against
/// reference_solution. h values are snapped to T/N for integer N.
inline ConvergenceTable run_convergence(const ExperimentSpec& s,
                                        const CVector* precomputed_reference = nullptr) {
  s.validate();
  const Preset p = preset_for(s);
  const double h_min = s.T / steps_for(s.T, s.h_list.back());
  const CVector reference = precomputed_reference
                                ? *precomputed_reference
                                : reference_solution(p.model, p.u0, s.T, h_min);
  ConvergenceTable table;
  for (const auto& m : s.methods) {
    std::vector<double> hs, es;
    for (double h_req : s.h_list) {
      const double h = s.T / steps_for(s.T, h_req);
      const double e = run_error(p, m, s, h, reference);
      table.rows.push_back({m, h, e});
      hs.push_back(h);
      es.push_back(e);
    }
    table.slopes[m] = fit_slope(hs, es);
  }
  return table;
}

inline void write_convergence_csv(const ConvergenceTable& t, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "method,h,error\n";
  for (const auto& r : t.rows)
    out << r.method << ',' << format_double(r.h) << ',' << format_double(r.error) << '\n';
}

inline void write_observables_csv(const std::vector<ObservableRecord>& recs,
                                  const std::filesystem::path& file, bool as_change = false) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "t,norm,momentum,energy,energy_linear\n";
  if (recs.empty()) return;
  const ObservableRecord& r0 = recs.front();
  for (const auto& r : recs) {
    const double b = as_change ? 1.0 : 0.0;
    out << format_double(r.t) << ',' << format_double(r.norm - b * r0.norm) << ','
        << format_double(r.momentum - b * r0.momentum) << ','
        << format_double(r.energy - b * r0.energy) << ',';
    if (r.energy_linear && r0.energy_linear)
      out << format_double(*r.energy_linear - b * *r0.energy_linear);
    out << '\n';
  }
}

/// Observables along one trajectory of the first method at the smallest h.
inline std::vector<ObservableRecord> run_observables(const ExperimentSpec& s) {
  s.validate();
  const Preset p = preset_for(s);
  const StepConfig cfg = method_config(s.methods.front(), s);
  return evolve(p.model, p.u0, s.T, steps_for(s.T, s.h_list.back()), cfg).observables;
}

inline nlohmann::json spec_to_json(const ExperimentSpec& s) {
  nlohmann::json j;
  j["preset"] = s.preset;
  j["backend"] = s.methods;
  j["h-list"] = s.h_list;
  j["T"] = s.T;
  j["K"] = s.K;
  if (s.delta) j["delta"] = *s.delta;
  j["seed"] = s.seed;
  j["n"] = s.n;
  j["out"] = s.output_dir;
  j["strang-first"] = s.strang_first ? "on" : "off";
  j["lanczos-tol"] = s.lanczos_tol;
  j["run"] = s.run;
  return j;
}

/// Runs what the spec asks for and writes convergence.csv, observables.csv,
/// observables_change.csv and run_manifest.json into the output directory.
inline nlohmann::json run_experiment(const ExperimentSpec& s) {
  s.validate();
  std::filesystem::path dir(s.output_dir);
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["spec"] = spec_to_json(s);
  manifest["versions"] = {{"mhsolve", std::string(kVersion)},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                        std::to_string(EIGEN_MINOR_VERSION)},
                          {"fftw", std::string(fftw_version)}};
  if (s.run == "all" || s.run == "convergence") {
    const ConvergenceTable t = run_convergence(s);
    write_convergence_csv(t, dir / "convergence.csv");
    nlohmann::json slopes = nlohmann::json::object();
    for (const auto& [m, v] : t.slopes) slopes[m] = std::isfinite(v) ? nlohmann::json(v) : nullptr;
    manifest["slopes"] = slopes;
  }
  if (s.run == "all" || s.run == "observables") {
    const auto recs = run_observables(s);
    write_observables_csv(recs, dir / "observables.csv");
    write_observables_csv(recs, dir / "observables_change.csv", true);
  }
  std::ofstream(dir / "run_manifest.json") << manifest.dump(2) << '\n';
  return manifest;
}

}  // namespace mhsolve
