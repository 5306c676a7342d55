#include "factorscope/commands.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "factorscope/covariance.hpp"
#include "factorscope/eigen_factor.hpp"
#include "factorscope/errors.hpp"
#include "factorscope/forecasting.hpp"
#include "factorscope/panel.hpp"
#include "factorscope/serialize.hpp"
#include "factorscope/simulation.hpp"
#include "factorscope/two_step.hpp"
#include "factorscope/version.hpp"

namespace factorscope {

namespace {

namespace fs = std::filesystem;
using ManifestEntries = std::vector<std::pair<std::string, std::string>>;

const char* bool_json(bool b) { return b ? "true" : "false"; }

std::vector<std::vector<int>> parse_groups_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open groups file " + path);
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("groups file " + path + ": " + e.what());
  }
  if (!doc.is_array()) {
    throw InputError("groups file " + path +
                     " must be a JSON array of index arrays");
  }
  std::vector<std::vector<int>> groups;
  for (const auto& entry : doc) {
    if (!entry.is_array()) {
      throw InputError("groups file " + path +
                       ": every group must be an array of indices");
    }
    std::vector<int> indices;
    for (const auto& v : entry) {
      if (!v.is_number_integer()) {
        throw InputError("groups file " + path +
                         ": indices must be integers");
      }
      indices.push_back(v.get<int>());
    }
    groups.push_back(std::move(indices));
  }
  return groups;
}

// --threads beats FACTORSCOPE_THREADS beats the single-threaded default.
int resolve_threads(bool flag_given, int flag_value) {
  if (flag_given) return flag_value;
  const char* env = std::getenv("FACTORSCOPE_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  int v = 0;
  const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), v);
  if (ec != std::errc() || *ptr != '\0' || v < 1) {
    throw InputError(
        std::string("FACTORSCOPE_THREADS must be a positive integer, got '") +
        env + "'");
  }
  return v;
}

}  // namespace

int cmd_estimate(const EstimateConfig& cfg) {
  if (cfg.k0 < 1) {
    throw ConfigError("--k0 must be >= 1");
  }
  const TimeSeriesPanel panel = load_csv(cfg.input, cfg.header);
  const fs::path dir(cfg.output_dir);

  std::string fit_json;
  std::string eigen_csv;
  FactorModelFit view;  // single-fit form feeding the covariance stage
  if (cfg.method == "one_step") {
    if (cfg.r < 1) {
      throw ConfigError("--method one_step needs --r >= 1");
    }
    view = fit(panel, cfg.r, cfg.k0);
    fit_json = to_json(view);
    eigen_csv = eigenvalues_csv(view.eigenvalues);
  } else if (cfg.method == "two_step") {
    if (cfg.r1 < 1 || cfg.r2 < 1) {
      throw ConfigError("--method two_step needs --r1 >= 1 and --r2 >= 1");
    }
    const TwoStepFit two = two_step_fit(panel, cfg.r1, cfg.r2, cfg.k0);
    fit_json = to_json(two);
    eigen_csv = eigenvalues_csv(two.stage1_eigenvalues);
    view = to_factor_fit(two);
  } else {
    throw ConfigError("unknown method '" + cfg.method +
                      "' (one_step | two_step)");
  }

  std::vector<std::vector<int>> groups;
  if (!cfg.groups_file.empty()) {
    groups = parse_groups_file(cfg.groups_file);
  } else {
    if (cfg.groups_k < 1) {
      throw ConfigError("--groups must be >= 1");
    }
    groups = infer_grouping(view, cfg.groups_k).groups;
  }
  const NoiseModel noise = estimate_noise_variances(
      view, groups, NoiseDofPolicy::projection_adjusted);
  const CovarianceEstimates est = estimate_covariances(view, panel, noise);

  write_text_file(dir / "fit.json", fit_json);
  write_text_file(dir / "covariance.json", to_json(est));
  write_text_file(dir / "eigenvalues.csv", eigen_csv);

  ManifestEntries entries = {
      {"input", json_quote(cfg.input)},
      {"output_dir", json_quote(cfg.output_dir)},
      {"header", bool_json(cfg.header)},
      {"method", json_quote(cfg.method)},
  };
  if (cfg.method == "one_step") {
    entries.emplace_back("r", std::to_string(cfg.r));
  } else {
    entries.emplace_back("r1", std::to_string(cfg.r1));
    entries.emplace_back("r2", std::to_string(cfg.r2));
  }
  entries.emplace_back("k0", std::to_string(cfg.k0));
  if (!cfg.groups_file.empty()) {
    entries.emplace_back("groups_file", json_quote(cfg.groups_file));
  } else {
    entries.emplace_back("groups", std::to_string(cfg.groups_k));
  }
  entries.emplace_back("noise_dof", json_quote("projection_adjusted"));
  write_text_file(dir / "manifest.json", manifest_json("estimate", entries));
  return 0;
}

int cmd_simulate(const SimulateConfig& cfg) {
  MethodSet methods;
  if (cfg.method == "one_step") {
    methods = {true, false};
  } else if (cfg.method == "two_step") {
    methods = {false, true};
  } else if (cfg.method == "both") {
    methods = {true, true};
  } else {
    throw ConfigError("unknown method '" + cfg.method +
                      "' (one_step | two_step | both)");
  }

  SimulationReport report;
  int k0 = cfg.k0;
  int r = cfg.r;
  ManifestEntries entries = {
      {"design", json_quote(cfg.design)},
      {"n", std::to_string(cfg.n)},
      {"p", std::to_string(cfg.p)},
      {"reps", std::to_string(cfg.reps)},
      {"seed", std::to_string(cfg.seed)},
  };
  if (cfg.design == "example1") {
    if (k0 < 0) k0 = 1;
    if (r < 0) r = 1;
    Example1Config ec;
    ec.n = cfg.n;
    ec.p = cfg.p;
    ec.k0 = k0;
    ec.r = r;
    report = run_replications(ec, cfg.reps, methods, cfg.seed, cfg.threads);
    entries.emplace_back("k0", std::to_string(k0));
    entries.emplace_back("r", std::to_string(r));
  } else if (cfg.design == "example2") {
    if (k0 < 0) k0 = 3;
    if (r < 0) r = 3;
    Example2Config ec;
    ec.n = cfg.n;
    ec.p = cfg.p;
    ec.k0 = k0;
    ec.r = r;
    ec.r1 = cfg.r1;
    ec.r2 = cfg.r2;
    ec.delta1 = cfg.delta1;
    ec.delta2 = cfg.delta2;
    if (cfg.noise_dist == "normal") {
      ec.noise_dist = NoiseDist::normal;
    } else if (cfg.noise_dist == "t5") {
      ec.noise_dist = NoiseDist::student_t5;
    } else {
      throw ConfigError("unknown noise distribution '" + cfg.noise_dist +
                        "' (t5 | normal)");
    }
    report = run_replications(ec, cfg.reps, methods, cfg.seed, cfg.threads);
    entries.emplace_back("k0", std::to_string(k0));
    entries.emplace_back("r", std::to_string(r));
    entries.emplace_back("r1", std::to_string(cfg.r1));
    entries.emplace_back("r2", std::to_string(cfg.r2));
    entries.emplace_back("delta1", json_number(cfg.delta1));
    entries.emplace_back("delta2", json_number(cfg.delta2));
    entries.emplace_back("noise_dist", json_quote(cfg.noise_dist));
  } else {
    throw ConfigError("unknown design '" + cfg.design +
                      "' (example1 | example2)");
  }
  entries.emplace_back("method", json_quote(cfg.method));
  entries.emplace_back("threads", std::to_string(cfg.threads));
  entries.emplace_back("output_dir", json_quote(cfg.output_dir));

  const fs::path dir(cfg.output_dir);
  write_text_file(dir / "replications.csv", simulation_csv(report));
  write_text_file(dir / "summary.json", simulation_summary_json(report));
  write_text_file(dir / "manifest.json", manifest_json("simulate", entries));
  std::cout << simulation_table(report);
  return 0;
}

int cmd_forecast(const ForecastConfig& cfg) {
  TimeSeriesPanel panel = load_csv(cfg.input, cfg.header);
  if (cfg.difference) {
    panel = difference(panel);
  }

  RollingConfig rc;
  rc.window_length = cfg.window;
  rc.r = cfg.r;
  rc.k0 = cfg.k0;
  rc.ar_max_order = cfg.ar_max_order;
  rc.r_max = cfg.r_max;
  if (cfg.auto_r.empty()) {
    rc.r_select = RSelect::fixed;
  } else if (cfg.auto_r == "ratio") {
    rc.r_select = RSelect::ratio;
  } else if (cfg.auto_r == "ic") {
    rc.r_select = RSelect::ic_p1;
  } else {
    throw ConfigError("unknown --auto-r '" + cfg.auto_r + "' (ratio | ic)");
  }
  const ForecastReport report = rolling_forecast(panel, rc, cfg.threads);

  const fs::path dir(cfg.output_dir);
  write_text_file(dir / "forecast.csv", forecast_csv(report));
  write_text_file(dir / "summary.json", forecast_summary_json(report));
  const ManifestEntries entries = {
      {"input", json_quote(cfg.input)},
      {"output_dir", json_quote(cfg.output_dir)},
      {"header", bool_json(cfg.header)},
      {"window", std::to_string(cfg.window)},
      {"r", std::to_string(cfg.r)},
      {"k0", std::to_string(cfg.k0)},
      {"ar_max_order", std::to_string(cfg.ar_max_order)},
      {"auto_r", json_quote(cfg.auto_r)},
      {"r_max", std::to_string(cfg.r_max)},
      {"difference", bool_json(cfg.difference)},
      {"threads", std::to_string(cfg.threads)},
  };
  write_text_file(dir / "manifest.json", manifest_json("forecast", entries));
  return 0;
}

int cmd_rerun(const std::string& manifest_path,
              const std::string& output_dir) {
  std::ifstream in(manifest_path);
  if (!in) {
    throw InputError("cannot open manifest " + manifest_path);
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("manifest " + manifest_path + ": " + e.what());
  }

  std::string command;
  try {
    command = doc.at("command").get<std::string>();
    if (command == "estimate") {
      EstimateConfig cfg;
      cfg.input = doc.at("input").get<std::string>();
      cfg.output_dir = output_dir.empty()
                           ? doc.at("output_dir").get<std::string>()
                           : output_dir;
      cfg.header = doc.value("header", false);
      cfg.method = doc.value("method", std::string("one_step"));
      cfg.r = doc.value("r", 0);
      cfg.r1 = doc.value("r1", 0);
      cfg.r2 = doc.value("r2", 0);
      cfg.k0 = doc.at("k0").get<int>();
      cfg.groups_k = doc.value("groups", 1);
      cfg.groups_file = doc.value("groups_file", std::string());
      return cmd_estimate(cfg);
    }
    if (command == "simulate") {
      SimulateConfig cfg;
      cfg.design = doc.at("design").get<std::string>();
      cfg.n = doc.at("n").get<long>();
      cfg.p = doc.at("p").get<long>();
      cfg.reps = doc.at("reps").get<int>();
      cfg.seed = doc.at("seed").get<std::uint64_t>();
      cfg.k0 = doc.at("k0").get<int>();
      cfg.method = doc.value("method", std::string("one_step"));
      cfg.r = doc.value("r", -1);
      cfg.r1 = doc.value("r1", 1);
      cfg.r2 = doc.value("r2", 2);
      cfg.delta1 = doc.value("delta1", 0.0);
      cfg.delta2 = doc.value("delta2", 0.0);
      cfg.noise_dist = doc.value("noise_dist", std::string("t5"));
      cfg.threads = doc.value("threads", 1);
      cfg.output_dir = output_dir.empty()
                           ? doc.at("output_dir").get<std::string>()
                           : output_dir;
      return cmd_simulate(cfg);
    }
    if (command == "forecast") {
      ForecastConfig cfg;
      cfg.input = doc.at("input").get<std::string>();
      cfg.output_dir = output_dir.empty()
                           ? doc.at("output_dir").get<std::string>()
                           : output_dir;
      cfg.header = doc.value("header", false);
      cfg.window = doc.at("window").get<long>();
      cfg.r = doc.value("r", 1);
      cfg.k0 = doc.at("k0").get<int>();
      cfg.ar_max_order = doc.value("ar_max_order", 5);
      cfg.auto_r = doc.value("auto_r", std::string());
      cfg.r_max = doc.value("r_max", 8);
      cfg.difference = doc.value("difference", false);
      cfg.threads = doc.value("threads", 1);
      return cmd_forecast(cfg);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("manifest " + manifest_path + ": " + e.what());
  }
  throw InputError("manifest " + manifest_path + " has unknown command '" +
                   command + "'");
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"latent factor models for high-dimensional time series"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  EstimateConfig est;
  CLI::App* est_cmd = app.add_subcommand(
      "estimate", "fit a factor model to a CSV panel and write the estimates");
  est_cmd->add_option("--input", est.input,
                      "input CSV, rows = time points, columns = coordinates")
      ->required();
  est_cmd->add_option("--output-dir", est.output_dir,
                      "directory for fit.json, covariance.json, "
                      "eigenvalues.csv, manifest.json")
      ->required();
  est_cmd->add_flag("--header", est.header, "input CSV has a header row");
  est_cmd->add_option("--method", est.method, "one_step | two_step")
      ->check(CLI::IsMember({"one_step", "two_step"}));
  est_cmd->add_option("--r", est.r, "factor count (one_step)")
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  est_cmd->add_option("--r1", est.r1, "strong factor count (two_step)")
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  est_cmd->add_option("--r2", est.r2, "weak factor count (two_step)")
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  est_cmd->add_option("--k0", est.k0, "max autocovariance lag")
      ->required()
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  est_cmd
      ->add_option("--groups", est.groups_k,
                   "number of residual-variance groups to infer")
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  est_cmd->add_option("--groups-file", est.groups_file,
                      "JSON file with an explicit coordinate partition");

  SimulateConfig sim;
  CLI::App* sim_cmd = app.add_subcommand(
      "simulate", "Monte Carlo replications of the built-in designs");
  sim_cmd->add_option("--design", sim.design, "example1 | example2")
      ->required();
  sim_cmd->add_option("--n", sim.n, "panel length")
      ->required()
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  sim_cmd->add_option("--p", sim.p, "panel dimension")
      ->required()
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  sim_cmd->add_option("--reps", sim.reps, "replication count (default 50)")
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  sim_cmd->add_option("--seed", sim.seed,
                      "base RNG seed (replication i uses seed + i)");
  sim_cmd->add_option("--k0", sim.k0,
                      "max lag (default: 1 for example1, 3 for example2)")
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  sim_cmd->add_option("--method", sim.method, "one_step | two_step | both")
      ->check(CLI::IsMember({"one_step", "two_step", "both"}));
  sim_cmd->add_option("--r", sim.r,
                      "factor count (default: 1 for example1, 3 for example2)")
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  sim_cmd->add_option("--r1", sim.r1, "two-step strong count (example2)")
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  sim_cmd->add_option("--r2", sim.r2, "two-step weak count (example2)")
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  sim_cmd->add_option("--delta1", sim.delta1,
                      "strength decay of factor 1 (example2)");
  sim_cmd->add_option("--delta2", sim.delta2,
                      "strength decay of factors 2-3 (example2)");
  sim_cmd->add_option("--noise-dist", sim.noise_dist, "t5 | normal (example2)")
      ->check(CLI::IsMember({"t5", "normal"}));
  sim_cmd->add_option("--threads", sim.threads, "worker threads")
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  sim_cmd->add_option("--output-dir", sim.output_dir,
                      "directory for replications.csv, summary.json, "
                      "manifest.json")
      ->required();

  ForecastConfig fc;
  CLI::App* fc_cmd = app.add_subcommand(
      "forecast", "rolling one-step-ahead backtest on a CSV panel");
  fc_cmd->add_option("--input", fc.input, "input CSV")->required();
  fc_cmd->add_option("--output-dir", fc.output_dir,
                     "directory for forecast.csv, summary.json, manifest.json")
      ->required();
  fc_cmd->add_flag("--header", fc.header, "input CSV has a header row");
  fc_cmd->add_option("--window", fc.window, "rolling window length")
      ->required()
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  fc_cmd->add_option("--r", fc.r, "factor count per window (default 1)")
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  fc_cmd->add_option("--k0", fc.k0, "max autocovariance lag")
      ->required()
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  fc_cmd->add_option("--ar-max-order", fc.ar_max_order,
                     "AR order cap for factor forecasts (default 5)")
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  fc_cmd->add_option("--auto-r", fc.auto_r,
                     "select r per window: ratio | ic (default: fixed --r)")
      ->check(CLI::IsMember({"ratio", "ic"}));
  fc_cmd->add_option("--r-max", fc.r_max, "selector cap (default 8)")
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));
  fc_cmd->add_flag("--difference", fc.difference,
                   "first-difference the panel before forecasting");
  fc_cmd->add_option("--threads", fc.threads, "worker threads")
      ->check(CLI::Range(1, std::numeric_limits<int>::max()));

  std::string manifest_path;
  std::string rerun_out;
  CLI::App* rr_cmd = app.add_subcommand(
      "rerun", "re-execute a recorded run from its manifest.json");
  rr_cmd->add_option("--manifest", manifest_path,
                     "manifest.json written by a previous run")
      ->required();
  rr_cmd->add_option("--output-dir", rerun_out,
                     "redirect artifacts (default: the recorded directory)");

  try {
    app.parse(argc, argv);
    if (est_cmd->parsed()) {
      return cmd_estimate(est);
    }
    if (sim_cmd->parsed()) {
      sim.threads = resolve_threads(sim_cmd->count("--threads") > 0,
                                    sim.threads);
      return cmd_simulate(sim);
    }
    if (fc_cmd->parsed()) {
      fc.threads = resolve_threads(fc_cmd->count("--threads") > 0, fc.threads);
      return cmd_forecast(fc);
    }
    if (rr_cmd->parsed()) {
      return cmd_rerun(manifest_path, rerun_out);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints the message / help text
    return code == 0 ? 0 : 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericFailure& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace factorscope
