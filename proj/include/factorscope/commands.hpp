#pragma once

#include <cstdint>
#include <string>

namespace factorscope {

// Seed used when a command does not pass --seed; echoed into the manifest so
// every run is replayable either way.
inline constexpr std::uint64_t kDefaultSeed = 1729;

// Resolved configuration for `factorscope estimate`.
struct EstimateConfig {
  std::string input;
  std::string output_dir;
  bool header = false;
  std::string method = "one_step";  // one_step | two_step
  int r = 0;                        // one_step factor count
  int r1 = 0;                       // two_step split
  int r2 = 0;
  int k0 = 0;
  int groups_k = 1;                 // residual-variance grouping, ignored when
  std::string groups_file;          // an explicit partition file is given
};

// Resolved configuration for `factorscope simulate`.
struct SimulateConfig {
  std::string design;  // example1 | example2
  long n = 0;
  long p = 0;
  int reps = 50;
  std::uint64_t seed = kDefaultSeed;
  int k0 = -1;  // -1: design default (example1 -> 1, example2 -> 3)
  std::string method = "one_step";  // one_step | two_step | both
  int r = -1;   // -1: design default (example1 -> 1, example2 -> 3)
  int r1 = 1;
  int r2 = 2;
  double delta1 = 0.0;
  double delta2 = 0.0;
  std::string noise_dist = "t5";  // t5 | normal (example2 only)
  int threads = 1;
  std::string output_dir;
};

// Resolved configuration for `factorscope forecast`.
struct ForecastConfig {
  std::string input;
  std::string output_dir;
  bool header = false;
  long window = 0;
  int r = 1;
  int k0 = 0;
  int ar_max_order = 5;
  std::string auto_r;  // "" (fixed r) | ratio | ic
  int r_max = 8;
  bool difference = false;
  int threads = 1;
};

// Each command writes its artifacts (plus manifest.json) into output_dir and
// returns 0; failures are reported by exception (InputError family for bad
// input, NumericFailure family for numeric breakdown).
int cmd_estimate(const EstimateConfig& cfg);
int cmd_simulate(const SimulateConfig& cfg);
int cmd_forecast(const ForecastConfig& cfg);

// Re-executes the command recorded in a manifest.json, optionally redirecting
// artifacts to a different directory (empty = keep the recorded one).
int cmd_rerun(const std::string& manifest_path, const std::string& output_dir);

// Full CLI entry point: parses argv, dispatches, and maps failures to exit
// codes (0 success, 2 usage/input, 3 numeric).
int run_cli(int argc, const char* const* argv);

}  // namespace factorscope
