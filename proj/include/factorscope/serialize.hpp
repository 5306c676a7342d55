#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "factorscope/covariance.hpp"
#include "factorscope/eigen_factor.hpp"
#include "factorscope/forecasting.hpp"
#include "factorscope/simulation.hpp"
#include "factorscope/two_step.hpp"

// Writers for the artifact files the CLI produces. All of them are
// deterministic: fixed key order, 17-significant-digit floats (non-finite
// values become JSON null), '\n' line endings. Emission is hand-rolled so the
// byte-for-byte reproducibility contract does not depend on a JSON library's
// float formatting.

namespace factorscope {

// JSON string literal with the usual escapes.
std::string json_quote(const std::string& s);

// 17-significant-digit JSON number; null when not finite.
std::string json_number(double v);

std::string to_json(const FactorModelFit& fit);
std::string to_json(const TwoStepFit& fit);
std::string to_json(const NoiseModel& noise);
std::string to_json(const CovarianceEstimates& est);

// CSV "index,eigenvalue", one row per eigenvalue, descending order as given.
std::string eigenvalues_csv(const Eigen::VectorXd& eigenvalues);

// CSV "replication,metric,value", replication-major; undefined metrics are
// omitted entirely.
std::string simulation_csv(const SimulationReport& report);

// Config echo plus per-metric {mean, sd}; undefined metrics serialize as
// null, and sd is null when there are fewer than two replications.
std::string simulation_summary_json(const SimulationReport& report);

// Human-oriented fixed-width table: one row per metric, "mean (sd)" cells,
// "-" for undefined metrics. Not part of the reproducibility contract but
// deterministic anyway.
std::string simulation_table(const SimulationReport& report);

// CSV "window_index,method,rmse,cumulative_rmse" with one factor_ar row and
// one random_walk row per window (factor rmse is nan for invalid windows).
std::string forecast_csv(const ForecastReport& report);

// Window counts and total RMSE per method.
std::string forecast_summary_json(const ForecastReport& report);

// {"version": ..., "command": ..., <entries>}. Entry values must already be
// valid JSON fragments (use json_quote / json_number for non-literals).
std::string manifest_json(
    const std::string& command,
    const std::vector<std::pair<std::string, std::string>>& entries);

// Writes content to path, creating parent directories as needed. Throws
// InputError when the file cannot be opened.
void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

}  // namespace factorscope
