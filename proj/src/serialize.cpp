#include "factorscope/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "factorscope/errors.hpp"
#include "factorscope/num_format.hpp"
#include "factorscope/version.hpp"

namespace factorscope {

namespace {

std::string vector_json(const Eigen::VectorXd& v) {
  std::string out = "[";
  for (long i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += json_number(v(i));
  }
  out += "]";
  return out;
}

// Row-major nested arrays, one inner array per matrix row.
std::string matrix_json(const Eigen::MatrixXd& m, const std::string& indent) {
  const std::string close =
      indent.size() >= 2 ? indent.substr(0, indent.size() - 2) : indent;
  std::string out = "[";
  for (long i = 0; i < m.rows(); ++i) {
    if (i) out += ",";
    out += "\n" + indent + "[";
    for (long j = 0; j < m.cols(); ++j) {
      if (j) out += ", ";
      out += json_number(m(i, j));
    }
    out += "]";
  }
  out += "\n" + close + "]";
  return out;
}

std::string int_groups_json(const std::vector<std::vector<int>>& groups) {
  std::string out = "[";
  for (size_t g = 0; g < groups.size(); ++g) {
    if (g) out += ", ";
    out += "[";
    for (size_t i = 0; i < groups[g].size(); ++i) {
      if (i) out += ", ";
      out += std::to_string(groups[g][i]);
    }
    out += "]";
  }
  out += "]";
  return out;
}

// 4-significant-digit cell for the human-readable table.
std::string table_cell(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

std::string json_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += "\"";
  return out;
}

std::string json_number(double v) {
  if (!std::isfinite(v)) return "null";
  return format_double(v);
}

std::string to_json(const FactorModelFit& fit) {
  std::string out = "{\n";
  out += "  \"r\": " + std::to_string(fit.r) + ",\n";
  out += "  \"k0\": " + std::to_string(fit.k0) + ",\n";
  out += "  \"eigenvalues\": " + vector_json(fit.eigenvalues) + ",\n";
  out += "  \"a_hat\": " + matrix_json(fit.a_hat, "    ") + ",\n";
  out += "  \"factors\": " + matrix_json(fit.factors, "    ") + "\n";
  out += "}\n";
  return out;
}

std::string to_json(const TwoStepFit& fit) {
  std::string out = "{\n";
  out += "  \"r\": " + std::to_string(fit.r1 + fit.r2) + ",\n";
  out += "  \"r1\": " + std::to_string(fit.r1) + ",\n";
  out += "  \"r2\": " + std::to_string(fit.r2) + ",\n";
  out += "  \"k0\": " + std::to_string(fit.k0) + ",\n";
  out += "  \"eigenvalues\": " + vector_json(fit.stage1_eigenvalues) + ",\n";
  out += "  \"stage2_eigenvalues\": " + vector_json(fit.stage2_eigenvalues) +
         ",\n";
  out += "  \"a_hat\": " + matrix_json(fit.combined, "    ") + ",\n";
  out += "  \"factors\": " + matrix_json(fit.factors, "    ") + "\n";
  out += "}\n";
  return out;
}

std::string to_json(const NoiseModel& noise) {
  std::string out = "{\"groups\": " + int_groups_json(noise.groups);
  out += ", \"variances\": [";
  for (size_t i = 0; i < noise.variances.size(); ++i) {
    if (i) out += ", ";
    out += json_number(noise.variances[i]);
  }
  out += "]}";
  return out;
}

std::string to_json(const CovarianceEstimates& est) {
  std::string out = "{\n";
  out += "  \"sigma_x_hat\": " + matrix_json(est.sigma_x_hat, "    ") + ",\n";
  out += "  \"noise\": " + to_json(est.noise) + ",\n";
  out += "  \"sigma_y_hat\": " + matrix_json(est.sigma_y_hat, "    ") + ",\n";
  out += "  \"precision_hat\": " + matrix_json(est.precision_hat, "    ") +
         "\n";
  out += "}\n";
  return out;
}

std::string eigenvalues_csv(const Eigen::VectorXd& eigenvalues) {
  std::string out = "index,eigenvalue\n";
  for (long i = 0; i < eigenvalues.size(); ++i) {
    out += std::to_string(i) + "," + format_double(eigenvalues(i)) + "\n";
  }
  return out;
}

std::string simulation_csv(const SimulationReport& report) {
  std::string out = "replication,metric,value\n";
  for (int rep = 0; rep < report.reps; ++rep) {
    for (const MetricSeries& m : report.metrics) {
      if (!m.defined) continue;
      out += std::to_string(rep) + "," + m.name + "," +
             format_double(m.values[rep]) + "\n";
    }
  }
  return out;
}

std::string simulation_summary_json(const SimulationReport& report) {
  std::string out = "{\n";
  out += "  \"config\": {";
  for (size_t i = 0; i < report.config_echo.size(); ++i) {
    if (i) out += ", ";
    out += json_quote(report.config_echo[i].first) + ": " +
           json_quote(report.config_echo[i].second);
  }
  out += "},\n";
  out += "  \"base_seed\": " + std::to_string(report.base_seed) + ",\n";
  out += "  \"reps\": " + std::to_string(report.reps) + ",\n";
  out += "  \"metrics\": {";
  bool first = true;
  for (const MetricSeries& m : report.metrics) {
    if (!first) out += ",";
    first = false;
    out += "\n    " + json_quote(m.name) + ": ";
    if (!m.defined) {
      out += "null";
      continue;
    }
    out += "{\"mean\": " + json_number(metric_mean(m)) +
           ", \"sd\": " + json_number(metric_sd(m)) + "}";
  }
  out += "\n  }\n";
  out += "}\n";
  return out;
}

std::string simulation_table(const SimulationReport& report) {
  std::string header;
  for (const auto& [key, value] : report.config_echo) {
    if (!header.empty()) header += " ";
    header += key + "=" + value;
  }
  std::string out = header + "\n";
  char line[128];
  std::snprintf(line, sizeof(line), "  %-26s %14s %14s\n", "metric", "mean",
                "sd");
  out += line;
  for (const MetricSeries& m : report.metrics) {
    const std::string mean_cell =
        m.defined ? table_cell(metric_mean(m)) : std::string("-");
    const double sd = metric_sd(m);
    const std::string sd_cell =
        (m.defined && std::isfinite(sd)) ? table_cell(sd) : std::string("-");
    std::snprintf(line, sizeof(line), "  %-26s %14s %14s\n", m.name.c_str(),
                  mean_cell.c_str(), sd_cell.c_str());
    out += line;
  }
  return out;
}

std::string forecast_csv(const ForecastReport& report) {
  std::string out = "window_index,method,rmse,cumulative_rmse\n";
  for (size_t i = 0; i < report.windows.size(); ++i) {
    const WindowResult& win = report.windows[i];
    out += std::to_string(win.index) + ",factor_ar," +
           format_double(win.rmse_factor) + "," +
           format_double(report.cumulative_factor[i]) + "\n";
    out += std::to_string(win.index) + ",random_walk," +
           format_double(win.rmse_rw) + "," +
           format_double(report.cumulative_rw[i]) + "\n";
  }
  return out;
}

std::string forecast_summary_json(const ForecastReport& report) {
  std::string out = "{\n";
  out += "  \"windows\": " + std::to_string(report.windows.size()) + ",\n";
  out += "  \"valid_windows\": " + std::to_string(report.valid_windows) +
         ",\n";
  out += "  \"total_rmse\": {\"factor_ar\": " + json_number(report.total_factor) +
         ", \"random_walk\": " + json_number(report.total_rw) + "}\n";
  out += "}\n";
  return out;
}

std::string manifest_json(
    const std::string& command,
    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string out = "{\n";
  out += "  \"version\": " + json_quote(kVersion) + ",\n";
  out += "  \"command\": " + json_quote(command);
  for (const auto& [key, value] : entries) {
    out += ",\n  " + json_quote(key) + ": " + value;
  }
  out += "\n}\n";
  return out;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InputError("cannot open " + path.string() + " for writing");
  }
  out << content;
  if (!out) {
    throw InputError("failed while writing " + path.string());
  }
}

}  // namespace factorscope
