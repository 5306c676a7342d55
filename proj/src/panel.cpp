#include "factorscope/panel.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "factorscope/num_format.hpp"

namespace factorscope {

TimeSeriesPanel::TimeSeriesPanel(Eigen::MatrixXd data,
                                 std::vector<std::string> labels)
    : data_(std::move(data)), labels_(std::move(labels)) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    throw DimensionError("panel must have at least 1 row and 1 column, got " +
                         std::to_string(data_.rows()) + "x" +
                         std::to_string(data_.cols()));
  }
  if (!data_.allFinite()) {
    throw DimensionError("panel contains non-finite entries");
  }
  if (!labels_.empty() &&
      static_cast<long>(labels_.size()) != data_.cols()) {
    throw DimensionError("label count " + std::to_string(labels_.size()) +
                         " does not match column count " +
                         std::to_string(data_.cols()));
  }
}

namespace {

// Splits one CSV line on commas. No quoting support: cells are numbers (or
// header names without commas), per the file contract.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string::size_type start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

std::string trimmed(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

TimeSeriesPanel load_csv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open file: " + path.string());
  }

  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::string line;
  long file_line = 0;  // 1-based line number as a text editor would show it
  long data_row = 0;
  while (std::getline(in, line)) {
    ++file_line;
    if (file_line == 1 && has_header) {
      for (const auto& cell : split_csv_line(line)) {
        labels.push_back(trimmed(cell));
      }
      width = labels.size();
      continue;
    }
    auto cells = split_csv_line(line);
    ++data_row;
    if (width == 0) {
      width = cells.size();
    } else if (cells.size() != width) {
      throw ParseError("row " + std::to_string(data_row) + " has " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(width),
                       data_row);
    }
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      double v = 0.0;
      const std::string cell = trimmed(cells[c]);
      if (!try_parse_double(cell, v) || !std::isfinite(v)) {
        throw ParseError("cell (" + std::to_string(data_row) + "," +
                             std::to_string(c + 1) + ") is not a finite " +
                             "number: \"" + cell + "\"",
                         data_row, static_cast<long>(c + 1));
      }
      row[c] = v;
    }
    rows.push_back(std::move(row));
  }

  if (rows.size() < 2) {
    throw DimensionError("panel needs at least 2 observations, file " +
                         path.string() + " has " + std::to_string(rows.size()));
  }
  Eigen::MatrixXd data(static_cast<long>(rows.size()),
                       static_cast<long>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      data(static_cast<long>(r), static_cast<long>(c)) = rows[r][c];
    }
  }
  return TimeSeriesPanel(std::move(data), std::move(labels));
}

void write_csv(const TimeSeriesPanel& panel,
               const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw InputError("cannot open file for writing: " + path.string());
  }
  if (panel.has_labels()) {
    const auto& labels = panel.labels();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (i) out << ',';
      out << labels[i];
    }
    out << '\n';
  }
  const auto& d = panel.data();
  for (long t = 0; t < d.rows(); ++t) {
    for (long j = 0; j < d.cols(); ++j) {
      if (j) out << ',';
      out << format_double(d(t, j));
    }
    out << '\n';
  }
  if (!out) {
    throw InputError("write failed: " + path.string());
  }
}

TimeSeriesPanel difference(const TimeSeriesPanel& panel) {
  if (panel.n() < 3) {
    throw DimensionError(
        "difference needs at least 3 rows (got " + std::to_string(panel.n()) +
        "); the differenced panel must keep at least 2");
  }
  const auto& d = panel.data();
  Eigen::MatrixXd out =
      d.bottomRows(panel.n() - 1) - d.topRows(panel.n() - 1);
  return TimeSeriesPanel(std::move(out), panel.labels());
}

Eigen::RowVectorXd column_stack(const Eigen::MatrixXd& m) {
  Eigen::RowVectorXd row(m.size());
  long k = 0;
  for (long c = 0; c < m.cols(); ++c) {
    for (long r = 0; r < m.rows(); ++r) {
      row(k++) = m(r, c);
    }
  }
  return row;
}

TimeSeriesPanel vectorize_grid(const std::vector<Eigen::MatrixXd>& grids) {
  if (grids.empty()) {
    throw DimensionError("vectorize_grid: empty grid sequence");
  }
  const long pu = grids.front().rows();
  const long pv = grids.front().cols();
  if (pu < 1 || pv < 1) {
    throw DimensionError("vectorize_grid: grids must be non-empty matrices");
  }
  Eigen::MatrixXd data(static_cast<long>(grids.size()), pu * pv);
  for (std::size_t t = 0; t < grids.size(); ++t) {
    if (grids[t].rows() != pu || grids[t].cols() != pv) {
      throw DimensionError(
          "vectorize_grid: grid " + std::to_string(t) + " is " +
          std::to_string(grids[t].rows()) + "x" +
          std::to_string(grids[t].cols()) + ", expected " +
          std::to_string(pu) + "x" + std::to_string(pv));
    }
    data.row(static_cast<long>(t)) = column_stack(grids[t]);
  }
  return TimeSeriesPanel(std::move(data));
}

}  // namespace factorscope
