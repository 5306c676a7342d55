#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "factorscope/errors.hpp"

namespace factorscope {

// An n x p observation matrix: row t is the p-vector observed at time t.
// Immutable after construction; all entries are finite. The time index is
// implicit (0-based row order) -- the estimators only use order.
class TimeSeriesPanel {
 public:
  // labels are optional column names; must be empty or exactly p long.
  explicit TimeSeriesPanel(Eigen::MatrixXd data,
                           std::vector<std::string> labels = {});

  long n() const { return data_.rows(); }
  long p() const { return data_.cols(); }
  const Eigen::MatrixXd& data() const { return data_; }
  bool has_labels() const { return !labels_.empty(); }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  Eigen::MatrixXd data_;
  std::vector<std::string> labels_;
};

// Reads a UTF-8 comma-separated panel: one time point per row, one series per
// column, optional single header row. Cells must parse as finite doubles with
// '.' decimal separator; missing values are rejected. Requires >= 2 data rows.
TimeSeriesPanel load_csv(const std::filesystem::path& path, bool has_header);

// Writes the panel back out with 17-significant-digit values (bit-exact
// round-trip through load_csv). Header row emitted when labels are present.
void write_csv(const TimeSeriesPanel& panel, const std::filesystem::path& path);

// First differences: row t of the result is row t+1 minus row t. Needs n >= 3
// so the output is still a usable (>= 2 row) panel. Labels are preserved.
TimeSeriesPanel difference(const TimeSeriesPanel& panel);

// Column-stacks a matrix into one row vector: (col 0)^T, (col 1)^T, ...
Eigen::RowVectorXd column_stack(const Eigen::MatrixXd& m);

// Turns a sequence of equally-sized matrices (one grid per time point) into a
// panel with p = rows*cols, each row the column-stacked grid.
TimeSeriesPanel vectorize_grid(const std::vector<Eigen::MatrixXd>& grids);

}  // namespace factorscope
