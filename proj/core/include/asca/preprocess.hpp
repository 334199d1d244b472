#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "asca/tensor.hpp"

namespace asca {

struct ExcludedRow {
  LabelTuple label;
  std::size_t missing = 0;
};

struct ExclusionReport {
  std::size_t threshold = 0;
  std::vector<ExcludedRow> excluded;
};

// Removes rows with more than `threshold` missing cells.
DesignTable drop_rows_by_missing(const DesignTable& table, std::size_t threshold,
                                 ExclusionReport* report = nullptr);

// Replaces missing cells by the mean of the observed cells of their column.
// Returns the number of imputed cells through `imputed`.
DesignTable impute_column_mean(const DesignTable& table, std::size_t* imputed = nullptr);

struct ScalingResult {
  Eigen::MatrixXd matrix;
  Eigen::RowVectorXd means;
  Eigen::RowVectorXd scales;  // 1 for centering or zero-variance columns
  std::vector<Eigen::Index> zero_variance_columns;
};

ScalingResult mean_center(const Eigen::MatrixXd& x);

// Centers and divides by the sample standard deviation (N-1 denominator).
// Zero-variance columns are left centered and listed in the result.
ScalingResult autoscale(const Eigen::MatrixXd& x);

void write_preprocess_report(const ExclusionReport& exclusion, std::size_t imputed,
                             std::size_t total_cells, const ScalingResult& scaling,
                             const std::string& method, std::ostream& out);

}  // namespace asca
