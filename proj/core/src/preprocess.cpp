#include "asca/preprocess.hpp"

#include <cmath>
#include <ostream>

#include "asca/error.hpp"

namespace asca {

DesignTable drop_rows_by_missing(const DesignTable& table, std::size_t threshold,
                                 ExclusionReport* report) {
  ExclusionReport local;
  local.threshold = threshold;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    const auto missing = static_cast<std::size_t>(table.missing.row(r).count());
    if (missing > threshold) local.excluded.push_back({table.row_labels[static_cast<std::size_t>(r)], missing});
    else keep.push_back(r);
  }
  if (keep.empty()) {
    throw Error(ErrorCode::AllRowsDropped, "every row has more than " + std::to_string(threshold) +
                                               " missing values");
  }
  DesignTable out = table;
  out.matrix.resize(static_cast<Eigen::Index>(keep.size()), table.cols());
  out.missing.resize(static_cast<Eigen::Index>(keep.size()), table.cols());
  out.row_labels.clear();
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.matrix.row(r) = table.matrix.row(keep[i]);
    out.missing.row(r) = table.missing.row(keep[i]);
    out.row_labels.push_back(table.row_labels[static_cast<std::size_t>(keep[i])]);
  }
  if (report) *report = std::move(local);
  return out;
}

DesignTable impute_column_mean(const DesignTable& table, std::size_t* imputed) {
  DesignTable out = table;
  std::size_t count = 0;
  for (Eigen::Index c = 0; c < table.cols(); ++c) {
    double sum = 0.0;
    Eigen::Index observed = 0;
    for (Eigen::Index r = 0; r < table.rows(); ++r) {
      if (!table.missing(r, c)) {
        sum += table.matrix(r, c);
        ++observed;
      }
    }
    if (observed == table.rows()) continue;
    if (observed == 0) {
      throw Error(ErrorCode::EmptyColumn, "column " + join_label(table.col_labels[static_cast<std::size_t>(c)]) +
                                              " has no observed values");
    }
    const double mean = sum / static_cast<double>(observed);
    for (Eigen::Index r = 0; r < table.rows(); ++r) {
      if (table.missing(r, c)) {
        out.matrix(r, c) = mean;
        ++count;
      }
    }
  }
  out.missing.setConstant(false);
  if (imputed) *imputed = count;
  return out;
}

ScalingResult mean_center(const Eigen::MatrixXd& x) {
  ScalingResult result;
  result.means = x.colwise().mean();
  result.matrix = x.rowwise() - result.means;
  result.scales = Eigen::RowVectorXd::Ones(x.cols());
  return result;
}

ScalingResult autoscale(const Eigen::MatrixXd& x) {
  ScalingResult result = mean_center(x);
  const double denom = static_cast<double>(std::max<Eigen::Index>(x.rows() - 1, 1));
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double sd = std::sqrt(result.matrix.col(c).squaredNorm() / denom);
    // Relative test so columns that are constant up to rounding count as constant.
    if (!(sd > 1e-14 * std::max(1.0, std::abs(result.means(c))))) {
      result.zero_variance_columns.push_back(c);
      result.matrix.col(c).setZero();
      continue;
    }
    result.scales(c) = sd;
    result.matrix.col(c) /= sd;
  }
  return result;
}

void write_preprocess_report(const ExclusionReport& exclusion, std::size_t imputed,
                             std::size_t total_cells, const ScalingResult& scaling,
                             const std::string& method, std::ostream& out) {
  out << "row exclusion threshold: " << exclusion.threshold << " missing values\n";
  out << "excluded rows: " << exclusion.excluded.size() << '\n';
  for (const auto& row : exclusion.excluded) {
    out << "  " << join_label(row.label) << "  missing=" << row.missing << '\n';
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", total_cells ? 100.0 * imputed / total_cells : 0.0);
  out << "imputed cells (column mean): " << imputed << " of " << total_cells << " (" << buf << "%)\n";
  out << "scaling: " << method << '\n';
  if (!scaling.zero_variance_columns.empty()) {
    out << "zero-variance columns left centered: " << scaling.zero_variance_columns.size() << '\n';
  }
}

}  // namespace asca
