#include "asca/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "asca/error.hpp"

namespace asca {
namespace {

double sorted_quantile(const std::vector<double>& sorted, double fraction) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * fraction;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

Eigen::VectorXd q_statistic(const Eigen::MatrixXd& residuals) {
  return residuals.rowwise().squaredNorm();
}

Eigen::VectorXd d_statistic(const Eigen::MatrixXd& scores, const Eigen::VectorXd& singular_values) {
  if (scores.cols() != singular_values.size()) {
    throw Error(ErrorCode::ShapeMismatch, "one singular value per score column required");
  }
  const double dof = static_cast<double>(std::max<Eigen::Index>(scores.rows() - 1, 1));
  Eigen::VectorXd d = Eigen::VectorXd::Zero(scores.rows());
  for (Eigen::Index r = 0; r < scores.cols(); ++r) {
    if (!(singular_values(r) > 0.0)) {
      throw Error(ErrorCode::ZeroSingularValue, "component " + std::to_string(r + 1) +
                                                    " has a zero singular value");
    }
    const double lambda = singular_values(r) * singular_values(r) / dof;
    d += scores.col(r).array().square().matrix() / lambda;
  }
  return d;
}

double control_limit(std::span<const double> values, double percentile) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "control limit of an empty vector");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted_quantile(sorted, std::clamp(percentile, 0.0, 100.0) / 100.0);
}

MspcChart mspc_chart(const Eigen::MatrixXd& residuals, const Eigen::MatrixXd& scores,
                     const Eigen::VectorXd& singular_values, double percentile) {
  MspcChart chart;
  chart.percentile = percentile;
  chart.q = q_statistic(residuals);
  chart.d = scores.cols() > 0 ? d_statistic(scores, singular_values)
                              : Eigen::VectorXd::Zero(residuals.rows());
  chart.q_limit = control_limit(std::span<const double>(chart.q.data(), chart.q.size()), percentile);
  chart.d_limit = control_limit(std::span<const double>(chart.d.data(), chart.d.size()), percentile);
  return chart;
}

std::vector<double> sample_acf(std::span<const double> series, std::size_t max_lag) {
  if (series.size() <= max_lag) {
    throw Error(ErrorCode::SeriesTooShort, "series of length " + std::to_string(series.size()) +
                                               " for max lag " + std::to_string(max_lag));
  }
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(series.size());
  double denom = 0.0;
  for (double v : series) denom += (v - mean) * (v - mean);
  if (!(denom > 0.0)) throw Error(ErrorCode::ConstantSeries, "autocorrelation of a constant series");
  std::vector<double> acf(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double num = 0.0;
    for (std::size_t t = 0; t + k < series.size(); ++t) num += (series[t] - mean) * (series[t + k] - mean);
    acf[k] = num / denom;
  }
  acf[0] = 1.0;
  return acf;
}

BoxSummary box_summary(std::span<const double> values, std::string level) {
  if (values.empty()) throw Error(ErrorCode::EmptyLevel, "level '" + level + "' has no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  BoxSummary box;
  box.level = std::move(level);
  box.count = sorted.size();
  box.q1 = sorted_quantile(sorted, 0.25);
  box.median = sorted_quantile(sorted, 0.5);
  box.q3 = sorted_quantile(sorted, 0.75);
  const double iqr = box.q3 - box.q1;
  const double low_fence = box.q1 - 1.5 * iqr;
  const double high_fence = box.q3 + 1.5 * iqr;
  box.whisker_low = box.q1;
  box.whisker_high = box.q3;
  for (double v : sorted) {
    if (v < low_fence || v > high_fence) {
      box.outliers.push_back(v);
      continue;
    }
    box.whisker_low = std::min(box.whisker_low, v);
    box.whisker_high = std::max(box.whisker_high, v);
  }
  return box;
}

std::vector<BoxSummary> residual_dispersion(const Eigen::MatrixXd& residuals,
                                            const std::vector<std::string>& row_levels) {
  if (row_levels.size() != static_cast<std::size_t>(residuals.rows())) {
    throw Error(ErrorCode::ShapeMismatch, "one level label per residual row required");
  }
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> groups;
  for (std::size_t i = 0; i < row_levels.size(); ++i) {
    auto [it, inserted] = groups.try_emplace(row_levels[i]);
    if (inserted) order.push_back(row_levels[i]);
    const auto row = residuals.row(static_cast<Eigen::Index>(i));
    for (Eigen::Index c = 0; c < residuals.cols(); ++c) it->second.push_back(row(c));
  }
  std::vector<BoxSummary> boxes;
  for (const auto& level : order) boxes.push_back(box_summary(groups[level], level));
  return boxes;
}

}  // namespace asca
