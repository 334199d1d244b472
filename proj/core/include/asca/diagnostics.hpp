#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace asca {

// Squared residual norm of every row (SPE).
Eigen::VectorXd q_statistic(const Eigen::MatrixXd& residuals);

// Hotelling statistic per row: sum_r scores_ir^2 / lambda_r with
// lambda_r = sigma_r^2 / (N - 1), the variance of component r.
Eigen::VectorXd d_statistic(const Eigen::MatrixXd& scores, const Eigen::VectorXd& singular_values);

// Empirical percentile with linear interpolation between order statistics
// (Hyndman-Fan type 7): h = (n - 1) * pct / 100, result x[floor h] +
// (h - floor h) * (x[floor h + 1] - x[floor h]) on the sorted values.
double control_limit(std::span<const double> values, double percentile);

struct MspcChart {
  Eigen::VectorXd q;
  Eigen::VectorXd d;
  double q_limit = 0.0;
  double d_limit = 0.0;
  double percentile = 99.0;
};

MspcChart mspc_chart(const Eigen::MatrixXd& residuals, const Eigen::MatrixXd& scores,
                     const Eigen::VectorXd& singular_values, double percentile = 99.0);

// r_k = sum_t (x_t - mean)(x_{t+k} - mean) / sum_t (x_t - mean)^2, k = 0..max_lag.
std::vector<double> sample_acf(std::span<const double> series, std::size_t max_lag);

// Tukey box summary; quartiles use the same type-7 rule as control_limit and
// whiskers reach the most extreme values within 1.5 IQR of the box.
struct BoxSummary {
  std::string level;
  std::size_t count = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;
};

BoxSummary box_summary(std::span<const double> values, std::string level = {});

// Box summaries of all residual entries grouped by the level of each row, in
// order of first appearance.
std::vector<BoxSummary> residual_dispersion(const Eigen::MatrixXd& residuals,
                                            const std::vector<std::string>& row_levels);

}  // namespace asca
