#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "asca/design.hpp"

namespace asca {

struct Effect {
  std::string term;
  Eigen::MatrixXd matrix;
};

// X = 1 m^T + sum of effects + E, with the coefficients of the least-squares
// regression of X onto the coding matrix.
struct EffectDecomposition {
  Eigen::RowVectorXd grand_mean;
  std::vector<Effect> effects;
  Eigen::MatrixXd residuals;
  Eigen::MatrixXd coefficients;
  double centered_total_ss = 0.0;  // ||X - column means||_F^2
  Eigen::Index rank = 0;
  bool rank_deficient = false;
  std::vector<std::string> warnings;

  const Eigen::MatrixXd& effect(std::string_view term) const;  // throws UnknownTerm
  Eigen::MatrixXd fitted_without_mean() const;                   // sum of all effects
};

// Least-squares solver for one coding matrix, reused across refits. Uses
// column-pivoted QR; when the design is rank deficient it falls back to the
// minimum-norm solution of a complete orthogonal decomposition.
class LeastSquares {
 public:
  explicit LeastSquares(const Eigen::MatrixXd& design);

  Eigen::MatrixXd solve(const Eigen::MatrixXd& x) const;
  Eigen::Index rank() const { return rank_; }
  bool full_rank() const { return rank_ == cols_; }
  // P x N matrix mapping observations to coefficients.
  const Eigen::MatrixXd& pseudo_inverse() const { return pinv_; }

 private:
  Eigen::Index cols_;
  Eigen::Index rank_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod_;
  Eigen::MatrixXd pinv_;
};

EffectDecomposition fit(const Eigen::MatrixXd& x, const DesignMatrix& design);

inline constexpr const char* kResidualsName = "residuals";

struct AnovaRow {
  std::string term;
  double ss = 0.0;
  double pct_ss = 0.0;
  int df = 0;
  double ms = 0.0;
  std::optional<double> f;
  std::optional<double> p;
};

struct AnovaTable {
  std::vector<AnovaRow> terms;
  AnovaRow residual;
  AnovaRow total;  // pct_ss is the sum over terms and residual
  std::string reference = kResidualsName;
  std::vector<std::string> warnings;

  const AnovaRow& row(std::string_view term) const;  // terms, residuals or total
  AnovaRow& row(std::string_view term);
};

// F of every term against the mean squares of `reference` (residuals by
// default, or another term name).
AnovaTable anova_table(const EffectDecomposition& dec, const DesignMatrix& design,
                       std::string_view reference = kResidualsName);

// Fit, table and permutation test for a single response vector.
AnovaTable univariate_anova(const Eigen::VectorXd& x, const DesignMatrix& design,
                            std::size_t permutations, std::uint64_t seed);

// Column order SS, %SS, df, MS, F, p; absent F/p print as empty fields.
void write_table_csv(const AnovaTable& table, std::ostream& out);
void write_table_text(const AnovaTable& table, std::ostream& out);
std::vector<AnovaRow> read_table_csv(std::istream& in);

}  // namespace asca
