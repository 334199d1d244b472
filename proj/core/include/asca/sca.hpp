#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace asca {

// PCA of one effect matrix. Loadings come from the effect alone; augmented
// scores project effect + residuals onto the same loadings.
struct ScaView {
  std::string term;
  Eigen::MatrixXd loadings;          // M x R, orthonormal columns
  Eigen::VectorXd singular_values;   // R, nonincreasing
  Eigen::MatrixXd scores_effect;     // N x R
  Eigen::MatrixXd scores_augmented;  // N x R, empty until augment_scores
  Eigen::VectorXd explained_fraction;
  std::vector<std::string> warnings;

  Eigen::Index components() const { return loadings.cols(); }
};

// Truncated SVD of the effect matrix. Each loading column is signed so that its
// entry of largest magnitude is positive (first such entry on ties).
ScaView pca_effect(const Eigen::MatrixXd& effect, Eigen::Index components, std::string term = {});

ScaView augment_scores(ScaView view, const Eigen::MatrixXd& residuals);

struct BiplotPoint {
  std::string label;
  double x = 0.0;
  double y = 0.0;
};

struct Biplot {
  std::vector<BiplotPoint> scores;    // one per distinct row group
  std::vector<BiplotPoint> loadings;  // one per variable, rescaled by `scale`
  double scale = 1.0;
  Eigen::Index pc_x = 0;
  Eigen::Index pc_y = 1;
};

// Effect scores averaged per row group (rows sharing a group label share an
// effect score) and loadings multiplied by max|score| / max|loading| so both
// clouds span the same range. Components are zero-based; with a single
// component pc_y may equal pc_x, and the y coordinates are then 0.
Biplot biplot_coords(const ScaView& view, Eigen::Index pc_x, Eigen::Index pc_y,
                     const std::vector<std::string>& row_groups,
                     const std::vector<std::string>& col_labels);

}  // namespace asca
