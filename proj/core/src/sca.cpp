#include "asca/sca.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "asca/error.hpp"

namespace asca {

ScaView pca_effect(const Eigen::MatrixXd& effect, Eigen::Index components, std::string term) {
  const Eigen::Index max_components = std::min(effect.rows(), effect.cols());
  if (components < 1 || components > max_components) {
    throw Error(ErrorCode::RTooLarge, "requested " + std::to_string(components) +
                                          " components from a " + std::to_string(effect.rows()) + "x" +
                                          std::to_string(effect.cols()) + " effect");
  }
  ScaView view;
  view.term = std::move(term);
  if (effect.squaredNorm() == 0.0) {
    view.loadings.resize(effect.cols(), 0);
    view.singular_values.resize(0);
    view.scores_effect.resize(effect.rows(), 0);
    view.explained_fraction.resize(0);
    view.warnings.push_back("ZeroMatrix: effect of '" + view.term + "' is identically zero");
    return view;
  }

  const Eigen::BDCSVD<Eigen::MatrixXd> svd(effect, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd u = svd.matrixU().leftCols(components);
  Eigen::MatrixXd v = svd.matrixV().leftCols(components);
  const Eigen::VectorXd& sigma_all = svd.singularValues();
  for (Eigen::Index r = 0; r < components; ++r) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index j = 0; j < v.rows(); ++j) {
      if (std::abs(v(j, r)) > best) {
        best = std::abs(v(j, r));
        arg = j;
      }
    }
    if (v(arg, r) < 0.0) {
      v.col(r) = -v.col(r);
      u.col(r) = -u.col(r);
    }
  }
  view.singular_values = sigma_all.head(components);
  view.loadings = v;
  view.scores_effect = effect * v;
  const double total = sigma_all.squaredNorm();
  view.explained_fraction = view.singular_values.array().square() / total;
  return view;
}

ScaView augment_scores(ScaView view, const Eigen::MatrixXd& residuals) {
  if (residuals.rows() != view.scores_effect.rows() || residuals.cols() != view.loadings.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "residuals do not match the effect matrix shape");
  }
  view.scores_augmented = view.scores_effect + residuals * view.loadings;
  return view;
}

Biplot biplot_coords(const ScaView& view, Eigen::Index pc_x, Eigen::Index pc_y,
                     const std::vector<std::string>& row_groups,
                     const std::vector<std::string>& col_labels) {
  const Eigen::Index r = view.components();
  if (pc_x < 0 || pc_y < 0 || pc_x >= r || pc_y >= r) {
    throw Error(ErrorCode::ComponentOutOfRange, "view has " + std::to_string(r) + " components");
  }
  if (row_groups.size() != static_cast<std::size_t>(view.scores_effect.rows()) ||
      col_labels.size() != static_cast<std::size_t>(view.loadings.rows())) {
    throw Error(ErrorCode::ShapeMismatch, "biplot labels do not match the view");
  }
  const bool single = pc_x == pc_y;
  Biplot plot;
  plot.pc_x = pc_x;
  plot.pc_y = pc_y;

  std::map<std::string, std::size_t> group_index;
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < row_groups.size(); ++i) {
    auto [it, inserted] = group_index.emplace(row_groups[i], plot.scores.size());
    if (inserted) {
      plot.scores.push_back({row_groups[i], 0.0, 0.0});
      counts.push_back(0);
    }
    auto& point = plot.scores[it->second];
    point.x += view.scores_effect(static_cast<Eigen::Index>(i), pc_x);
    if (!single) point.y += view.scores_effect(static_cast<Eigen::Index>(i), pc_y);
    ++counts[it->second];
  }
  double max_score = 0.0;
  for (std::size_t g = 0; g < plot.scores.size(); ++g) {
    plot.scores[g].x /= static_cast<double>(counts[g]);
    plot.scores[g].y /= static_cast<double>(counts[g]);
    max_score = std::max({max_score, std::abs(plot.scores[g].x), std::abs(plot.scores[g].y)});
  }
  double max_loading = 0.0;
  for (Eigen::Index j = 0; j < view.loadings.rows(); ++j) {
    max_loading = std::max(max_loading, std::abs(view.loadings(j, pc_x)));
    if (!single) max_loading = std::max(max_loading, std::abs(view.loadings(j, pc_y)));
  }
  plot.scale = (max_loading > 0.0 && max_score > 0.0) ? max_score / max_loading : 1.0;
  for (Eigen::Index j = 0; j < view.loadings.rows(); ++j) {
    plot.loadings.push_back({col_labels[static_cast<std::size_t>(j)], plot.scale * view.loadings(j, pc_x),
                             single ? 0.0 : plot.scale * view.loadings(j, pc_y)});
  }
  return plot;
}

}  // namespace asca
