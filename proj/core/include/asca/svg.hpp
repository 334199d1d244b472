#pragma once

#include <string>
#include <vector>

#include "asca/diagnostics.hpp"
#include "asca/sca.hpp"

namespace asca::svg {

// Fixed canvas; the plot area spans [kLeft, kLeft + kPlotWidth] horizontally
// and [kTop, kTop + kPlotHeight] vertically (y grows downwards).
inline constexpr double kWidth = 640.0;
inline constexpr double kHeight = 480.0;
inline constexpr double kLeft = 70.0;
inline constexpr double kTop = 40.0;
inline constexpr double kPlotWidth = 540.0;
inline constexpr double kPlotHeight = 380.0;

struct Range {
  double min = -1.0;
  double max = 1.0;
};

// Data range padded by 5% on each side; [-1, 1] for empty input.
Range padded_range(const std::vector<double>& values);

struct Point {
  std::string label;
  double x = 0.0;
  double y = 0.0;
};

std::string scatter_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                         const std::vector<Point>& points);

// Score markers (class "score") and rescaled loading markers (class "loading");
// the scale factor is written to <metadata> and to the root group.
std::string biplot(const std::string& title, const Biplot& plot);

// Loadings of one component against variable index, as stems.
std::string loading_plot(const std::string& title, const std::vector<std::string>& labels,
                         const std::vector<double>& loadings);

// Q against D with dashed control limits.
std::string mspc_plot(const std::string& title, const MspcChart& chart, const std::vector<std::string>& labels);

// ACF stems with the +-1.96/sqrt(n) band.
std::string acf_plot(const std::string& title, const std::vector<double>& acf, std::size_t series_length);

std::string box_plot(const std::string& title, const std::vector<BoxSummary>& boxes);

}  // namespace asca::svg
