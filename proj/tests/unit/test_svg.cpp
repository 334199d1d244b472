#include <algorithm>
#include <regex>

#include "asca/svg.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace asca;

namespace {

struct Marker {
  std::string cls;
  std::string label;
  double x = 0.0;  // data coordinates recovered from pixels
  double y = 0.0;
};

double attr(const std::string& text, const std::string& name) {
  const std::regex re(name + "=\"([^\"]+)\"");
  std::smatch m;
  REQUIRE(std::regex_search(text, m, re));
  return std::stod(m[1]);
}

std::vector<Marker> markers(const std::string& svg) {
  const double xmin = attr(svg, "data-xmin"), xmax = attr(svg, "data-xmax");
  const double ymin = attr(svg, "data-ymin"), ymax = attr(svg, "data-ymax");
  const std::regex re(R"re(<circle class="(\w+)" data-label="([^"]*)" cx="([-\d.]+)" cy="([-\d.]+)")re");
  std::vector<Marker> out;
  for (std::sregex_iterator it(svg.begin(), svg.end(), re), end; it != end; ++it) {
    const double px = std::stod((*it)[3]), py = std::stod((*it)[4]);
    out.push_back({(*it)[1], (*it)[2], xmin + (px - svg::kLeft) / svg::kPlotWidth * (xmax - xmin),
                   ymin + (svg::kTop + svg::kPlotHeight - py) / svg::kPlotHeight * (ymax - ymin)});
  }
  return out;
}

}  // namespace

TEST_CASE("empty score set draws axes only") {
  const auto s = svg::scatter_plot("empty", "PC1", "PC2", {});
  CHECK(s.rfind("<svg", 0) == 0);
  CHECK(s.find("<circle") == std::string::npos);
  CHECK(s.find("PC1") != std::string::npos);
  CHECK(markers(s).empty());
}

TEST_CASE("two-point score plot puts markers at their coordinates") {
  const auto s = svg::scatter_plot("two", "PC1", "PC2", {{"a", -2.0, 1.0}, {"b", 3.0, -4.0}});
  const auto m = markers(s);
  REQUIRE(m.size() == 2);
  CHECK(m[0].label == "a");
  CHECK(m[0].x == doctest::Approx(-2.0).epsilon(1e-3));
  CHECK(m[0].y == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(m[1].x == doctest::Approx(3.0).epsilon(1e-3));
  CHECK(m[1].y == doctest::Approx(-4.0).epsilon(1e-3));
}

TEST_CASE("biplot SVG carries both marker kinds and the scale") {
  ScaView v;
  v.loadings = support::random_matrix(5, 2, 1).householderQr().householderQ() * Eigen::MatrixXd::Identity(5, 2);
  v.scores_effect = support::random_matrix(6, 2, 2) * 8.0;
  const auto plot = biplot_coords(v, 0, 1, {"g1", "g1", "g2", "g2", "g3", "g3"}, {"v1", "v2", "v3", "v4", "v5"});
  const auto s = svg::biplot("bp", plot);
  CHECK(attr(s, "data-scale") == doctest::Approx(plot.scale).epsilon(1e-5));
  CHECK(s.find("<metadata>scale=") != std::string::npos);
  const auto m = markers(s);
  std::size_t scores = 0, loadings = 0;
  const double span = 2.0 * plot.scale;
  for (const auto& mk : m) {
    const auto& ref = mk.cls == "score" ? plot.scores : plot.loadings;
    (mk.cls == "score" ? scores : loadings)++;
    const auto it = std::find_if(ref.begin(), ref.end(), [&](const BiplotPoint& p) { return p.label == mk.label; });
    REQUIRE(it != ref.end());
    CHECK(std::abs(mk.x - it->x) < 1e-4 * span);
    CHECK(std::abs(mk.y - it->y) < 1e-4 * span);
  }
  CHECK(scores == 3);
  CHECK(loadings == 5);
}

TEST_CASE("plots are deterministic text with escaped labels") {
  const std::vector<svg::Point> pts = {{"a<b & \"c\"", 1.0, 2.0}};
  const auto s1 = svg::scatter_plot("t", "x", "y", pts);
  CHECK(s1 == svg::scatter_plot("t", "x", "y", pts));
  CHECK(s1.find("a&lt;b &amp; &quot;c&quot;") != std::string::npos);

  MspcChart chart;
  chart.q = Eigen::Vector3d(1, 2, 3);
  chart.d = Eigen::Vector3d(3, 1, 2);
  chart.q_limit = 2.5;
  chart.d_limit = 2.9;
  const auto m = svg::mspc_plot("mspc", chart, {"r1", "r2", "r3"});
  CHECK(markers(m).size() == 3);
  CHECK(m.find("stroke-dasharray") != std::string::npos);

  const auto acf = svg::acf_plot("acf", {1.0, 0.5, -0.2}, 100);
  CHECK(acf.find("<line") != std::string::npos);
  BoxSummary b;
  b.level = "L";
  b.count = 5;
  b.q1 = 1;
  b.median = 2;
  b.q3 = 3;
  b.whisker_low = 0;
  b.whisker_high = 4;
  b.outliers = {9.0};
  CHECK(svg::box_plot("box", {b}).find("class=\"box\"") != std::string::npos);
  CHECK(svg::loading_plot("l", {"a", "b"}, {0.6, -0.8}).find("</svg>") != std::string::npos);
}

TEST_CASE("padded ranges") {
  const auto r = svg::padded_range({0.0, 10.0});
  CHECK(r.min == doctest::Approx(-0.5));
  CHECK(r.max == doctest::Approx(10.5));
  const auto e = svg::padded_range({});
  CHECK(e.min == -1.0);
  CHECK(e.max == 1.0);
  const auto flat = svg::padded_range({3.0, 3.0});
  CHECK(flat.max > flat.min);
}
