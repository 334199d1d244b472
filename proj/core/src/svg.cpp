#include "asca/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace asca::svg {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string sig(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

class Canvas {
 public:
  Canvas(const std::string& title, Range x, Range y, const std::string& x_label, const std::string& y_label)
      : x_(x), y_(y) {
    out_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
            "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\" font-family=\"sans-serif\">\n";
    metadata_pos_ = out_.size();
    out_ += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) + "\" fill=\"white\"/>\n";
    out_ += "<g id=\"plot\" data-xmin=\"" + sig(x.min) + "\" data-xmax=\"" + sig(x.max) + "\" data-ymin=\"" +
            sig(y.min) + "\" data-ymax=\"" + sig(y.max) + "\">\n";
    text(kWidth / 2, 24, title, "middle", 16);
    out_ += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(kPlotWidth) + "\" height=\"" +
            num(kPlotHeight) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double fx = x.min + (x.max - x.min) * i / 4.0;
      const double fy = y.min + (y.max - y.min) * i / 4.0;
      line(px(fx), kTop + kPlotHeight, px(fx), kTop + kPlotHeight + 5, "black");
      text(px(fx), kTop + kPlotHeight + 18, sig(fx), "middle", 10);
      line(kLeft - 5, py(fy), kLeft, py(fy), "black");
      text(kLeft - 8, py(fy) + 3, sig(fy), "end", 10);
    }
    if (x.min < 0 && x.max > 0) line(px(0), kTop, px(0), kTop + kPlotHeight, "#bbbbbb");
    if (y.min < 0 && y.max > 0) line(kLeft, py(0), kLeft + kPlotWidth, py(0), "#bbbbbb");
    text(kLeft + kPlotWidth / 2, kHeight - 12, x_label, "middle", 12);
    out_ += "<text x=\"16\" y=\"" + num(kTop + kPlotHeight / 2) + "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
            num(kTop + kPlotHeight / 2) + ")\">" + escape(y_label) + "</text>\n";
  }

  double px(double v) const { return kLeft + (v - x_.min) / (x_.max - x_.min) * kPlotWidth; }
  double py(double v) const { return kTop + kPlotHeight - (v - y_.min) / (y_.max - y_.min) * kPlotHeight; }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke, const std::string& extra = {}) {
    out_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
            "\" stroke=\"" + stroke + "\"" + extra + "/>\n";
  }

  void text(double x, double y, const std::string& s, const std::string& anchor, int size) {
    out_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + std::to_string(size) +
            "\" text-anchor=\"" + anchor + "\">" + escape(s) + "</text>\n";
  }

  void marker(const std::string& cls, const Point& p, const std::string& fill, double radius = 3.5) {
    out_ += "<circle class=\"" + cls + "\" data-label=\"" + escape(p.label) + "\" cx=\"" + num(px(p.x)) +
            "\" cy=\"" + num(py(p.y)) + "\" r=\"" + num(radius) + "\" fill=\"" + fill + "\"/>\n";
  }

  void raw(const std::string& s) { out_ += s; }

  void metadata(const std::string& content) {
    out_.insert(metadata_pos_, "<metadata>" + escape(content) + "</metadata>\n");
  }

  std::string finish() {
    out_ += "</g>\n</svg>\n";
    return out_;
  }

 private:
  Range x_;
  Range y_;
  std::string out_;
  std::size_t metadata_pos_ = 0;
};

}  // namespace

Range padded_range(const std::vector<double>& values) {
  if (values.empty()) return {};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  double min = *lo;
  double max = *hi;
  if (max - min <= 1e-300) {
    const double pad = std::max(1.0, std::abs(min)) * 0.5;
    return {min - pad, max + pad};
  }
  const double pad = 0.05 * (max - min);
  return {min - pad, max + pad};
}

std::string scatter_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                         const std::vector<Point>& points) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  Canvas canvas(title, padded_range(xs), padded_range(ys), x_label, y_label);
  for (const auto& p : points) canvas.marker("score", p, "#1f77b4");
  return canvas.finish();
}

std::string biplot(const std::string& title, const Biplot& plot) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto* set : {&plot.scores, &plot.loadings}) {
    for (const auto& p : *set) {
      xs.push_back(p.x);
      ys.push_back(p.y);
    }
  }
  const bool single = plot.pc_x == plot.pc_y;
  Canvas canvas(title, padded_range(xs), padded_range(ys), "PC" + std::to_string(plot.pc_x + 1),
                single ? "" : "PC" + std::to_string(plot.pc_y + 1));
  canvas.metadata("scale=" + sig(plot.scale));
  canvas.raw("<g id=\"biplot\" data-scale=\"" + sig(plot.scale) + "\">\n");
  for (const auto& p : plot.loadings) {
    canvas.line(canvas.px(0), canvas.py(0), canvas.px(p.x), canvas.py(p.y), "#d62728", " stroke-opacity=\"0.4\"");
    canvas.marker("loading", {p.label, p.x, p.y}, "#d62728", 2.5);
  }
  for (const auto& p : plot.scores) {
    canvas.marker("score", {p.label, p.x, p.y}, "#1f77b4");
    canvas.text(canvas.px(p.x) + 5, canvas.py(p.y) - 5, p.label, "start", 9);
  }
  canvas.raw("</g>\n");
  return canvas.finish();
}

std::string loading_plot(const std::string& title, const std::vector<std::string>& labels,
                         const std::vector<double>& loadings) {
  std::vector<double> ys(loadings);
  ys.push_back(0.0);
  const double n = static_cast<double>(std::max<std::size_t>(loadings.size(), 1));
  Canvas canvas(title, {-0.5, n - 0.5}, padded_range(ys), "variable", "loading");
  for (std::size_t j = 0; j < loadings.size(); ++j) {
    const double x = static_cast<double>(j);
    canvas.line(canvas.px(x), canvas.py(0), canvas.px(x), canvas.py(loadings[j]), "#1f77b4");
    canvas.marker("loading", {labels[j], x, loadings[j]}, "#1f77b4", 1.5);
  }
  return canvas.finish();
}

std::string mspc_plot(const std::string& title, const MspcChart& chart, const std::vector<std::string>& labels) {
  std::vector<double> xs(chart.d.data(), chart.d.data() + chart.d.size());
  std::vector<double> ys(chart.q.data(), chart.q.data() + chart.q.size());
  xs.push_back(chart.d_limit);
  ys.push_back(chart.q_limit);
  xs.push_back(0.0);
  ys.push_back(0.0);
  Canvas canvas(title, padded_range(xs), padded_range(ys), "D-statistic", "Q-statistic");
  const std::string dashed = " stroke-dasharray=\"4 3\"";
  canvas.line(canvas.px(chart.d_limit), kTop, canvas.px(chart.d_limit), kTop + kPlotHeight, "#d62728", dashed);
  canvas.line(kLeft, canvas.py(chart.q_limit), kLeft + kPlotWidth, canvas.py(chart.q_limit), "#d62728", dashed);
  for (Eigen::Index i = 0; i < chart.q.size(); ++i) {
    canvas.marker("observation", {labels[static_cast<std::size_t>(i)], chart.d(i), chart.q(i)}, "#1f77b4");
  }
  return canvas.finish();
}

std::string acf_plot(const std::string& title, const std::vector<double>& acf, std::size_t series_length) {
  const double band = series_length > 0 ? 1.96 / std::sqrt(static_cast<double>(series_length)) : 0.0;
  const double lags = static_cast<double>(std::max<std::size_t>(acf.size(), 1));
  Canvas canvas(title, {-0.5, lags - 0.5}, {-1.05, 1.05}, "lag", "ACF");
  const std::string dashed = " stroke-dasharray=\"4 3\"";
  canvas.line(kLeft, canvas.py(band), kLeft + kPlotWidth, canvas.py(band), "#1f77b4", dashed);
  canvas.line(kLeft, canvas.py(-band), kLeft + kPlotWidth, canvas.py(-band), "#1f77b4", dashed);
  for (std::size_t k = 0; k < acf.size(); ++k) {
    const double x = static_cast<double>(k);
    canvas.line(canvas.px(x), canvas.py(0), canvas.px(x), canvas.py(acf[k]), "black");
    canvas.marker("lag", {std::to_string(k), x, acf[k]}, "black", 2.5);
  }
  return canvas.finish();
}

std::string box_plot(const std::string& title, const std::vector<BoxSummary>& boxes) {
  std::vector<double> ys;
  for (const auto& b : boxes) {
    ys.push_back(b.whisker_low);
    ys.push_back(b.whisker_high);
    ys.insert(ys.end(), b.outliers.begin(), b.outliers.end());
  }
  const double n = static_cast<double>(std::max<std::size_t>(boxes.size(), 1));
  Canvas canvas(title, {-0.5, n - 0.5}, padded_range(ys), "level", "residual");
  const double half = 0.35 * kPlotWidth / n;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    const double cx = canvas.px(static_cast<double>(i));
    canvas.line(cx, canvas.py(b.whisker_low), cx, canvas.py(b.q1), "black");
    canvas.line(cx, canvas.py(b.q3), cx, canvas.py(b.whisker_high), "black");
    canvas.raw("<rect class=\"box\" data-label=\"" + escape(b.level) + "\" x=\"" + num(cx - half) + "\" y=\"" +
               num(canvas.py(b.q3)) + "\" width=\"" + num(2 * half) + "\" height=\"" +
               num(canvas.py(b.q1) - canvas.py(b.q3)) + "\" fill=\"#aec7e8\" stroke=\"black\"/>\n");
    canvas.line(cx - half, canvas.py(b.median), cx + half, canvas.py(b.median), "black", " stroke-width=\"2\"");
    for (double o : b.outliers) canvas.marker("outlier", {b.level, static_cast<double>(i), o}, "black", 1.5);
    canvas.text(cx, kTop + kPlotHeight + 30, b.level, "middle", 8);
  }
  return canvas.finish();
}

}  // namespace asca::svg
