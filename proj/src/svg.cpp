#include "dyadsync/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace dyadsync::svg {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(double w, double h) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
      w, h);
}

}  // namespace

std::string render(const LinePlot& plot) {
  const double left = 60, right = 20, top = 36, bottom = 48;
  const double pw = plot.width - left - right, ph = plot.height - top - bottom;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::string out = header(plot.width, plot.height);
  out += fmt::format("<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", plot.width / 2,
                     escape(plot.title));
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>\n", left, top,
                     pw, ph);
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.3g}</text>\n", sx(xv),
                       top + ph + 16, xv);
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", left - 6, sy(yv) + 4, yv);
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", left + pw / 2, plot.height - 8,
                     escape(plot.x_label));
  out += fmt::format("<text x=\"14\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {0})\">{1}</text>\n",
                     top + ph / 2, escape(plot.y_label));

  for (std::size_t s = 0; s < plot.series.size(); ++s) {
    const auto& ser = plot.series[s];
    const char* color = kPalette[s % std::size(kPalette)];
    std::string path;
    bool pen_down = false;
    for (std::size_t i = 0; i < std::min(ser.x.size(), ser.y.size()); ++i) {
      if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) {
        pen_down = false;
        continue;
      }
      path += fmt::format("{}{:.2f},{:.2f} ", pen_down ? "L" : "M", sx(ser.x[i]), sy(ser.y[i]));
      pen_down = true;
    }
    out += fmt::format("<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", path, color);
    out += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", left + 8, top + 16 + 14 * s, color,
                       escape(ser.name));
  }
  out += "</svg>\n";
  return out;
}

std::string render(const CircularGraph& graph) {
  const double c = graph.size / 2, r = graph.size / 2 - 50;
  const std::size_t n = graph.nodes.size();
  auto pos = [&](std::size_t i) {
    const double a = -std::numbers::pi / 2 + 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(n, 1));
    return std::pair{c + r * std::cos(a), c + 14 + r * std::sin(a)};
  };
  double wmax = 0;
  for (const auto& e : graph.edges) wmax = std::max(wmax, e.weight);
  if (wmax <= 0) wmax = 1;

  std::string out = header(graph.size, graph.size + 14);
  out += fmt::format("<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", c,
                     escape(graph.title));
  for (const auto& e : graph.edges) {
    if (e.i >= n || e.j >= n) continue;
    const auto [xa, ya] = pos(e.i);
    const auto [xb, yb] = pos(e.j);
    out += fmt::format(
        "<path d=\"M{:.2f},{:.2f} Q{:.2f},{:.2f} {:.2f},{:.2f}\" fill=\"none\" stroke=\"#1f77b4\" "
        "stroke-opacity=\"0.7\" stroke-width=\"{:.2f}\"/>\n",
        xa, ya, c, c + 14, xb, yb, 0.5 + 3.5 * e.weight / wmax);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto [x, y] = pos(i);
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"14\" fill=\"#f5f5f5\" stroke=\"#333\"/>\n", x, y);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", x, y + 4,
                       escape(graph.nodes[i]));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace dyadsync::svg
