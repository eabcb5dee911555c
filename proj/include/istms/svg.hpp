#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace istms {

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

namespace detail {

inline const char* svg_palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  return colors[i % 8];
}

}  // namespace detail

// static polyline chart; skips non-finite points so error rows leave gaps
inline void write_svg_chart(std::ostream& out, const std::vector<SvgSeries>& series,
                            const std::string& title = "", const std::string& x_label = "",
                            const std::string& y_label = "") {
  const int w = 840, h = 520, ml = 70, mr = 160, mt = 40, mb = 50;
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
  bool seen = false;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (!seen) {
        x_min = x_max = x;
        y_min = y_max = y;
        seen = true;
      } else {
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
      }
    }
  if (!seen) throw domain_error("write_svg_chart: no finite points");
  if (x_max == x_min) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  if (y_max == y_min) {
    y_min -= 0.5;
    y_max += 0.5;
  }
  const auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (w - ml - mr); };
  const auto py = [&](double y) { return h - mb - (y - y_min) / (y_max - y_min) * (h - mt - mb); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr << "\" height=\""
      << h - mt - mb << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x_min + (x_max - x_min) * k / 4.0;
    const double yv = y_min + (y_max - y_min) * k / 4.0;
    out << "<line x1=\"" << px(xv) << "\" y1=\"" << h - mb << "\" x2=\"" << px(xv) << "\" y2=\""
        << h - mb + 5 << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << px(xv) << "\" y=\"" << h - mb + 18
        << "\" font-size=\"11\" text-anchor=\"middle\">" << std::to_string(xv).substr(0, 8)
        << "</text>\n";
    out << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << ml << "\" y2=\""
        << py(yv) << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << std::to_string(yv).substr(0, 8)
        << "</text>\n";
  }
  if (!title.empty())
    out << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << mt - 14
        << "\" font-size=\"15\" text-anchor=\"middle\">" << title << "</text>\n";
  if (!x_label.empty())
    out << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 10
        << "\" font-size=\"13\" text-anchor=\"middle\">" << x_label << "</text>\n";
  if (!y_label.empty())
    out << "<text x=\"16\" y=\"" << (mt + h - mb) / 2
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << (mt + h - mb) / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = detail::svg_palette(si);
    std::string path;
    bool pen_down = false;
    for (const auto& [x, y] : series[si].points) {
      if (!std::isfinite(x) || !std::isfinite(y)) {
        pen_down = false;
        continue;
      }
      path += pen_down ? " L" : " M";
      path += std::to_string(px(x)) + " " + std::to_string(py(y));
      pen_down = true;
    }
    if (!path.empty())
      out << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\"/>\n";
    const double ly = mt + 16.0 + 18.0 * si;
    out << "<line x1=\"" << w - mr + 12 << "\" y1=\"" << ly << "\" x2=\"" << w - mr + 36
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << w - mr + 42 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">"
        << series[si].label << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace istms
