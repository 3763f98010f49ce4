#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "misme/error.hpp"
#include "misme/util.hpp"

namespace misme::svg {

// Static SVG charts for the experiment reports. All coordinates are written
// at fixed precision so identical inputs produce byte-identical files.

inline const std::vector<std::string>& palette() {
  static const std::vector<std::string> colors = {"#1f77b4", "#d62728", "#2ca02c",
                                                  "#9467bd", "#ff7f0e", "#8c564b"};
  return colors;
}

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

namespace detail {

inline std::string num(double v) { return format_double_fixed(v, 2); }

struct Frame {
  double width = 640, height = 400;
  double left = 64, right = 24, top = 40, bottom = 48;
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;

  double px(double x) const {
    const double span = x_max - x_min;
    return left + (x - x_min) / (span == 0.0 ? 1.0 : span) * (width - left - right);
  }
  double py(double y) const {
    const double span = y_max - y_min;
    return height - bottom - (y - y_min) / (span == 0.0 ? 1.0 : span) * (height - top - bottom);
  }
};

inline void open_svg(std::ostringstream& out, const Frame& f, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\""
      << f.height << "\" viewBox=\"0 0 " << f.width << " " << f.height << "\">\n";
  out << "<rect width=\"" << f.width << "\" height=\"" << f.height << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(f.width / 2) << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\" font-weight=\"bold\">" << title
      << "</text>\n";
}

inline void axes(std::ostringstream& out, const Frame& f, const std::string& x_label,
                 const std::string& y_label) {
  out << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.height - f.bottom) << "\" x2=\""
      << num(f.width - f.right) << "\" y2=\"" << num(f.height - f.bottom)
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.top) << "\" x2=\"" << num(f.left)
      << "\" y2=\"" << num(f.height - f.bottom) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double tx = f.x_min + (f.x_max - f.x_min) * i / 4.0;
    const double ty = f.y_min + (f.y_max - f.y_min) * i / 4.0;
    out << "<text x=\"" << num(f.px(tx)) << "\" y=\"" << num(f.height - f.bottom + 16)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(tx)
        << "</text>\n";
    out << "<text x=\"" << num(f.left - 6) << "\" y=\"" << num(f.py(ty) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(ty)
        << "</text>\n";
    out << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.py(ty)) << "\" x2=\""
        << num(f.width - f.right) << "\" y2=\"" << num(f.py(ty))
        << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
  }
  out << "<text x=\"" << num((f.left + f.width - f.right) / 2) << "\" y=\""
      << num(f.height - 10) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"12\">" << x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << num((f.top + f.height - f.bottom) / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 16 " << num((f.top + f.height - f.bottom) / 2) << ")\">"
      << y_label << "</text>\n";
}

}  // namespace detail

inline std::string line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, std::span<const Series> series) {
  if (series.empty()) throw ContractError("line_chart: no series");
  detail::Frame f;
  f.x_min = f.y_min = std::numeric_limits<double>::infinity();
  f.x_max = f.y_max = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw DimensionError("line_chart: x/y length mismatch");
    for (double v : s.x) {
      f.x_min = std::min(f.x_min, v);
      f.x_max = std::max(f.x_max, v);
    }
    for (double v : s.y) {
      f.y_min = std::min(f.y_min, v);
      f.y_max = std::max(f.y_max, v);
    }
  }
  if (!std::isfinite(f.x_min)) throw ContractError("line_chart: empty series");
  if (f.y_min == f.y_max) {
    f.y_min -= 1.0;
    f.y_max += 1.0;
  }
  if (f.x_min == f.x_max) {
    f.x_min -= 1.0;
    f.x_max += 1.0;
  }

  std::ostringstream out;
  detail::open_svg(out, f, title);
  detail::axes(out, f, x_label, y_label);
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const std::string& color = palette()[si % palette().size()];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) out << ' ';
      out << detail::num(f.px(s.x[i])) << ',' << detail::num(f.py(s.y[i]));
    }
    out << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << "<circle cx=\"" << detail::num(f.px(s.x[i])) << "\" cy=\""
          << detail::num(f.py(s.y[i])) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
    out << "<text x=\"" << detail::num(f.width - f.right - 4) << "\" y=\""
        << detail::num(f.top + 14 * static_cast<double>(si) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color
        << "\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

inline std::string bar_chart(const std::string& title, std::span<const std::string> labels,
                             std::span<const double> values, const std::string& y_label) {
  if (labels.size() != values.size() || labels.empty()) {
    throw ContractError("bar_chart: needs matching, non-empty labels and values");
  }
  detail::Frame f;
  f.x_min = 0;
  f.x_max = static_cast<double>(labels.size());
  f.y_min = 0;
  f.y_max = *std::max_element(values.begin(), values.end());
  if (f.y_max <= 0) f.y_max = 1;

  std::ostringstream out;
  detail::open_svg(out, f, title);
  detail::axes(out, f, "", y_label);
  const double slot = (f.width - f.left - f.right) / static_cast<double>(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double x = f.left + slot * (static_cast<double>(i) + 0.2);
    const double y = f.py(values[i]);
    const double h = f.height - f.bottom - y;
    out << "<rect x=\"" << detail::num(x) << "\" y=\"" << detail::num(y) << "\" width=\""
        << detail::num(slot * 0.6) << "\" height=\"" << detail::num(h) << "\" fill=\""
        << palette()[i % palette().size()] << "\"/>\n";
    out << "<text x=\"" << detail::num(x + slot * 0.3) << "\" y=\""
        << detail::num(f.height - f.bottom + 16)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << labels[i]
        << "</text>\n";
    out << "<text x=\"" << detail::num(x + slot * 0.3) << "\" y=\"" << detail::num(y - 4)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
        << detail::num(values[i]) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

inline std::string histogram(const std::string& title, std::span<const double> edges,
                             std::span<const std::size_t> counts, const std::string& x_label) {
  if (edges.size() != counts.size() + 1 || counts.empty()) {
    throw ContractError("histogram: needs bins+1 edges");
  }
  detail::Frame f;
  f.x_min = edges.front();
  f.x_max = edges.back();
  f.y_min = 0;
  f.y_max = static_cast<double>(*std::max_element(counts.begin(), counts.end()));
  if (f.y_max <= 0) f.y_max = 1;

  std::ostringstream out;
  detail::open_svg(out, f, title);
  detail::axes(out, f, x_label, "count");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double x0 = f.px(edges[i]);
    const double x1 = f.px(edges[i + 1]);
    const double y = f.py(static_cast<double>(counts[i]));
    out << "<rect x=\"" << detail::num(x0) << "\" y=\"" << detail::num(y) << "\" width=\""
        << detail::num(std::max(0.5, x1 - x0 - 0.5)) << "\" height=\""
        << detail::num(f.height - f.bottom - y) << "\" fill=\"#1f77b4\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace misme::svg
