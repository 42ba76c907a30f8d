#include "tonalexp/experiment/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tonalexp::experiment {

namespace {

constexpr int kWidth = 640, kHeight = 420;
constexpr int kMarginLeft = 70, kMarginRight = 20;
constexpr int kMarginTop = 40, kMarginBottom = 50;

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

void open_svg(std::ostringstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">"
      << escape(title) << "</text>\n";
}

} // namespace

std::string svg_scatter(const std::string& title, const std::string& x_label,
                        const std::string& y_label,
                        const std::vector<ScatterSeries>& series) {
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  bool first = true;
  for (const auto& s : series)
    for (const auto& p : s.points) {
      if (first) {
        x_lo = x_hi = p.x;
        y_lo = y_hi = p.y;
        first = false;
      }
      x_lo = std::min(x_lo, p.x);
      x_hi = std::max(x_hi, p.x);
      y_lo = std::min(y_lo, p.y);
      y_hi = std::max(y_hi, p.y);
    }
  if (x_hi - x_lo < 1e-12) x_hi = x_lo + 1.0;
  if (y_hi - y_lo < 1e-12) y_hi = y_lo + 1.0;
  const double x_pad = 0.06 * (x_hi - x_lo), y_pad = 0.06 * (y_hi - y_lo);
  x_lo -= x_pad; x_hi += x_pad;
  y_lo -= y_pad; y_hi += y_pad;

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto sx = [&](double x) {
    return kMarginLeft + (x - x_lo) / (x_hi - x_lo) * plot_w;
  };
  auto sy = [&](double y) {
    return kMarginTop + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h;
  };

  std::ostringstream out;
  out.precision(6);
  open_svg(out, title);
  out << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\""
      << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#444\"/>\n";

  for (int tick = 0; tick <= 4; ++tick) {
    const double fx = x_lo + (x_hi - x_lo) * tick / 4.0;
    const double fy = y_lo + (y_hi - y_lo) * tick / 4.0;
    out << "<text x=\"" << sx(fx) << "\" y=\"" << kHeight - kMarginBottom + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << fx << "</text>\n";
    out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << sy(fy) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << fy << "</text>\n";
  }
  out << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << escape(x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << kMarginTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 16 "
      << kMarginTop + plot_h / 2 << ")\">" << escape(y_label) << "</text>\n";

  double legend_y = kMarginTop + 10;
  for (const auto& s : series) {
    for (const auto& p : s.points)
      out << "<circle cx=\"" << sx(p.x) << "\" cy=\"" << sy(p.y)
          << "\" r=\"4\" fill=\"" << s.color << "\" fill-opacity=\"0.8\"/>\n";
    out << "<circle cx=\"" << kWidth - kMarginRight - 120 << "\" cy=\""
        << legend_y - 4 << "\" r=\"4\" fill=\"" << s.color << "\"/>\n";
    out << "<text x=\"" << kWidth - kMarginRight - 110 << "\" y=\"" << legend_y
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(s.name)
        << "</text>\n";
    legend_y += 16;
  }
  out << "</svg>\n";
  return out.str();
}

std::string svg_grouped_bars(const std::string& title,
                             const std::vector<std::string>& categories,
                             const std::vector<BarSeries>& series) {
  double hi = 0.0;
  for (const auto& s : series)
    if (s.values.size() > 0) hi = std::max(hi, s.values.maxCoeff());
  if (hi <= 0.0) hi = 1.0;

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const size_t n_cat = categories.size();
  const size_t n_series = series.size();
  const double group_w = plot_w / static_cast<double>(n_cat);
  const double bar_w = group_w * 0.8 / static_cast<double>(std::max<size_t>(1, n_series));

  std::ostringstream out;
  out.precision(6);
  open_svg(out, title);
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + plot_h
      << "\" x2=\"" << kMarginLeft + plot_w << "\" y2=\"" << kMarginTop + plot_h
      << "\" stroke=\"#444\"/>\n";

  for (size_t c = 0; c < n_cat; ++c) {
    const double gx = kMarginLeft + group_w * static_cast<double>(c);
    for (size_t s = 0; s < n_series; ++s) {
      if (static_cast<size_t>(series[s].values.size()) <= c) continue;
      const double v = series[s].values[static_cast<Index>(c)];
      const double h = std::max(0.0, v / hi) * plot_h;
      out << "<rect x=\"" << gx + group_w * 0.1 + bar_w * static_cast<double>(s)
          << "\" y=\"" << kMarginTop + plot_h - h << "\" width=\"" << bar_w
          << "\" height=\"" << h << "\" fill=\"" << series[s].color
          << "\" fill-opacity=\"0.85\"/>\n";
    }
    out << "<text x=\"" << gx + group_w / 2 << "\" y=\""
        << kMarginTop + plot_h + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << escape(categories[c]) << "</text>\n";
  }

  double legend_y = kMarginTop + 10;
  for (const auto& s : series) {
    out << "<rect x=\"" << kWidth - kMarginRight - 125 << "\" y=\""
        << legend_y - 10 << "\" width=\"10\" height=\"10\" fill=\"" << s.color
        << "\"/>\n";
    out << "<text x=\"" << kWidth - kMarginRight - 110 << "\" y=\"" << legend_y
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(s.name)
        << "</text>\n";
    legend_y += 16;
  }
  out << "</svg>\n";
  return out.str();
}

} // namespace tonalexp::experiment
