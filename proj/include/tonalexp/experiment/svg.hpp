#ifndef TONALEXP_EXPERIMENT_SVG_HPP
#define TONALEXP_EXPERIMENT_SVG_HPP

#include <string>
#include <vector>

#include "tonalexp/types.hpp"

namespace tonalexp::experiment {

struct ScatterPoint {
  double x = 0.0;
  double y = 0.0;
};

struct ScatterSeries {
  std::string name;
  std::string color;
  std::vector<ScatterPoint> points;
};

struct BarSeries {
  std::string name;
  std::string color;
  Vector values;  // one bar per category
};

/// Minimal standalone SVG plots; CSV remains the canonical output.
std::string svg_scatter(const std::string& title, const std::string& x_label,
                        const std::string& y_label,
                        const std::vector<ScatterSeries>& series);

std::string svg_grouped_bars(const std::string& title,
                             const std::vector<std::string>& categories,
                             const std::vector<BarSeries>& series);

} // namespace tonalexp::experiment

#endif
