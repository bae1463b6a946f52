#pragma once

#include <optional>
#include <string>
#include <vector>

namespace strlab {

/// One heatmap cell; empty value means the cell failed and gets hatched.
struct HeatmapCell {
  std::optional<double> value;  // on the fixed 0..1 scale
};

/// Deterministic SVG heatmap: grid colored on a fixed 0-1 scale, mean value
/// printed in each cell, failed cells hatched. Byte-identical output for
/// identical input.
std::string render_heatmap_svg(const std::string& title,
                               const std::vector<std::string>& row_labels,
                               const std::vector<std::string>& col_labels,
                               const std::vector<std::vector<HeatmapCell>>& cells);

/// Deterministic SVG line chart with error bars (mean +/- std per point).
struct CurvePoint {
  double x = 0.0;
  double mean = 0.0;
  double std = 0.0;
};
struct Curve {
  std::string name;
  std::vector<CurvePoint> points;
};
std::string render_curves_svg(const std::string& title, const std::string& x_label,
                              const std::vector<Curve>& curves);

}  // namespace strlab
