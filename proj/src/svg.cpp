#include "strlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace strlab {

namespace {

std::string fmt(double v, const char* spec = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

/// Fixed 0..1 color scale: dark navy at 0 to warm yellow at 1.
std::string heat_color(double v) {
  v = std::clamp(v, 0.0, 1.0);
  int r = static_cast<int>(std::lround(16 + v * (245 - 16)));
  int g = static_cast<int>(std::lround(18 + v * (214 - 18)));
  int b = static_cast<int>(std::lround(48 + v * (66 - 48)));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

const char* kPalette[] = {"#3465a4", "#f57900", "#4e9a06", "#cc0000", "#75507b",
                          "#c17d11", "#555753", "#ce5c00"};

}  // namespace

std::string render_heatmap_svg(const std::string& title,
                               const std::vector<std::string>& row_labels,
                               const std::vector<std::string>& col_labels,
                               const std::vector<std::vector<HeatmapCell>>& cells) {
  const int cell_w = 64, cell_h = 36, left = 130, top = 70, bottom = 16, right = 16;
  int rows = static_cast<int>(row_labels.size());
  int cols = static_cast<int>(col_labels.size());
  int width = left + cols * cell_w + right;
  int height = top + rows * cell_h + bottom;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<defs><pattern id=\"hatch\" width=\"6\" height=\"6\" "
         "patternTransform=\"rotate(45)\" patternUnits=\"userSpaceOnUse\">"
         "<rect width=\"6\" height=\"6\" fill=\"#d3d7cf\"/>"
         "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#888a85\" stroke-width=\"2\"/>"
         "</pattern></defs>\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"20\" font-family=\"monospace\" font-size=\"14\">"
      << escape_xml(title) << "</text>\n";

  for (int c = 0; c < cols; ++c) {
    svg << "<text x=\"" << left + c * cell_w + cell_w / 2 << "\" y=\"" << top - 8
        << "\" font-family=\"monospace\" font-size=\"9\" text-anchor=\"middle\" "
           "transform=\"rotate(-25 "
        << left + c * cell_w + cell_w / 2 << " " << top - 8 << ")\">"
        << escape_xml(col_labels[static_cast<size_t>(c)]) << "</text>\n";
  }
  for (int r = 0; r < rows; ++r) {
    svg << "<text x=\"" << left - 6 << "\" y=\"" << top + r * cell_h + cell_h / 2 + 3
        << "\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">"
        << escape_xml(row_labels[static_cast<size_t>(r)]) << "</text>\n";
    for (int c = 0; c < cols; ++c) {
      const HeatmapCell& cell = cells[static_cast<size_t>(r)][static_cast<size_t>(c)];
      int x = left + c * cell_w, y = top + r * cell_h;
      if (cell.value) {
        double v = *cell.value;
        svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell_w << "\" height=\""
            << cell_h << "\" fill=\"" << heat_color(v) << "\" stroke=\"#ffffff\"/>\n";
        svg << "<text x=\"" << x + cell_w / 2 << "\" y=\"" << y + cell_h / 2 + 4
            << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\" fill=\""
            << (v > 0.55 ? "#1a1a1a" : "#f2f2f2") << "\">" << fmt(v) << "</text>\n";
      } else {
        svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell_w << "\" height=\""
            << cell_h << "\" fill=\"url(#hatch)\" stroke=\"#ffffff\"/>\n";
      }
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_curves_svg(const std::string& title, const std::string& x_label,
                              const std::vector<Curve>& curves) {
  const int width = 560, height = 360, left = 60, right = 160, top = 40, bottom = 50;
  const int plot_w = width - left - right, plot_h = height - top - bottom;

  double xmin = 0.0, xmax = 1.0;
  bool any = false;
  for (const auto& c : curves)
    for (const auto& p : c.points) {
      if (!any) {
        xmin = xmax = p.x;
        any = true;
      }
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
    }
  if (xmax == xmin) xmax = xmin + 1.0;

  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double y) { return top + (1.0 - std::clamp(y, 0.0, 1.0)) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"22\" font-family=\"monospace\" font-size=\"13\">"
      << escape_xml(title) << "</text>\n";

  // Axes with a 0..1 y scale.
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + plot_h << "\" stroke=\"#2e3436\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
      << "\" y2=\"" << top + plot_h << "\" stroke=\"#2e3436\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    double v = i / 5.0;
    svg << "<text x=\"" << left - 8 << "\" y=\"" << fmt(py(v) + 3, "%.0f")
        << "\" font-family=\"monospace\" font-size=\"9\" text-anchor=\"end\">" << fmt(v, "%.1f")
        << "</text>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << fmt(py(v), "%.1f") << "\" x2=\""
        << left + plot_w << "\" y2=\"" << fmt(py(v), "%.1f")
        << "\" stroke=\"#eeeeec\" stroke-width=\"1\"/>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
      << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">"
      << escape_xml(x_label) << "</text>\n";

  for (size_t ci = 0; ci < curves.size(); ++ci) {
    const auto& curve = curves[ci];
    const char* color = kPalette[ci % std::size(kPalette)];
    std::ostringstream pts;
    for (const auto& p : curve.points) pts << fmt(px(p.x), "%.1f") << "," << fmt(py(p.mean), "%.1f") << " ";
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\""
        << pts.str() << "\"/>\n";
    for (const auto& p : curve.points) {
      svg << "<line x1=\"" << fmt(px(p.x), "%.1f") << "\" y1=\"" << fmt(py(p.mean - p.std), "%.1f")
          << "\" x2=\"" << fmt(px(p.x), "%.1f") << "\" y2=\"" << fmt(py(p.mean + p.std), "%.1f")
          << "\" stroke=\"" << color << "\" stroke-width=\"1\"/>\n";
      svg << "<circle cx=\"" << fmt(px(p.x), "%.1f") << "\" cy=\"" << fmt(py(p.mean), "%.1f")
          << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
    svg << "<text x=\"" << left + plot_w + 10 << "\" y=\"" << top + 14 * (static_cast<int>(ci) + 1)
        << "\" font-family=\"monospace\" font-size=\"10\" fill=\"" << color << "\">"
        << escape_xml(curve.name) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace strlab
