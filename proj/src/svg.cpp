#include "mtd/svg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mtd/io.hpp"

namespace mtd {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << v;
  return s.str();
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

struct View {
  double cos_a, sin_a, cos_e, sin_e;
  // Screen coordinates of a point already scaled to the unit cube [-0.5, 0.5]^3.
  std::array<double, 2> project(const std::array<double, 3>& p) const {
    const double x = cos_a * p[0] - sin_a * p[1];
    const double depth = sin_a * p[0] + cos_a * p[1];
    const double y = cos_e * p[2] - sin_e * depth;
    return {x, y};
  }
};

}  // namespace

std::string scatter_svg(const std::vector<ScatterPoint>& points, const std::array<std::string, 3>& axis_labels,
                        const std::string& title, std::array<double, 2> azimuths_deg, double elevation_deg) {
  std::array<double, 3> lo{0, 0, 0}, hi{1, 1, 1};
  if (!points.empty()) {
    lo = hi = points.front().position;
    for (const ScatterPoint& p : points) {
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], p.position[a]);
        hi[a] = std::max(hi[a], p.position[a]);
      }
    }
  }
  auto normalize = [&](const std::array<double, 3>& p) {
    std::array<double, 3> out{};
    for (int a = 0; a < 3; ++a) {
      const double span = hi[a] - lo[a];
      out[a] = span > 0 ? (p[a] - lo[a]) / span - 0.5 : 0.0;
    }
    return out;
  };

  const double panel = 360.0, margin = 40.0;
  const double width = 2 * panel + 3 * margin, height = panel + 2 * margin + 30.0;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"16\">" << escape(title) << "</text>\n";

  const double rad = std::numbers::pi / 180.0;
  for (int v = 0; v < 2; ++v) {
    const View view{std::cos(azimuths_deg[v] * rad), std::sin(azimuths_deg[v] * rad),
                    std::cos(elevation_deg * rad), std::sin(elevation_deg * rad)};
    const double cx = margin + v * (panel + margin) + panel / 2;
    const double cy = 30.0 + margin + panel / 2;
    const double s = panel * 0.55;
    auto screen = [&](const std::array<double, 3>& unit) {
      const auto q = view.project(unit);
      return std::array<double, 2>{cx + s * q[0], cy - s * q[1]};
    };
    svg << "<g>\n";
    // Box edges of the bounding cube.
    for (int e = 0; e < 12; ++e) {
      const int axis = e / 4;
      const int a = (axis + 1) % 3, b = (axis + 2) % 3;
      std::array<double, 3> p0{}, p1{};
      p0[a] = p1[a] = (e & 1) ? 0.5 : -0.5;
      p0[b] = p1[b] = (e & 2) ? 0.5 : -0.5;
      p0[axis] = -0.5;
      p1[axis] = 0.5;
      const auto s0 = screen(p0), s1 = screen(p1);
      svg << "<line x1=\"" << num(s0[0]) << "\" y1=\"" << num(s0[1]) << "\" x2=\"" << num(s1[0]) << "\" y2=\""
          << num(s1[1]) << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
    }
    for (int axis = 0; axis < 3; ++axis) {
      std::array<double, 3> end{-0.5, -0.5, -0.5};
      end[axis] = 0.62;
      const auto p = screen(end);
      svg << "<text x=\"" << num(p[0]) << "\" y=\"" << num(p[1]) << "\" font-family=\"sans-serif\" "
          << "font-size=\"11\" text-anchor=\"middle\">" << escape(axis_labels[axis]) << " [" << num(lo[axis])
          << ", " << num(hi[axis]) << "]</text>\n";
    }
    for (const ScatterPoint& p : points) {
      const auto q = screen(normalize(p.position));
      const char* color = p.highlight ? "#d62728" : "#1f77b4";
      svg << "<circle cx=\"" << num(q[0]) << "\" cy=\"" << num(q[1]) << "\" r=\"" << (p.highlight ? "5" : "4")
          << "\" stroke=\"" << color << "\" stroke-width=\"1.5\" fill=\"" << (p.filled ? color : "none")
          << "\"/>\n";
    }
    svg << "<text x=\"" << num(cx) << "\" y=\"" << num(height - 12) << "\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"11\">azimuth " << num(azimuths_deg[v]) << " deg</text>\n";
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string dvh_band_svg(const std::vector<DvhBand>& bands, const std::string& title) {
  const double width = 720, height = 480, left = 60, right = 160, top = 40, bottom = 50;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  double max_dose = 1.0;
  for (const DvhBand& b : bands) {
    if (!b.dose.empty()) max_dose = std::max(max_dose, b.dose.back());
  }
  auto sx = [&](double d) { return left + plot_w * d / max_dose; };
  auto sy = [&](double v) { return top + plot_h * (1.0 - v); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"16\">" << escape(title) << "</text>\n";
  svg << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(plot_w) << "\" height=\""
      << num(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double d = max_dose * t / 5.0, v = t / 5.0;
    svg << "<text x=\"" << num(sx(d)) << "\" y=\"" << num(top + plot_h + 16) << "\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"11\">" << num(d) << "</text>\n";
    svg << "<text x=\"" << num(left - 6) << "\" y=\"" << num(sy(v) + 4) << "\" text-anchor=\"end\" "
        << "font-family=\"sans-serif\" font-size=\"11\">" << num(100 * v) << "</text>\n";
  }
  svg << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(height - 12) << "\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"12\">dose [Gy]</text>\n";
  svg << "<text x=\"16\" y=\"" << num(top + plot_h / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"12\" transform=\"rotate(-90 16 " << num(top + plot_h / 2) << ")\">volume [%]</text>\n";

  for (std::size_t i = 0; i < bands.size(); ++i) {
    const DvhBand& b = bands[i];
    const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
    if (b.dose.empty()) continue;
    svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
    for (std::size_t k = 0; k < b.dose.size(); ++k) svg << num(sx(b.dose[k])) << ',' << num(sy(b.upper[k])) << ' ';
    for (std::size_t k = b.dose.size(); k-- > 0;) svg << num(sx(b.dose[k])) << ',' << num(sy(b.lower[k])) << ' ';
    svg << "\"/>\n";
    if (b.highlight.size() == b.dose.size()) {
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t k = 0; k < b.dose.size(); ++k) {
        svg << num(sx(b.dose[k])) << ',' << num(sy(b.highlight[k])) << ' ';
      }
      svg << "\"/>\n";
    }
    const double ly = top + 16 + 18.0 * static_cast<double>(i);
    svg << "<rect x=\"" << num(left + plot_w + 12) << "\" y=\"" << num(ly - 9) << "\" width=\"12\" height=\"10\" "
        << "fill=\"" << color << "\" fill-opacity=\"0.5\"/>\n";
    svg << "<text x=\"" << num(left + plot_w + 30) << "\" y=\"" << num(ly) << "\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << escape(b.roi) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace mtd
