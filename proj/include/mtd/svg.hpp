#pragma once

#include <array>
#include <string>
#include <vector>

namespace mtd {

struct ScatterPoint {
  std::array<double, 3> position{};
  bool filled = true;      // unfilled markers mark plans that violate a target bound by > 1 %
  bool highlight = false;  // e.g. the balanced-weight plan
};

// Two orthographic views of a 3-D point cloud side by side, at the given azimuths (degrees)
// and a shared elevation.
std::string scatter_svg(const std::vector<ScatterPoint>& points, const std::array<std::string, 3>& axis_labels,
                        const std::string& title, std::array<double, 2> azimuths_deg = {-60.0, 30.0},
                        double elevation_deg = 25.0);

struct DvhBand {
  std::string roi;
  std::vector<double> dose;       // Gy, shared by the curves
  std::vector<double> lower;      // pointwise minimum volume fraction across plans
  std::vector<double> upper;      // pointwise maximum
  std::vector<double> highlight;  // optional curve drawn on top; empty when absent
};

std::string dvh_band_svg(const std::vector<DvhBand>& bands, const std::string& title);

}  // namespace mtd
