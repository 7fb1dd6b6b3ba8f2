#pragma once

#include <array>
#include <vector>

namespace mtd {

using Point3 = std::array<double, 3>;

struct HullFacet {
  // Indices into the input points, counter-clockwise seen from outside.
  std::vector<int> polygon;
  Point3 normal{};  // outward, unit length
};

struct Hull3 {
  std::vector<HullFacet> facets;
  std::vector<int> vertices;  // sorted
  double volume = 0.0;
  double area = 0.0;  // surface area; polygon area for planar input
  bool planar = false;
  bool degenerate = false;  // fewer than three affinely independent points
};

// Convex hull by supporting-plane enumeration. Coplanar points on a face are merged into one
// polygon facet. Input whose points span only a plane yields a single planar polygon.
Hull3 convex_hull_3d(const std::vector<Point3>& points, double relative_tol = 1e-9);

// 2-D convex hull (Andrew's monotone chain), counter-clockwise, collinear points dropped.
std::vector<int> convex_hull_2d(const std::vector<std::array<double, 2>>& points);

}  // namespace mtd
