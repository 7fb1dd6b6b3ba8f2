#include "mtd/hull.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mtd {

namespace {

Point3 sub(const Point3& a, const Point3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
double dot(const Point3& a, const Point3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Point3 cross(const Point3& a, const Point3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double norm(const Point3& a) { return std::sqrt(dot(a, a)); }
Point3 scale(const Point3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

double cross2(const std::array<double, 2>& o, const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

double polygon_area(const std::vector<std::array<double, 2>>& pts, const std::vector<int>& poly) {
  double area = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = pts[poly[i]];
    const auto& b = pts[poly[(i + 1) % poly.size()]];
    area += a[0] * b[1] - a[1] * b[0];
  }
  return 0.5 * area;
}

// Orthonormal u, v with u x v = n.
void plane_basis(const Point3& n, Point3& u, Point3& v) {
  const Point3 helper = std::abs(n[0]) < 0.9 ? Point3{1, 0, 0} : Point3{0, 1, 0};
  u = cross(helper, n);
  u = scale(u, 1.0 / norm(u));
  v = cross(n, u);
}

}  // namespace

std::vector<int> convex_hull_2d(const std::vector<std::array<double, 2>>& points) {
  std::vector<int> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return points[a] < points[b]; });
  order.erase(std::unique(order.begin(), order.end(), [&](int a, int b) { return points[a] == points[b]; }),
              order.end());
  if (order.size() < 3) return order;
  std::vector<int> hull(2 * order.size());
  std::size_t k = 0;
  for (int i : order) {
    while (k >= 2 && cross2(points[hull[k - 2]], points[hull[k - 1]], points[i]) <= 0.0) --k;
    hull[k++] = i;
  }
  for (std::size_t t = order.size() - 1, lower = k + 1; t-- > 0;) {
    const int i = order[t];
    while (k >= lower && cross2(points[hull[k - 2]], points[hull[k - 1]], points[i]) <= 0.0) --k;
    hull[k++] = i;
  }
  hull.resize(k - 1);
  return hull;
}

Hull3 convex_hull_3d(const std::vector<Point3>& points, double relative_tol) {
  Hull3 hull;
  const int n = static_cast<int>(points.size());
  if (n == 0) {
    hull.degenerate = true;
    hull.planar = true;
    return hull;
  }
  Point3 lo = points[0], hi = points[0];
  for (const Point3& p : points) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  const double extent = std::max({hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]});
  const double tol = relative_tol * std::max(extent, 1e-300);

  // Affine rank: farthest point from p0, then from the line, then from the plane.
  int i1 = 0;
  for (int i = 0; i < n; ++i) {
    if (norm(sub(points[i], points[0])) > norm(sub(points[i1], points[0]))) i1 = i;
  }
  if (norm(sub(points[i1], points[0])) <= tol) {
    hull.degenerate = true;
    hull.planar = true;
    hull.vertices = {0};
    return hull;
  }
  const Point3 axis = scale(sub(points[i1], points[0]), 1.0 / norm(sub(points[i1], points[0])));
  auto line_distance = [&](int i) {
    const Point3 d = sub(points[i], points[0]);
    return norm(sub(d, scale(axis, dot(d, axis))));
  };
  int i2 = 0;
  for (int i = 0; i < n; ++i) {
    if (line_distance(i) > line_distance(i2)) i2 = i;
  }
  if (line_distance(i2) <= tol) {
    int a = 0, b = 0;
    for (int i = 0; i < n; ++i) {
      const double t = dot(sub(points[i], points[0]), axis);
      if (t < dot(sub(points[a], points[0]), axis)) a = i;
      if (t > dot(sub(points[b], points[0]), axis)) b = i;
    }
    hull.degenerate = true;
    hull.planar = true;
    hull.vertices = {std::min(a, b), std::max(a, b)};
    return hull;
  }
  Point3 plane_normal = cross(sub(points[i1], points[0]), sub(points[i2], points[0]));
  plane_normal = scale(plane_normal, 1.0 / norm(plane_normal));
  double max_off = 0.0;
  for (int i = 0; i < n; ++i) max_off = std::max(max_off, std::abs(dot(sub(points[i], points[0]), plane_normal)));

  if (max_off <= tol) {
    Point3 u, v;
    plane_basis(plane_normal, u, v);
    std::vector<std::array<double, 2>> flat(points.size());
    for (int i = 0; i < n; ++i) {
      const Point3 d = sub(points[i], points[0]);
      flat[i] = {dot(d, u), dot(d, v)};
    }
    HullFacet facet;
    facet.polygon = convex_hull_2d(flat);
    facet.normal = plane_normal;
    hull.area = std::abs(polygon_area(flat, facet.polygon));
    hull.vertices = facet.polygon;
    std::sort(hull.vertices.begin(), hull.vertices.end());
    hull.facets.push_back(std::move(facet));
    hull.planar = true;
    return hull;
  }

  struct Plane {
    Point3 normal;
    double offset;
  };
  std::vector<Plane> planes;
  std::vector<double> side(points.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        Point3 normal = cross(sub(points[j], points[i]), sub(points[k], points[i]));
        const double length = norm(normal);
        if (length <= tol * extent) continue;
        normal = scale(normal, 1.0 / length);
        double offset = dot(normal, points[i]);
        bool below = true, above = true;
        for (int l = 0; l < n; ++l) {
          side[l] = dot(normal, points[l]) - offset;
          below = below && side[l] <= tol;
          above = above && side[l] >= -tol;
        }
        if (!below && !above) continue;
        if (!below) {
          normal = scale(normal, -1.0);
          offset = -offset;
        }
        bool known = false;
        for (const Plane& p : planes) {
          if (dot(p.normal, normal) <= 0.0) continue;
          if (std::abs(dot(p.normal, points[i]) - p.offset) <= tol &&
              std::abs(dot(p.normal, points[j]) - p.offset) <= tol &&
              std::abs(dot(p.normal, points[k]) - p.offset) <= tol) {
            known = true;
            break;
          }
        }
        if (known) continue;
        planes.push_back({normal, offset});

        std::vector<int> members;
        for (int l = 0; l < n; ++l) {
          if (std::abs(dot(normal, points[l]) - offset) <= tol) members.push_back(l);
        }
        Point3 u, v;
        plane_basis(normal, u, v);
        std::vector<std::array<double, 2>> flat(members.size());
        for (std::size_t t = 0; t < members.size(); ++t) {
          flat[t] = {dot(points[members[t]], u), dot(points[members[t]], v)};
        }
        const std::vector<int> local = convex_hull_2d(flat);
        HullFacet facet;
        facet.normal = normal;
        for (int t : local) facet.polygon.push_back(members[t]);
        const double area = std::abs(polygon_area(flat, local));
        hull.area += area;
        hull.facets.push_back(std::move(facet));
      }
    }
  }

  for (const HullFacet& f : hull.facets) hull.vertices.insert(hull.vertices.end(), f.polygon.begin(), f.polygon.end());
  std::sort(hull.vertices.begin(), hull.vertices.end());
  hull.vertices.erase(std::unique(hull.vertices.begin(), hull.vertices.end()), hull.vertices.end());

  Point3 centroid{0, 0, 0};
  for (int i : hull.vertices) centroid = {centroid[0] + points[i][0], centroid[1] + points[i][1], centroid[2] + points[i][2]};
  centroid = scale(centroid, 1.0 / static_cast<double>(hull.vertices.size()));
  for (const HullFacet& f : hull.facets) {
    // Pyramid from the centroid over the facet polygon.
    const Point3& a = points[f.polygon[0]];
    double twice_area = 0.0;
    for (std::size_t t = 1; t + 1 < f.polygon.size(); ++t) {
      twice_area += dot(cross(sub(points[f.polygon[t]], a), sub(points[f.polygon[t + 1]], a)), f.normal);
    }
    hull.volume += std::abs(twice_area) * 0.5 * dot(f.normal, sub(a, centroid)) / 3.0;
  }
  return hull;
}

}  // namespace mtd
