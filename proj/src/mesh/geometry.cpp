#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "spdekit/error.hpp"
#include "spdekit/mesh.hpp"

namespace spdekit::geometry {

double cross(Point2 o, Point2 a, Point2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double signed_area(std::span<const Point2> polygon) {
  double s = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = polygon[i];
    const Point2& b = polygon[(i + 1) % n];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

bool point_in_polygon(Point2 p, std::span<const Point2> polygon) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = polygon[i];
    const Point2& b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

double distance_to_segment(Point2 p, Point2 a, Point2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

double distance_to_boundary(Point2 p, std::span<const Point2> polygon) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < polygon.size(); ++i)
    d = std::min(d, distance_to_segment(p, polygon[i], polygon[(i + 1) % polygon.size()]));
  return d;
}

namespace {

int orientation_sign(Point2 a, Point2 b, Point2 c, double scale) {
  const double v = cross(a, b, c);
  const double tol = 1e-14 * scale * scale;
  return v > tol ? 1 : (v < -tol ? -1 : 0);
}

bool on_segment(Point2 a, Point2 b, Point2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d, double scale) {
  const int o1 = orientation_sign(a, b, c, scale), o2 = orientation_sign(a, b, d, scale);
  const int o3 = orientation_sign(c, d, a, scale), o4 = orientation_sign(c, d, b, scale);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

}  // namespace

bool is_simple(std::span<const Point2> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  double scale = 0.0;
  for (const auto& p : polygon) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  scale = std::max(scale, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    if (distance(polygon[i], polygon[(i + 1) % n]) <= 1e-14 * scale) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = polygon[i], b = polygon[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      const Point2 c = polygon[j], d = polygon[(j + 1) % n];
      if (adjacent) {
        // adjacent edges may only share their common vertex
        const Point2 other = (j == i + 1) ? d : c;
        const Point2 shared = (j == i + 1) ? b : a;
        const Point2 far = (j == i + 1) ? a : b;
        if (orientation_sign(far, shared, other, scale) == 0) {
          const double dx1 = shared.x - far.x, dy1 = shared.y - far.y;
          const double dx2 = other.x - shared.x, dy2 = other.y - shared.y;
          if (dx1 * dx2 + dy1 * dy2 < 0) return false;  // folds back on itself
        }
        continue;
      }
      if (segments_intersect(a, b, c, d, scale)) return false;
    }
  }
  return std::abs(signed_area(polygon)) > 0.0;
}

Polygon convex_hull(std::span<const Point2> points, bool keep_collinear) {
  std::vector<Point2> p(points.begin(), points.end());
  std::sort(p.begin(), p.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return p;
  Polygon hull(2 * p.size());
  std::size_t k = 0;
  auto pops = [&](Point2 a, Point2 b, Point2 c) {
    const double v = cross(a, b, c);
    return keep_collinear ? v < 0 : v <= 0;
  };
  for (const auto& pt : p) {
    while (k >= 2 && pops(hull[k - 2], hull[k - 1], pt)) --k;
    hull[k++] = pt;
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && pops(hull[k - 2], hull[k - 1], p[i])) --k;
    hull[k++] = p[i];
  }
  hull.resize(k - 1);
  if (keep_collinear) {
    // with all points collinear the chain doubles back; drop repeats
    std::vector<Point2> uniq;
    for (const auto& q : hull)
      if (std::find(uniq.begin(), uniq.end(), q) == uniq.end()) uniq.push_back(q);
    hull = uniq;
  }
  return hull;
}

Polygon offset_convex(const Polygon& convex_ccw, double dist) {
  const std::size_t n = convex_ccw.size();
  require(n >= 3, ErrorKind::InvalidArgument, "offset needs a polygon with >= 3 vertices");
  if (dist <= 0.0) return convex_ccw;
  const double full_step = 2.0 * std::numbers::pi / 16.0;
  Polygon out;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 prev = convex_ccw[(i + n - 1) % n];
    const Point2 cur = convex_ccw[i];
    const Point2 next = convex_ccw[(i + 1) % n];
    // outward normals of incoming and outgoing edges
    const double a0 = std::atan2(-(cur.x - prev.x), cur.y - prev.y);
    double a1 = std::atan2(-(next.x - cur.x), next.y - cur.y);
    while (a1 < a0) a1 += 2.0 * std::numbers::pi;
    const double turn = a1 - a0;
    const int pieces = std::max(1, static_cast<int>(std::ceil(turn / full_step - 1e-12)));
    const double step = turn / pieces;
    const double radius = dist / std::cos(0.5 * step);
    for (int j = 0; j < pieces; ++j) {
      const double ang = a0 + (j + 0.5) * step;
      out.push_back({cur.x + radius * std::cos(ang), cur.y + radius * std::sin(ang)});
    }
  }
  return out;
}

}  // namespace spdekit::geometry
