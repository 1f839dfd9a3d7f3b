#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

#include "spdekit/error.hpp"
#include "spdekit/mesh.hpp"

namespace spdekit {
namespace {

std::uint64_t directed_key(Index a, Index b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

struct Bounds {
  double x0, y0, x1, y1;
};

Bounds bounds_of(std::span<const Point2> pts) {
  Bounds b{pts[0].x, pts[0].y, pts[0].x, pts[0].y};
  for (const auto& p : pts) {
    b.x0 = std::min(b.x0, p.x);
    b.y0 = std::min(b.y0, p.y);
    b.x1 = std::max(b.x1, p.x);
    b.y1 = std::max(b.y1, p.y);
  }
  return b;
}

std::array<double, 3> barycentric(const Point2& a, const Point2& b, const Point2& c, const Point2& p) {
  const double det = geometry::cross(a, b, c);
  return {geometry::cross(p, b, c) / det, geometry::cross(a, p, c) / det, geometry::cross(a, b, p) / det};
}

// Sutherland-Hodgman clip of `subject` against the counter-clockwise triangle.
Polygon clip_to_triangle(const Polygon& subject, const std::array<Point2, 3>& tri) {
  Polygon out = subject;
  for (int e = 0; e < 3 && !out.empty(); ++e) {
    const Point2 a = tri[e], b = tri[(e + 1) % 3];
    Polygon in;
    in.swap(out);
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 p = in[i], q = in[(i + 1) % n];
      const double sp = geometry::cross(a, b, p), sq = geometry::cross(a, b, q);
      if (sp >= 0) out.push_back(p);
      if ((sp >= 0) != (sq >= 0)) {
        const double t = sp / (sp - sq);
        out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
      }
    }
  }
  return out;
}

}  // namespace

double Mesh::triangle_area(Index t) const {
  const auto& tri = triangles[t];
  return 0.5 * geometry::cross(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
}

Point2 Mesh::centroid(Index t) const {
  const auto& tri = triangles[t];
  const Point2 &a = vertices[tri[0]], &b = vertices[tri[1]], &c = vertices[tri[2]];
  return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

void validate_mesh(const Mesh& mesh) {
  const Index nv = mesh.n_vertices();
  require(nv >= 3 && mesh.n_triangles() >= 1, ErrorKind::InvalidArgument, "mesh has no triangles");
  std::vector<char> used(nv, 0);
  std::unordered_set<std::uint64_t> directed;
  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (Index v : tri)
      require(v >= 0 && v < nv, ErrorKind::IndexOutOfRange,
              "triangle " + std::to_string(t) + " references a missing vertex");
    require(tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2], ErrorKind::InvalidArgument,
            "triangle " + std::to_string(t) + " repeats a vertex");
    require(mesh.triangle_area(t) > 0, ErrorKind::InvalidArgument,
            "triangle " + std::to_string(t) + " is not counter-clockwise with positive area");
    for (int i = 0; i < 3; ++i) {
      used[tri[i]] = 1;
      require(directed.insert(directed_key(tri[i], tri[(i + 1) % 3])).second, ErrorKind::InvalidArgument,
              "edge shared by triangles of equal orientation (non-conforming mesh)");
    }
  }
  for (Index v = 0; v < nv; ++v)
    require(used[v] != 0, ErrorKind::InvalidArgument, "vertex " + std::to_string(v) + " is unused");

  // a hanging vertex shows up as a vertex lying inside an unmatched edge
  std::vector<std::pair<Index, Index>> open_edges;
  for (const auto& tri : mesh.triangles)
    for (int i = 0; i < 3; ++i)
      if (!directed.count(directed_key(tri[(i + 1) % 3], tri[i]))) open_edges.push_back({tri[i], tri[(i + 1) % 3]});
  if (open_edges.empty()) return;
  const Bounds bb = bounds_of(mesh.vertices);
  const double extent = std::max(bb.x1 - bb.x0, bb.y1 - bb.y0);
  const Index cells = std::max<Index>(1, static_cast<Index>(std::sqrt(static_cast<double>(nv))));
  const double cell = std::max(extent / cells, 1e-300);
  auto cell_of = [&](double x, double y) {
    const Index cx = std::clamp<Index>(static_cast<Index>((x - bb.x0) / cell), 0, cells - 1);
    const Index cy = std::clamp<Index>(static_cast<Index>((y - bb.y0) / cell), 0, cells - 1);
    return std::pair{cx, cy};
  };
  std::vector<std::vector<Index>> grid(static_cast<std::size_t>(cells) * cells);
  for (Index v = 0; v < nv; ++v) {
    auto [cx, cy] = cell_of(mesh.vertices[v].x, mesh.vertices[v].y);
    grid[static_cast<std::size_t>(cy) * cells + cx].push_back(v);
  }
  for (auto [a, b] : open_edges) {
    const Point2 pa = mesh.vertices[a], pb = mesh.vertices[b];
    const double len = geometry::distance(pa, pb);
    auto [cx0, cy0] = cell_of(std::min(pa.x, pb.x), std::min(pa.y, pb.y));
    auto [cx1, cy1] = cell_of(std::max(pa.x, pb.x), std::max(pa.y, pb.y));
    for (Index cy = cy0; cy <= cy1; ++cy)
      for (Index cx = cx0; cx <= cx1; ++cx)
        for (Index v : grid[static_cast<std::size_t>(cy) * cells + cx]) {
          if (v == a || v == b) continue;
          const Point2 p = mesh.vertices[v];
          require(geometry::distance_to_segment(p, pa, pb) > 1e-12 * len, ErrorKind::InvalidArgument,
                  "vertex " + std::to_string(v) + " hangs on a boundary edge");
        }
  }
}

double min_angle_deg(const Mesh& mesh, Index t) {
  const auto& tri = mesh.triangles[t];
  double best = 180.0;
  for (int i = 0; i < 3; ++i) {
    const Point2 o = mesh.vertices[tri[i]];
    const Point2 a = mesh.vertices[tri[(i + 1) % 3]];
    const Point2 b = mesh.vertices[tri[(i + 2) % 3]];
    const double ax = a.x - o.x, ay = a.y - o.y, bx = b.x - o.x, by = b.y - o.y;
    const double ang = std::atan2(std::abs(ax * by - ay * bx), ax * bx + ay * by);
    best = std::min(best, ang * 180.0 / std::numbers::pi);
  }
  return best;
}

MeshQuality mesh_quality(const Mesh& mesh, int bins) {
  require(bins >= 1, ErrorKind::InvalidArgument, "bins must be >= 1");
  MeshQuality q;
  q.n_vertices = mesh.n_vertices();
  q.n_triangles = mesh.n_triangles();
  q.min_angle_deg = 180.0;
  std::unordered_set<std::uint64_t> seen;
  std::vector<double> lengths;
  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    q.min_angle_deg = std::min(q.min_angle_deg, min_angle_deg(mesh, t));
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      const Index a = std::min(tri[i], tri[(i + 1) % 3]), b = std::max(tri[i], tri[(i + 1) % 3]);
      if (seen.insert(directed_key(a, b)).second)
        lengths.push_back(geometry::distance(mesh.vertices[a], mesh.vertices[b]));
    }
  }
  if (lengths.empty()) {
    q.min_angle_deg = 0.0;
    return q;
  }
  double sum = 0.0;
  for (double l : lengths) {
    q.max_edge = std::max(q.max_edge, l);
    sum += l;
  }
  q.mean_edge = sum / static_cast<double>(lengths.size());
  q.edge_bin_edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) q.edge_bin_edges[b] = q.max_edge * b / bins;
  q.edge_counts.assign(bins, 0);
  for (double l : lengths) {
    const int b = std::min(bins - 1, static_cast<int>(l / q.max_edge * bins));
    ++q.edge_counts[b];
  }
  return q;
}

MeshLocator::MeshLocator(const Mesh& mesh) : mesh_(mesh) {
  const Bounds bb = bounds_of(mesh.vertices);
  const double w = std::max(bb.x1 - bb.x0, 1e-300), h = std::max(bb.y1 - bb.y0, 1e-300);
  const double target = std::max<double>(1.0, static_cast<double>(mesh.n_triangles()));
  cell_ = std::sqrt(w * h / target);
  if (!(cell_ > 0)) cell_ = std::max(w, h);
  x0_ = bb.x0;
  y0_ = bb.y0;
  nx_ = std::max<Index>(1, static_cast<Index>(std::ceil(w / cell_)));
  ny_ = std::max<Index>(1, static_cast<Index>(std::ceil(h / cell_)));
  const double pad = 1e-9 * std::max(w, h);

  std::vector<Index> count(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
  auto for_cells = [&](Index t, auto&& fn) {
    const auto& tri = mesh.triangles[t];
    const Point2 pts[3] = {mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]};
    const Bounds tb = bounds_of(pts);
    const Index cx0 = std::clamp<Index>(static_cast<Index>((tb.x0 - pad - x0_) / cell_), 0, nx_ - 1);
    const Index cx1 = std::clamp<Index>(static_cast<Index>((tb.x1 + pad - x0_) / cell_), 0, nx_ - 1);
    const Index cy0 = std::clamp<Index>(static_cast<Index>((tb.y0 - pad - y0_) / cell_), 0, ny_ - 1);
    const Index cy1 = std::clamp<Index>(static_cast<Index>((tb.y1 + pad - y0_) / cell_), 0, ny_ - 1);
    for (Index cy = cy0; cy <= cy1; ++cy)
      for (Index cx = cx0; cx <= cx1; ++cx) fn(static_cast<std::size_t>(cy) * nx_ + cx);
  };
  for (Index t = 0; t < mesh.n_triangles(); ++t) for_cells(t, [&](std::size_t c) { ++count[c + 1]; });
  for (std::size_t c = 1; c < count.size(); ++c) count[c] += count[c - 1];
  cell_start_ = count;
  cell_tris_.resize(count.back());
  std::vector<Index> fill(count.begin(), count.end() - 1);
  for (Index t = 0; t < mesh.n_triangles(); ++t) for_cells(t, [&](std::size_t c) { cell_tris_[fill[c]++] = t; });
}

std::optional<MeshLocator::Hit> MeshLocator::locate(Point2 p) const {
  const double fx = (p.x - x0_) / cell_, fy = (p.y - y0_) / cell_;
  if (!(fx > -1e-6 && fy > -1e-6 && fx < nx_ + 1e-6 && fy < ny_ + 1e-6)) return std::nullopt;
  const Index cx = std::clamp<Index>(static_cast<Index>(fx), 0, nx_ - 1);
  const Index cy = std::clamp<Index>(static_cast<Index>(fy), 0, ny_ - 1);
  const std::size_t c = static_cast<std::size_t>(cy) * nx_ + cx;
  std::optional<Hit> best;
  std::array<Index, 3> best_key{};
  for (Index k = cell_start_[c]; k < cell_start_[c + 1]; ++k) {
    const Index t = cell_tris_[k];
    const auto& tri = mesh_.triangles[t];
    const auto w = barycentric(mesh_.vertices[tri[0]], mesh_.vertices[tri[1]], mesh_.vertices[tri[2]], p);
    if (w[0] < -1e-10 || w[1] < -1e-10 || w[2] < -1e-10) continue;
    std::array<Index, 3> key = tri;
    std::sort(key.begin(), key.end());
    if (!best || key < best_key) {
      best = Hit{t, w};
      best_key = key;
    }
  }
  return best;
}

ProjectionMatrix projection_matrix(const Mesh& mesh, std::span<const Point2> locations) {
  validate_mesh(mesh);
  MeshLocator locator(mesh);
  ProjectionMatrix out;
  out.outside.assign(locations.size(), false);
  std::vector<Triplet> trip;
  trip.reserve(3 * locations.size());
  for (std::size_t k = 0; k < locations.size(); ++k) {
    auto hit = locator.locate(locations[k]);
    if (!hit) {
      out.outside[k] = true;
      continue;
    }
    auto w = hit->weights;
    double s = 0.0;
    for (double& x : w) {
      if (x < 1e-13) x = 0.0;
      s += x;
    }
    const auto& tri = mesh.triangles[hit->triangle];
    std::array<std::pair<Index, double>, 3> entries;
    for (int i = 0; i < 3; ++i) entries[i] = {tri[i], s == 1.0 ? w[i] : w[i] / s};
    std::sort(entries.begin(), entries.end());
    for (const auto& [v, x] : entries)
      if (x > 0.0) trip.push_back({static_cast<Index>(k), v, x});
  }
  out.A = SparseMatrix::from_triplets(static_cast<Index>(locations.size()), mesh.n_vertices(), trip);
  return out;
}

SparseMatrix areal_integration_row(const Mesh& mesh, const Polygon& region) {
  require(region.size() >= 3 && geometry::is_simple(region), ErrorKind::DegeneratePolygon,
          "region must be a simple polygon");
  Polygon ccw = region;
  if (geometry::signed_area(ccw) < 0) std::reverse(ccw.begin(), ccw.end());
  const double region_area = geometry::signed_area(ccw);
  const Bounds rb = bounds_of(ccw);

  std::vector<double> acc(mesh.n_vertices(), 0.0);
  double covered = 0.0;
  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const std::array<Point2, 3> p{mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]};
    const Bounds tb = bounds_of(p);
    if (tb.x1 < rb.x0 || tb.x0 > rb.x1 || tb.y1 < rb.y0 || tb.y0 > rb.y1) continue;
    const Polygon clip = clip_to_triangle(ccw, p);
    if (clip.size() < 3) continue;
    // fan integration of the three hat functions; linear integrands are exact
    std::array<double, 3> integral{0.0, 0.0, 0.0};
    const auto w0 = barycentric(p[0], p[1], p[2], clip[0]);
    for (std::size_t i = 1; i + 1 < clip.size(); ++i) {
      const double a = 0.5 * geometry::cross(clip[0], clip[i], clip[i + 1]);
      if (a == 0.0) continue;
      const auto w1 = barycentric(p[0], p[1], p[2], clip[i]);
      const auto w2 = barycentric(p[0], p[1], p[2], clip[i + 1]);
      for (int j = 0; j < 3; ++j) integral[j] += a * (w0[j] + w1[j] + w2[j]) / 3.0;
      covered += a;
    }
    for (int j = 0; j < 3; ++j) acc[tri[j]] += integral[j];
  }
  require(covered > 1e-12 * region_area, ErrorKind::EmptyIntersection, "region does not overlap the mesh");
  std::vector<Triplet> trip;
  for (Index v = 0; v < mesh.n_vertices(); ++v)
    if (acc[v] != 0.0) trip.push_back({0, v, acc[v] / region_area});
  return SparseMatrix::from_triplets(1, mesh.n_vertices(), trip);
}

}  // namespace spdekit
