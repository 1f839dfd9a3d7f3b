// Mesh generation: incremental constrained Delaunay triangulation followed by
// Ruppert refinement (encroached-segment splitting with concentric shells,
// circumcenter insertion for skinny or oversized triangles).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

#include "spdekit/error.hpp"
#include "spdekit/mesh.hpp"

namespace spdekit {
namespace {

using geometry::point_in_polygon;

long double orient(const Point2& a, const Point2& b, const Point2& c) {
  return (static_cast<long double>(b.x) - a.x) * (static_cast<long double>(c.y) - a.y) -
         (static_cast<long double>(b.y) - a.y) * (static_cast<long double>(c.x) - a.x);
}

// > 0 when d lies strictly inside the circumcircle of counter-clockwise (a, b, c)
long double incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  const long double adx = static_cast<long double>(a.x) - d.x, ady = static_cast<long double>(a.y) - d.y;
  const long double bdx = static_cast<long double>(b.x) - d.x, bdy = static_cast<long double>(b.y) - d.y;
  const long double cdx = static_cast<long double>(c.x) - d.x, cdy = static_cast<long double>(c.y) - d.y;
  const long double ad = adx * adx + ady * ady;
  const long double bd = bdx * bdx + bdy * bdy;
  const long double cd = cdx * cdx + cdy * cdy;
  return ad * (bdx * cdy - bdy * cdx) - bd * (adx * cdy - ady * cdx) + cd * (adx * bdy - ady * bdx);
}

Point2 circumcenter(const Point2& a, const Point2& b, const Point2& c) {
  const double bx = b.x - a.x, by = b.y - a.y;
  const double cx = c.x - a.x, cy = c.y - a.y;
  const double d = 2.0 * (bx * cy - by * cx);
  const double b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
  return {a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d};
}

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

struct Tri {
  std::array<int, 3> v;
  std::array<int, 3> nb;  // nb[i] lies across the edge opposite v[i]
  bool alive;
};

struct Segment {
  int a, b;
};

class Refiner {
 public:
  Refiner(const Polygon& outer, const Polygon& inner, double scale, const MeshConfig& cfg)
      : outer_(outer), inner_(inner), scale_(scale), cfg_(cfg) {
    sin_min_angle_ = std::sin(cfg.min_angle * std::numbers::pi / 180.0);
  }

  void init_super(double cx, double cy, double radius) {
    const double r = 20.0 * radius;
    pts_ = {{cx - 2 * r, cy - r}, {cx + 2 * r, cy - r}, {cx, cy + 2 * r}};
    input_corner_.assign(3, 0);
    vtri_ = {0, 0, 0};
    tris_.push_back({{0, 1, 2}, {-1, -1, -1}, true});
  }

  // Returns the vertex index; duplicates of an existing vertex return it.
  int add_vertex(Point2 p, bool corner) {
    auto loc = locate(p, last_tri_);
    const Tri& t = tris_[loc];
    for (int i = 0; i < 3; ++i)
      if (geometry::distance(pts_[t.v[i]], p) <= 1e-12 * scale_) {
        input_corner_[t.v[i]] |= corner;
        return t.v[i];
      }
    const int id = insert(p, loc, -1);
    input_corner_[id] = corner;
    return id;
  }

  void add_segment(int a, int b) {
    if (a == b) return;
    const int id = static_cast<int>(segs_.size());
    segs_.push_back({a, b});
    seg_alive_.push_back(1);
    seg_of_edge_[edge_key(a, b)] = id;
  }

  void recover_segments() {
    std::deque<int> queue;
    for (int s = 0; s < static_cast<int>(segs_.size()); ++s) queue.push_back(s);
    while (!queue.empty()) {
      const int s = queue.front();
      queue.pop_front();
      if (!seg_alive_[s]) continue;
      if (find_edge(segs_[s].a, segs_[s].b).first >= 0) continue;
      auto [s1, s2] = split_segment(s);
      if (s1 < 0) continue;
      queue.push_back(s1);
      queue.push_back(s2);
    }
  }

  void refine() {
    for (int s = 0; s < static_cast<int>(segs_.size()); ++s)
      if (seg_alive_[s]) seg_queue_.push_back(s);
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t)
      if (tris_[t].alive) tri_queue_.push_back(t);

    const std::size_t vertex_cap = 4'000'000;
    while (!seg_queue_.empty() || !tri_queue_.empty()) {
      if (pts_.size() > vertex_cap)
        fail(ErrorKind::MeshRefinementFailure, "mesh refinement exceeded the vertex budget");
      if (!seg_queue_.empty()) {
        const int s = seg_queue_.front();
        seg_queue_.pop_front();
        if (seg_alive_[s] && encroached(s)) split_segment(s);
        continue;
      }
      const int t = tri_queue_.front();
      tri_queue_.pop_front();
      if (!tris_[t].alive || !is_bad(t)) continue;
      split_triangle(t);
    }
  }

  Mesh extract() const {
    // flood the exterior from triangles touching the bounding super-triangle
    std::vector<char> exterior(tris_.size(), 0);
    std::vector<int> stack;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      if (!tris_[t].alive) continue;
      const auto& v = tris_[t].v;
      if (v[0] < 3 || v[1] < 3 || v[2] < 3) {
        exterior[t] = 1;
        stack.push_back(t);
      }
    }
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      for (int i = 0; i < 3; ++i) {
        const int n = tris_[t].nb[i];
        if (n < 0 || exterior[n]) continue;
        if (is_segment_edge(tris_[t].v[(i + 1) % 3], tris_[t].v[(i + 2) % 3])) continue;
        exterior[n] = 1;
        stack.push_back(n);
      }
    }
    Mesh mesh;
    std::vector<Index> remap(pts_.size(), -1);
    std::vector<int> keep;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t)
      if (tris_[t].alive && !exterior[t]) keep.push_back(t);
    for (int t : keep)
      for (int v : tris_[t].v) remap[v] = 0;
    for (std::size_t v = 3; v < pts_.size(); ++v)
      if (remap[v] == 0) {
        remap[v] = static_cast<Index>(mesh.vertices.size());
        mesh.vertices.push_back(pts_[v]);
      }
    for (int t : keep)
      mesh.triangles.push_back({remap[tris_[t].v[0]], remap[tris_[t].v[1]], remap[tris_[t].v[2]]});
    return mesh;
  }

 private:
  bool is_segment_edge(int a, int b) const { return seg_of_edge_.count(edge_key(a, b)) != 0; }

  int segment_of(int a, int b) const {
    auto it = seg_of_edge_.find(edge_key(a, b));
    return it == seg_of_edge_.end() ? -1 : it->second;
  }

  int local_index(const Tri& t, int v) const {
    for (int i = 0; i < 3; ++i)
      if (t.v[i] == v) return i;
    return -1;
  }

  // Triangle containing p (boundary inclusive), found by a visibility walk.
  int locate(const Point2& p, int start) const {
    int t = (start >= 0 && start < static_cast<int>(tris_.size()) && tris_[start].alive) ? start : -1;
    if (t < 0) {
      for (int k = static_cast<int>(tris_.size()) - 1; k >= 0; --k)
        if (tris_[k].alive) {
          t = k;
          break;
        }
    }
    std::size_t steps = 0;
    unsigned rot = 0;
    while (steps++ < 4 * tris_.size() + 100) {
      const Tri& tri = tris_[t];
      bool moved = false;
      for (int k = 0; k < 3; ++k) {
        const int i = static_cast<int>((k + rot) % 3);
        const Point2& a = pts_[tri.v[(i + 1) % 3]];
        const Point2& b = pts_[tri.v[(i + 2) % 3]];
        if (orient(a, b, p) < 0 && tri.nb[i] >= 0) {
          t = tri.nb[i];
          moved = true;
          break;
        }
      }
      ++rot;
      if (!moved) return t;
    }
    // fall back to an exhaustive scan
    for (int k = 0; k < static_cast<int>(tris_.size()); ++k) {
      if (!tris_[k].alive) continue;
      const Tri& tri = tris_[k];
      if (orient(pts_[tri.v[0]], pts_[tri.v[1]], p) >= 0 && orient(pts_[tri.v[1]], pts_[tri.v[2]], p) >= 0 &&
          orient(pts_[tri.v[2]], pts_[tri.v[0]], p) >= 0)
        return k;
    }
    fail(ErrorKind::MeshRefinementFailure, "point location failed");
  }

  // Walks from triangle `from` toward p. Returns {triangle, -1} on arrival or
  // {-1, segment} when a constrained edge blocks the path.
  std::pair<int, int> walk_to(int from, const Point2& p) const {
    int t = from;
    std::size_t steps = 0;
    unsigned rot = 0;
    while (steps++ < 4 * tris_.size() + 100) {
      const Tri& tri = tris_[t];
      bool moved = false;
      for (int k = 0; k < 3; ++k) {
        const int i = static_cast<int>((k + rot) % 3);
        const int va = tri.v[(i + 1) % 3], vb = tri.v[(i + 2) % 3];
        if (orient(pts_[va], pts_[vb], p) < 0) {
          const int s = segment_of(va, vb);
          if (s >= 0) return {-1, s};
          if (tri.nb[i] < 0) return {-1, -1};
          t = tri.nb[i];
          moved = true;
          break;
        }
      }
      ++rot;
      if (!moved) return {t, -1};
    }
    return {-1, -1};
  }

  // Bowyer-Watson insertion; `splitting` is the segment p subdivides (its
  // edge may be crossed by the cavity), or -1.
  int insert(const Point2& p, int start, int splitting) {
    const int id = static_cast<int>(pts_.size());
    pts_.push_back(p);
    input_corner_.push_back(0);
    vtri_.push_back(-1);

    std::uint64_t split_key = splitting >= 0 ? edge_key(segs_[splitting].a, segs_[splitting].b) : ~0ULL;

    std::vector<int> cavity{start};
    std::unordered_set<int> in_cavity{start};
    for (std::size_t k = 0; k < cavity.size(); ++k) {
      const Tri& t = tris_[cavity[k]];
      for (int i = 0; i < 3; ++i) {
        const int n = t.nb[i];
        if (n < 0 || in_cavity.count(n)) continue;
        const int va = t.v[(i + 1) % 3], vb = t.v[(i + 2) % 3];
        const std::uint64_t key = edge_key(va, vb);
        const bool is_split_edge = key == split_key;
        if (!is_split_edge && seg_of_edge_.count(key)) continue;
        const Tri& u = tris_[n];
        bool take = is_split_edge || incircle(pts_[u.v[0]], pts_[u.v[1]], pts_[u.v[2]], p) > 0;
        // p on the shared edge: the neighbour must go too
        if (!take && std::abs(orient(pts_[va], pts_[vb], p)) <= 1e-18L * scale_ * scale_) take = true;
        if (take) {
          cavity.push_back(n);
          in_cavity.insert(n);
        }
      }
    }

    struct BoundaryEdge {
      int a, b, outer, owner;
    };
    std::vector<BoundaryEdge> boundary;
    for (;;) {
      boundary.clear();
      for (int c : cavity) {
        const Tri& t = tris_[c];
        for (int i = 0; i < 3; ++i)
          if (t.nb[i] < 0 || !in_cavity.count(t.nb[i]))
            boundary.push_back({t.v[(i + 1) % 3], t.v[(i + 2) % 3], t.nb[i], c});
      }
      // the cavity must be star-shaped from p; shrink it where rounding broke that
      int offender = -1;
      for (const auto& e : boundary)
        if (orient(pts_[e.a], pts_[e.b], p) <= 0 && e.owner != start) {
          offender = e.owner;
          break;
        }
      if (offender < 0) break;
      in_cavity.erase(offender);
      cavity.erase(std::find(cavity.begin(), cavity.end(), offender));
      // keep the cavity connected to `start`
      std::vector<int> connected{start};
      std::unordered_set<int> reach{start};
      for (std::size_t k = 0; k < connected.size(); ++k)
        for (int n : tris_[connected[k]].nb)
          if (n >= 0 && in_cavity.count(n) && !reach.count(n)) {
            reach.insert(n);
            connected.push_back(n);
          }
      cavity = connected;
      in_cavity = reach;
    }

    for (int c : cavity) tris_[c].alive = false;
    std::unordered_map<int, int> by_start;
    std::vector<int> created;
    created.reserve(boundary.size());
    for (const auto& e : boundary) {
      const int nt = static_cast<int>(tris_.size());
      tris_.push_back({{e.a, e.b, id}, {-1, -1, e.outer}, true});
      if (e.outer >= 0) {
        Tri& o = tris_[e.outer];
        for (int i = 0; i < 3; ++i)
          if (o.v[(i + 1) % 3] == e.b && o.v[(i + 2) % 3] == e.a) o.nb[i] = nt;
      }
      by_start[e.a] = nt;
      created.push_back(nt);
      vtri_[e.a] = nt;
      vtri_[e.b] = nt;
    }
    for (int nt : created) {
      Tri& t = tris_[nt];
      // edge (b, p) opposite a is shared with the triangle starting at b
      t.nb[0] = by_start.at(t.v[1]);
      // edge (p, a) opposite b is shared with the triangle ending at a
      const int prev = [&] {
        for (int o : created)
          if (tris_[o].v[1] == t.v[0]) return o;
        return -1;
      }();
      t.nb[1] = prev;
    }
    vtri_[id] = created.front();
    last_tri_ = created.front();

    for (int nt : created) {
      tri_queue_.push_back(nt);
      const int s = segment_of(tris_[nt].v[0], tris_[nt].v[1]);
      if (s >= 0) seg_queue_.push_back(s);
    }
    return id;
  }

  // Triangle and local index such that edge (a, b) is the edge opposite
  // local index i with a = v[i+1], b = v[i+2] (or reversed); {-1,-1} if absent.
  std::pair<int, int> find_edge(int a, int b) const {
    const int start = vtri_[a];
    if (start < 0) return {-1, -1};
    int t = start;
    for (int guard = 0; guard < 10000; ++guard) {
      const Tri& tri = tris_[t];
      const int i = local_index(tri, a);
      for (int k = 0; k < 3; ++k)
        if (k != i && tri.v[k] == b) return {t, 3 - i - k};
      const int next = tri.nb[(i + 1) % 3];
      if (next < 0 || next == start) break;
      t = next;
    }
    // rotate the other way (only needed next to the super-triangle hull)
    t = start;
    for (int guard = 0; guard < 10000; ++guard) {
      const Tri& tri = tris_[t];
      const int i = local_index(tri, a);
      for (int k = 0; k < 3; ++k)
        if (k != i && tri.v[k] == b) return {t, 3 - i - k};
      const int next = tri.nb[(i + 2) % 3];
      if (next < 0 || next == start) break;
      t = next;
    }
    return {-1, -1};
  }

  bool encroached(int s) const {
    const int a = segs_[s].a, b = segs_[s].b;
    auto [t, i] = find_edge(a, b);
    if (t < 0) return true;
    const double len = geometry::distance(pts_[a], pts_[b]);
    if (len < 1e-9 * scale_) return false;
    auto apex_inside = [&](int tri, int local) {
      const Point2& c = pts_[tris_[tri].v[local]];
      const double dx1 = pts_[a].x - c.x, dy1 = pts_[a].y - c.y;
      const double dx2 = pts_[b].x - c.x, dy2 = pts_[b].y - c.y;
      return dx1 * dx2 + dy1 * dy2 < -1e-12 * len * len;
    };
    if (tris_[t].v[i] >= 3 && apex_inside(t, i)) return true;
    const int n = tris_[t].nb[i];
    if (n >= 0) {
      const Tri& o = tris_[n];
      for (int k = 0; k < 3; ++k)
        if (o.v[k] != a && o.v[k] != b && o.v[k] >= 3 && apex_inside(n, k)) return true;
    }
    return false;
  }

  bool point_encroaches(int s, const Point2& c) const {
    const Point2& a = pts_[segs_[s].a];
    const Point2& b = pts_[segs_[s].b];
    const double dx1 = a.x - c.x, dy1 = a.y - c.y;
    const double dx2 = b.x - c.x, dy2 = b.y - c.y;
    const double len2 = (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y);
    return dx1 * dx2 + dy1 * dy2 < -1e-12 * len2;
  }

  std::pair<int, int> split_segment(int s) {
    const int a = segs_[s].a, b = segs_[s].b;
    const Point2 pa = pts_[a], pb = pts_[b];
    const double len = geometry::distance(pa, pb);
    if (len < 1e-9 * scale_) return {-1, -1};
    double t = 0.5;
    // concentric shells around corner vertices keep splits from cascading
    const bool ca = input_corner_[a] != 0, cb = input_corner_[b] != 0;
    if (ca != cb) {
      const double unit = std::exp2(std::round(std::log2(0.5 * len / shell_unit())));
      const double d = unit * shell_unit();
      t = ca ? d / len : 1.0 - d / len;
      if (t < 0.25 || t > 0.75) t = 0.5;
    }
    const Point2 m{pa.x + t * (pb.x - pa.x), pa.y + t * (pb.y - pa.y)};

    seg_alive_[s] = 0;
    auto [et, ei] = find_edge(a, b);
    int start = et;
    if (start < 0) start = locate(m, vtri_[a]);
    const int id = insert_split_point(m, start, s, et >= 0);
    seg_of_edge_.erase(edge_key(a, b));
    const int s1 = static_cast<int>(segs_.size());
    segs_.push_back({a, id});
    seg_alive_.push_back(1);
    seg_of_edge_[edge_key(a, id)] = s1;
    const int s2 = static_cast<int>(segs_.size());
    segs_.push_back({id, b});
    seg_alive_.push_back(1);
    seg_of_edge_[edge_key(id, b)] = s2;
    seg_queue_.push_back(s1);
    seg_queue_.push_back(s2);
    return {s1, s2};
  }

  int insert_split_point(const Point2& m, int start, int s, bool edge_present) {
    if (!edge_present) {
      // segment not yet in the triangulation: plain insertion
      const int t = locate(m, start);
      for (int v : tris_[t].v)
        if (geometry::distance(pts_[v], m) <= 1e-12 * scale_) return v;
      return insert(m, t, -1);
    }
    return insert(m, start, s);
  }

  double shell_unit() const { return std::exp2(std::floor(std::log2(scale_))) * 1e-3; }

  bool in_domain(const Point2& c) const { return point_in_polygon(c, outer_); }

  double zone_max_edge(const Point2& c) const {
    return point_in_polygon(c, inner_) ? cfg_.max_edge_inner : cfg_.max_edge_outer;
  }

  bool is_bad(int t) const {
    const Tri& tri = tris_[t];
    if (tri.v[0] < 3 || tri.v[1] < 3 || tri.v[2] < 3) return false;
    const Point2& a = pts_[tri.v[0]];
    const Point2& b = pts_[tri.v[1]];
    const Point2& c = pts_[tri.v[2]];
    const Point2 centroid{(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
    if (!in_domain(centroid)) return false;
    // edge i is opposite vertex i
    const std::array<double, 3> len{geometry::distance(b, c), geometry::distance(c, a),
                                    geometry::distance(a, b)};
    const double longest = std::max({len[0], len[1], len[2]});
    if (longest > zone_max_edge(centroid) * (1.0 + 1e-12)) return true;
    const int shortest = static_cast<int>(std::min_element(len.begin(), len.end()) - len.begin());
    if (len[shortest] < 1e-9 * scale_) return false;
    const double area2 = std::abs(static_cast<double>(orient(a, b, c)));
    // sin(smallest angle) = shortest / (2R),  R = abc / (4 area)
    const double sin_min = len[shortest] * 2.0 * area2 / (2.0 * len[0] * len[1] * len[2]);
    if (sin_min >= sin_min_angle_ * (1.0 - 1e-12)) return false;
    // the smallest angle sits opposite the shortest edge; skip input angles
    // bounded by two segments
    const int apex = tri.v[shortest];
    const int p = tri.v[(shortest + 1) % 3], q = tri.v[(shortest + 2) % 3];
    if (is_segment_edge(apex, p) && is_segment_edge(apex, q)) return false;
    return true;
  }

  void split_triangle(int t) {
    const Tri tri = tris_[t];
    const Point2 c = circumcenter(pts_[tri.v[0]], pts_[tri.v[1]], pts_[tri.v[2]]);
    auto [dest, blocking] = walk_to(t, c);
    if (dest < 0) {
      if (blocking >= 0) split_segment(blocking);
      return;
    }
    std::vector<int> hit;
    for (int s = 0; s < static_cast<int>(segs_.size()); ++s)
      if (seg_alive_[s] && point_encroaches(s, c)) hit.push_back(s);
    if (!hit.empty()) {
      bool split_any = false;
      for (int s : hit)
        if (seg_alive_[s]) split_any |= split_segment(s).first >= 0;
      if (split_any && tris_[t].alive) tri_queue_.push_back(t);
      return;
    }
    if (!in_domain(c)) return;
    const Tri& d = tris_[dest];
    for (int v : d.v)
      if (geometry::distance(pts_[v], c) <= 1e-12 * scale_) return;
    insert(c, dest, -1);
  }

  Polygon outer_, inner_;
  double scale_;
  MeshConfig cfg_;
  double sin_min_angle_ = 0.0;

  std::vector<Point2> pts_;
  std::vector<char> input_corner_;
  std::vector<int> vtri_;
  std::vector<Tri> tris_;
  int last_tri_ = 0;

  std::vector<Segment> segs_;
  std::vector<char> seg_alive_;
  std::unordered_map<std::uint64_t, int> seg_of_edge_;

  std::deque<int> seg_queue_;
  std::deque<int> tri_queue_;
};

Polygon make_ccw(Polygon p) {
  if (geometry::signed_area(p) < 0) std::reverse(p.begin(), p.end());
  return p;
}

// Inserts locations lying on polygon edges as extra polygon vertices.
Polygon absorb_points_on_edges(const Polygon& poly, std::span<const Point2> points, double tol) {
  Polygon out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = poly[i], b = poly[(i + 1) % n];
    out.push_back(a);
    std::vector<std::pair<double, Point2>> on;
    const double len = geometry::distance(a, b);
    for (const auto& p : points) {
      if (geometry::distance(p, a) <= tol || geometry::distance(p, b) <= tol) continue;
      if (geometry::distance_to_segment(p, a, b) <= tol) {
        const double t = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / (len * len);
        on.push_back({t, p});
      }
    }
    std::sort(on.begin(), on.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    for (const auto& [t, p] : on)
      if (out.empty() || geometry::distance(out.back(), p) > tol) out.push_back(p);
  }
  return out;
}

// Points a = q0, q1, ..., q_{k-1} splitting a->b into k equal pieces no
// longer than max_len (b itself excluded).
std::vector<Point2> subdivide_edge(Point2 a, Point2 b, double max_len) {
  std::vector<Point2> out;
  const double len = geometry::distance(a, b);
  const int pieces = std::max(1, static_cast<int>(std::ceil(len / max_len - 1e-9)));
  for (int k = 0; k < pieces; ++k) {
    const double t = static_cast<double>(k) / pieces;
    out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
  }
  return out;
}

std::vector<char> corner_flags(const Polygon& poly) {
  // corners are vertices where the boundary actually turns
  std::vector<char> flags(poly.size(), 0);
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = poly[(i + n - 1) % n], b = poly[i], c = poly[(i + 1) % n];
    const double cr = geometry::cross(a, b, c);
    const double la = geometry::distance(a, b), lc = geometry::distance(b, c);
    flags[i] = std::abs(cr) > 1e-9 * la * lc;
  }
  return flags;
}

std::vector<std::vector<Index>> boundary_loops_of(const Mesh& mesh) {
  std::unordered_set<std::uint64_t> directed;
  auto key = [](Index a, Index b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
  };
  for (const auto& t : mesh.triangles)
    for (int i = 0; i < 3; ++i) directed.insert(key(t[i], t[(i + 1) % 3]));
  std::unordered_map<Index, Index> next;
  for (const auto& t : mesh.triangles)
    for (int i = 0; i < 3; ++i) {
      const Index a = t[i], b = t[(i + 1) % 3];
      if (!directed.count(key(b, a))) next[a] = b;
    }
  std::vector<std::vector<Index>> loops;
  std::unordered_set<Index> used;
  std::vector<Index> starts;
  for (const auto& [a, b] : next) starts.push_back(a);
  std::sort(starts.begin(), starts.end());
  for (Index s : starts) {
    if (used.count(s)) continue;
    std::vector<Index> loop;
    Index v = s;
    while (!used.count(v)) {
      used.insert(v);
      loop.push_back(v);
      v = next.at(v);
    }
    loops.push_back(std::move(loop));
  }
  // outer loop first: the one with the largest positive area
  auto loop_area = [&](const std::vector<Index>& loop) {
    Polygon p;
    for (Index v : loop) p.push_back(mesh.vertices[v]);
    return geometry::signed_area(p);
  };
  std::stable_sort(loops.begin(), loops.end(),
                   [&](const auto& l, const auto& r) { return loop_area(l) > loop_area(r); });
  return loops;
}

}  // namespace

void MeshConfig::validate() const {
  require(max_edge_inner > 0 && max_edge_outer > 0, ErrorKind::InvalidArgument,
          "max edge lengths must be positive");
  require(max_edge_inner <= max_edge_outer, ErrorKind::InvalidArgument,
          "max_edge_inner must not exceed max_edge_outer");
  require(extension_distance >= 0, ErrorKind::InvalidArgument, "extension_distance must be >= 0");
  require(min_angle > 0 && min_angle < 35, ErrorKind::InvalidArgument,
          "min_angle must lie in (0, 35) degrees");
}

MeshConfig MeshConfig::from_range_hint(double range) {
  require(range > 0, ErrorKind::InvalidArgument, "range hint must be positive");
  MeshConfig c;
  c.max_edge_inner = range / 5.0;
  c.max_edge_outer = range / 2.0;
  c.extension_distance = range;
  return c;
}

Mesh build_mesh(std::span<const Point2> locations, const std::optional<Polygon>& boundary,
                const MeshConfig& config) {
  config.validate();
  for (const auto& p : locations)
    require(std::isfinite(p.x) && std::isfinite(p.y), ErrorKind::InvalidArgument,
            "locations must be finite");

  Polygon inner;
  double scale = 0.0;
  auto grow_scale = [&](const Point2& p) { scale = std::max({scale, std::abs(p.x), std::abs(p.y)}); };
  for (const auto& p : locations) grow_scale(p);

  if (boundary) {
    require(boundary->size() >= 3 && geometry::is_simple(*boundary), ErrorKind::DegeneratePolygon,
            "boundary polygon is degenerate or self-intersecting");
    for (const auto& p : *boundary) grow_scale(p);
    inner = make_ccw(*boundary);
  } else {
    require(locations.size() >= 3, ErrorKind::CollinearInput, "need at least 3 locations");
    inner = geometry::convex_hull(locations, true);
    const Polygon strict = geometry::convex_hull(locations, false);
    double extent = 0.0;
    for (const auto& p : locations) extent = std::max(extent, geometry::distance(p, locations.front()));
    require(strict.size() >= 3 && std::abs(geometry::signed_area(strict)) > 1e-12 * extent * extent,
            ErrorKind::CollinearInput, "all locations are collinear");
  }
  scale = std::max(scale, 1e-300);
  double diameter = 0.0;
  {
    double minx = inner[0].x, maxx = inner[0].x, miny = inner[0].y, maxy = inner[0].y;
    for (const auto& p : inner) {
      minx = std::min(minx, p.x);
      maxx = std::max(maxx, p.x);
      miny = std::min(miny, p.y);
      maxy = std::max(maxy, p.y);
    }
    diameter = std::hypot(maxx - minx, maxy - miny);
  }
  const double tol = 1e-10 * diameter;

  if (boundary) {
    for (const auto& p : locations)
      require(geometry::point_in_polygon(p, inner) || geometry::distance_to_boundary(p, inner) <= tol,
              ErrorKind::InvalidArgument, "boundary polygon must contain all locations");
    inner = absorb_points_on_edges(inner, locations, tol);
  }

  Polygon outer = inner;
  if (config.extension_distance > 0) {
    std::vector<Point2> all(inner.begin(), inner.end());
    all.insert(all.end(), locations.begin(), locations.end());
    outer = geometry::offset_convex(geometry::convex_hull(all, false), config.extension_distance);
  }
  for (const auto& p : outer) grow_scale(p);

  double cx = 0, cy = 0, radius = 0;
  {
    double minx = outer[0].x, maxx = outer[0].x, miny = outer[0].y, maxy = outer[0].y;
    for (const auto& p : outer) {
      minx = std::min(minx, p.x);
      maxx = std::max(maxx, p.x);
      miny = std::min(miny, p.y);
      maxy = std::max(maxy, p.y);
    }
    cx = 0.5 * (minx + maxx);
    cy = 0.5 * (miny + maxy);
    radius = std::max(std::hypot(maxx - minx, maxy - miny), 1e-12);
  }

  Refiner refiner(outer, inner, radius, config);
  refiner.init_super(cx, cy, radius);

  auto add_loop = [&](const Polygon& poly, double max_len) {
    const auto flags = corner_flags(poly);
    std::vector<int> corner_ids;
    for (std::size_t i = 0; i < poly.size(); ++i) corner_ids.push_back(refiner.add_vertex(poly[i], flags[i] != 0));
    std::vector<int> ids;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point2 a = poly[i], b = poly[(i + 1) % poly.size()];
      const auto pieces = subdivide_edge(a, b, max_len);
      ids.push_back(corner_ids[i]);
      for (std::size_t k = 1; k < pieces.size(); ++k) ids.push_back(refiner.add_vertex(pieces[k], false));
    }
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (std::size_t i = 0; i < ids.size(); ++i) refiner.add_segment(ids[i], ids[(i + 1) % ids.size()]);
  };

  const bool has_ring = config.extension_distance > 0;
  if (has_ring) add_loop(outer, config.max_edge_outer);
  add_loop(inner, config.max_edge_inner);
  for (const auto& p : locations) refiner.add_vertex(p, false);

  refiner.recover_segments();
  refiner.refine();

  Mesh mesh = refiner.extract();
  mesh.boundary_loops = boundary_loops_of(mesh);
  validate_mesh(mesh);
  return mesh;
}

}  // namespace spdekit
