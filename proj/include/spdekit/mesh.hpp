#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "spdekit/sparse.hpp"

namespace spdekit {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

using Polygon = std::vector<Point2>;
using TriangleIndices = std::array<Index, 3>;

/// Planar triangulation. Triangles are counter-clockwise; boundary_loops lists
/// the outer boundary first (counter-clockwise), then any holes.
struct Mesh {
  std::vector<Point2> vertices;
  std::vector<TriangleIndices> triangles;
  std::vector<std::vector<Index>> boundary_loops;

  Index n_vertices() const { return static_cast<Index>(vertices.size()); }
  Index n_triangles() const { return static_cast<Index>(triangles.size()); }
  double triangle_area(Index t) const;
  Point2 centroid(Index t) const;
};

/// Throws InvalidArgument when an invariant fails: positive area, conforming
/// edges (each edge shared by at most two triangles with opposite
/// orientation, no hanging vertices on edges), every vertex used.
void validate_mesh(const Mesh& mesh);

struct MeshConfig {
  double max_edge_inner = 1.0;
  double max_edge_outer = 2.0;
  /// Width of the buffer ring around the data hull (or boundary polygon).
  double extension_distance = 0.0;
  /// Minimum triangle angle in degrees, 0 < min_angle < 35.
  double min_angle = 21.0;

  void validate() const;
  /// extension = range, inner edges range/5, outer edges range/2.
  static MeshConfig from_range_hint(double range);
};

/// Refined constrained Delaunay triangulation covering the data hull (or
/// `boundary`) plus an extension ring. Locations become mesh vertices.
Mesh build_mesh(std::span<const Point2> locations, const std::optional<Polygon>& boundary,
                const MeshConfig& config);

struct MeshQuality {
  Index n_vertices = 0;
  Index n_triangles = 0;
  double min_angle_deg = 0.0;
  double max_edge = 0.0;
  double mean_edge = 0.0;
  std::vector<double> edge_bin_edges;  // histogram bin boundaries, size bins+1
  std::vector<Index> edge_counts;       // unique edges per bin
};

MeshQuality mesh_quality(const Mesh& mesh, int bins = 10);

/// Smallest interior angle of triangle t, degrees.
double min_angle_deg(const Mesh& mesh, Index t);

/// Barycentric projection rows. Rows of locations outside the mesh are empty
/// and flagged.
struct ProjectionMatrix {
  SparseMatrix A;
  std::vector<bool> outside;
};

ProjectionMatrix projection_matrix(const Mesh& mesh, std::span<const Point2> locations);

/// Row vector (1 x n_vertices) whose entry j is the integral of the hat
/// function phi_j over `region` divided by the region area.
SparseMatrix areal_integration_row(const Mesh& mesh, const Polygon& region);

/// Point location over a fixed mesh.
class MeshLocator {
 public:
  explicit MeshLocator(const Mesh& mesh);

  struct Hit {
    Index triangle;
    std::array<double, 3> weights;
  };
  /// Barycentric coordinates >= -1e-10 count as inside; among several
  /// containing triangles the one with the lexicographically smallest sorted
  /// vertex triple wins.
  std::optional<Hit> locate(Point2 p) const;

 private:
  const Mesh& mesh_;
  double x0_ = 0, y0_ = 0, cell_ = 1;
  Index nx_ = 1, ny_ = 1;
  std::vector<Index> cell_start_;
  std::vector<Index> cell_tris_;
};

// Planar geometry helpers shared by the mesh, service and tests.
namespace geometry {

double cross(Point2 o, Point2 a, Point2 b);
double distance(Point2 a, Point2 b);
/// Signed area, positive for counter-clockwise.
double signed_area(std::span<const Point2> polygon);
/// Strict interior test by ray casting (boundary points may go either way).
bool point_in_polygon(Point2 p, std::span<const Point2> polygon);
double distance_to_segment(Point2 p, Point2 a, Point2 b);
double distance_to_boundary(Point2 p, std::span<const Point2> polygon);
bool is_simple(std::span<const Point2> polygon);
/// Counter-clockwise convex hull (Andrew's monotone chain). With
/// keep_collinear, points on hull edges are kept as hull vertices.
Polygon convex_hull(std::span<const Point2> points, bool keep_collinear = false);
/// Convex polygon offset outward by `distance`; arcs around corners are
/// replaced by circumscribed 16-gon pieces so every boundary point is at least
/// `distance` from the input.
Polygon offset_convex(const Polygon& convex_ccw, double distance);

}  // namespace geometry

}  // namespace spdekit
