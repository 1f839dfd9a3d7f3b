#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "spdekit/areal.hpp"
#include "spdekit/mesh.hpp"
#include "spdekit/sparse.hpp"

namespace spdekit::test {

inline std::string fixture(const std::string& name) { return std::string(SPDEKIT_FIXTURES) + "/" + name; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("spdekit_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

/// Banded SPD matrix B^T B + 0.1 I with a few long-range couplings.
inline Eigen::MatrixXd random_spd(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    B(i, i) = 2 + std::abs(N(rng));
    if (i + 1 < n) B(i, i + 1) = 0.5 * N(rng);
    if (i + 7 < n) B(i, i + 7) = 0.3 * N(rng);
  }
  return B.transpose() * B + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

inline Eigen::VectorXd random_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = N(rng);
  return v;
}

inline AdjacencyGraph path_graph(Index n) {
  AdjacencyGraph g;
  g.n = n;
  g.nb.resize(n);
  for (Index i = 0; i + 1 < n; ++i) {
    g.nb[i].push_back(i + 1);
    g.nb[i + 1].push_back(i);
  }
  for (auto& l : g.nb) std::sort(l.begin(), l.end());
  return g;
}

inline AdjacencyGraph complete_graph(Index n) {
  AdjacencyGraph g;
  g.n = n;
  g.nb.resize(n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j) g.nb[i].push_back(j);
  return g;
}

inline Mesh unit_triangle() {
  Mesh m;
  m.vertices = {{0, 0}, {1, 0}, {0, 1}};
  m.triangles = {{0, 1, 2}};
  m.boundary_loops = {{0, 1, 2}};
  return m;
}

inline Mesh square_mesh(double side, double max_edge, double extension = 0.0) {
  std::vector<Point2> corners{{0, 0}, {side, 0}, {side, side}, {0, side}};
  MeshConfig c;
  c.max_edge_inner = max_edge;
  c.max_edge_outer = std::max(max_edge, 2 * max_edge);
  c.extension_distance = extension;
  return build_mesh(corners, std::nullopt, c);
}

/// Generalized inverse restricted to the orthogonal complement of the null
/// space spanned by `null_basis`.
inline Eigen::MatrixXd constrained_pinv(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& null_basis) {
  Eigen::MatrixXd N = null_basis;
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(Q.rows(), Q.rows()) -
                      N * (N.transpose() * N).inverse() * N.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
  Eigen::VectorXd inv = es.eigenvalues();
  for (int i = 0; i < inv.size(); ++i) inv[i] = std::abs(inv[i]) > 1e-9 ? 1.0 / inv[i] : 0.0;
  return P * es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose() * P;
}

}  // namespace spdekit::test
