#include <cmath>

#include "spdekit/error.hpp"
#include "spdekit/stencil.hpp"

namespace spdekit {

void Grid2D::validate() const {
  require(rows >= 3 && cols >= 3, ErrorKind::InvalidArgument, "grid needs at least 3 rows and 3 columns");
  require(h > 0 && std::isfinite(h), ErrorKind::InvalidArgument, "grid spacing must be positive");
  require(periodic, ErrorKind::InvalidArgument, "only periodic boundaries are implemented");
}

SparseMatrix grid_operator_L1(const Grid2D& grid, double kappa) {
  grid.validate();
  require(std::isfinite(kappa) && kappa >= 0, ErrorKind::InvalidArgument, "kappa must be >= 0");
  const Index M = grid.rows, N = grid.cols;
  const double inv_h2 = 1.0 / (grid.h * grid.h);
  const double centre = kappa * kappa + 4.0 * inv_h2;
  std::vector<Triplet> trip;
  trip.reserve(5 * static_cast<std::size_t>(M) * N);
  for (Index i = 0; i < M; ++i)
    for (Index j = 0; j < N; ++j) {
      const Index a = i * N + j;
      trip.push_back({a, a, centre});
      trip.push_back({a, ((i + M - 1) % M) * N + j, -inv_h2});
      trip.push_back({a, ((i + 1) % M) * N + j, -inv_h2});
      trip.push_back({a, i * N + (j + N - 1) % N, -inv_h2});
      trip.push_back({a, i * N + (j + 1) % N, -inv_h2});
    }
  return SparseMatrix::from_triplets(M * N, M * N, trip);
}

SparseMatrix grid_precision(const Grid2D& grid, double kappa) {
  const SparseMatrix L = grid_operator_L1(grid, kappa);
  return gram(L).scaled(1.0 / (grid.h * grid.h));
}

Eigen::VectorXd second_derivative_1d(const Eigen::VectorXd& values, double h) {
  require(values.size() >= 3, ErrorKind::TooShort, "need at least 3 values");
  require(h > 0 && std::isfinite(h), ErrorKind::InvalidArgument, "spacing must be positive");
  const Index n = static_cast<Index>(values.size());
  Eigen::VectorXd out(n - 2);
  const double inv_h2 = 1.0 / (h * h);
  for (Index i = 1; i + 1 < n; ++i) out[i - 1] = ((values[i - 1] - 2.0 * values[i]) + values[i + 1]) * inv_h2;
  return out;
}

SparseMatrix second_derivative_matrix(Index n, double h) {
  require(n >= 3, ErrorKind::TooShort, "need at least 3 points");
  const double inv_h2 = 1.0 / (h * h);
  std::vector<Triplet> trip;
  for (Index r = 0; r + 2 < n; ++r) {
    trip.push_back({r, r, inv_h2});
    trip.push_back({r, r + 1, -2.0 * inv_h2});
    trip.push_back({r, r + 2, inv_h2});
  }
  return SparseMatrix::from_triplets(n - 2, n, trip);
}

}  // namespace spdekit
