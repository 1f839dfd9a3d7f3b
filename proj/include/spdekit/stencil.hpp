#pragma once

#include <Eigen/Core>

#include "spdekit/sparse.hpp"

namespace spdekit {

/// Regular M x N grid with spacing h; node (i, j) has index i * N + j.
struct Grid2D {
  Index rows = 3;
  Index cols = 3;
  double h = 1.0;
  bool periodic = true;

  void validate() const;
};

/// kappa^2 I + D with D the five-point Laplacian stencil (4/h^2 centre, -1/h^2
/// for the four neighbours) and periodic wrap-around.
SparseMatrix grid_operator_L1(const Grid2D& grid, double kappa);

/// L1^T (h^2 I)^-1 L1, the grid analogue of the alpha = 2 FEM precision.
SparseMatrix grid_precision(const Grid2D& grid, double kappa);

/// Central second difference (f[i-1] - 2 f[i] + f[i+1]) / h^2 at the interior
/// points. TooShort for fewer than 3 values.
Eigen::VectorXd second_derivative_1d(const Eigen::VectorXd& values, double h);

/// The tridiagonal (n-2) x n matrix of the same stencil.
SparseMatrix second_derivative_matrix(Index n, double h);

}  // namespace spdekit
