#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spdekit/sparse.hpp"

namespace spdekit {

/// Gaussian model x ~ N(mean, Q^-1) subject to constraints * x = constraint_values.
///
/// An intrinsic model has a non-empty null_basis (n x r, columns spanning the
/// null space of Q) and then needs exactly r constraints with
/// constraints * null_basis invertible.
struct PrecisionModel {
  SparseMatrix Q;
  Eigen::VectorXd mean;               // empty means zero
  Eigen::MatrixXd constraints;        // k x n, empty when unconstrained
  Eigen::VectorXd constraint_values;  // k, empty means zero
  Eigen::MatrixXd null_basis;         // n x r, empty for proper models
  std::string label;
  std::vector<std::string> notes;

  Index size() const { return Q.rows(); }
  bool intrinsic() const { return null_basis.cols() > 0; }
  bool constrained() const { return constraints.rows() > 0; }
  Eigen::VectorXd mean_or_zero() const;
  Eigen::VectorXd constraint_rhs() const;
  /// Checks shapes and the constraint/null-space pairing.
  void validate() const;
};

/// Sparse Cholesky factor of a precision model with constraint handling.
///
/// Proper models are factorized directly (P Q P^T = L L^T, approximate minimum
/// degree ordering); constraints are applied by conditioning by kriging.
/// Intrinsic models are deflated: r well-conditioned nodes are pinned, the
/// reduced precision is factorized, and draws/moments are projected onto the
/// constraint set along the null space.
class Factorization {
 public:
  explicit Factorization(const PrecisionModel& model);
  ~Factorization();
  Factorization(Factorization&&) noexcept;
  Factorization& operator=(Factorization&&) noexcept;

  const PrecisionModel& model() const;
  Index size() const;

  /// log det Q for proper models; for intrinsic models the log pseudo-determinant
  /// restricted to the pinned complement.
  double log_determinant() const;

  /// Proper models: Q^-1 b. Intrinsic models: the constrained covariance
  /// applied to b.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

  /// Mean after enforcing the constraints.
  Eigen::VectorXd constrained_mean() const;

  /// n x n_draws matrix of draws; every column satisfies the constraints.
  Eigen::MatrixXd sample(int n_draws, std::uint64_t seed) const;
  /// Draws from caller-provided standard normal columns (n x m).
  Eigen::MatrixXd sample_from_normals(const Eigen::MatrixXd& z) const;

  /// Log density on the constrained subspace (plain Gaussian density when
  /// unconstrained).
  double log_density(const Eigen::VectorXd& x) const;

  /// Diagonal of the (constrained) covariance via Takahashi recursions.
  Eigen::VectorXd marginal_variances() const;

  /// Fill-reducing permutation (perm[i] = position of variable i) and factor.
  std::vector<Index> permutation() const;
  SparseMatrix factor_l() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Convenience wrappers.
Factorization factorize(const PrecisionModel& model);
double log_density(const PrecisionModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd marginal_variances(const PrecisionModel& model);

/// Posterior of x given y = A x + noise, noise ~ N(0, I / noise_precision).
PrecisionModel condition_gaussian(const PrecisionModel& prior, const SparseMatrix& A,
                                  const Eigen::VectorXd& y, double noise_precision);

/// Diagonal of (L L^T)^-1 for a lower-triangular CSC factor (diagonal stored
/// first in each column), by Takahashi recursions over the factor pattern.
Eigen::VectorXd takahashi_diagonal(const Eigen::SparseMatrix<double, Eigen::ColMajor, int>& L);

}  // namespace spdekit
