#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "spdekit/gmrf.hpp"
#include "spdekit/kernels.hpp"
#include "spdekit/mesh.hpp"
#include "spdekit/sparse.hpp"

namespace spdekit {

using Anisotropy = kernels::Tensor2;

/// Internal SPDE scales: (kappa^2 - div H grad)^(alpha/2) (tau u) = W.
struct SpdeParams {
  double log_kappa = 0.0;
  double log_tau = 0.0;
  int alpha = 2;

  double kappa() const;
  double tau() const;
  void validate() const;
};

/// Interpretable Matern parameters (range = distance with correlation ~0.13).
struct MaternParams {
  double range = 1.0;
  double sigma = 1.0;
  double nu = 1.0;

  void validate() const;
};

/// log tau(s) = basis_tau * theta_tau, log kappa(s) = basis_kappa * theta_kappa,
/// evaluated at mesh nodes (first basis column is the constant 1).
struct NonstatSpec {
  Eigen::MatrixXd basis_tau;
  Eigen::VectorXd theta_tau;
  Eigen::MatrixXd basis_kappa;
  Eigen::VectorXd theta_kappa;
};

struct BarrierSpec {
  std::vector<Index> barrier_triangles;
  double range_normal = 1.0;
  double range_fraction_in_barrier = 0.01;
};

/// Lumped mass C (diagonal) and stiffness G of a mesh.
struct FemMatrices {
  SparseMatrix C;
  SparseMatrix G;
  Eigen::VectorXd c;  // diagonal of C
};

SparseMatrix assemble_mass(const Mesh& mesh);
/// <grad phi_i, H grad phi_j>; H defaults to the identity. Throws
/// NonSpdAnisotropy when H is not symmetric positive definite.
SparseMatrix assemble_stiffness(const Mesh& mesh, const std::optional<Anisotropy>& H = std::nullopt);
FemMatrices fem_matrices(const Mesh& mesh, const std::optional<Anisotropy>& H = std::nullopt);

/// Q_alpha via the recursion Q1 = K, Q2 = K C^-1 K, Q_a = K C^-1 Q_{a-2} C^-1 K
/// with K = diag(kappa^2) C + G, scaled as diag(tau) Q_alpha diag(tau).
SparseMatrix spde_precision_matrix(const FemMatrices& fem, const SpdeParams& params,
                                   const NonstatSpec* nonstat = nullptr);

/// Builds the precision and (when probe is set) certifies it with a sparse
/// Cholesky factorization; NotPositiveDefinite on failure.
PrecisionModel assemble_precision(const Mesh& mesh, const SpdeParams& params, const NonstatSpec* nonstat = nullptr,
                                  const std::optional<Anisotropy>& H = std::nullopt, bool probe = true);

/// tau^2 (kappa^4 C + 2 kappa^2 G + G C^-1 G), the alpha = 2 closed form.
SparseMatrix precision_alpha2_closed_form(const FemMatrices& fem, const SpdeParams& params);

/// Barrier model: piecewise-constant range r_T (range_fraction * r inside the
/// barrier). Q = sigma^-2 K^T M^-1 K with K = sum_T (C_T + r_T^2/8 G_T) and
/// M = sum_T (pi r_T^2 / 2) C_T, which reduces to the stationary alpha = 2 model
/// with marginal standard deviation sigma when the barrier is empty.
PrecisionModel assemble_barrier_precision(const Mesh& mesh, const BarrierSpec& spec, double sigma,
                                          bool probe = true);

struct NigDraw {
  Eigen::VectorXd u;  // field coefficients at mesh nodes
  Eigen::VectorXd v;  // inverse-Gaussian mixing variables
};

/// Normal inverse-Gaussian driven alpha = 2 field:
/// v_i ~ IG(mean h_i, shape gamma^2 h_i^2), u = tau^-1 K^-1 (mu (v - h) + sqrt(v) z).
NigDraw simulate_nig(const Mesh& mesh, const SpdeParams& params, double mu, double gamma, std::uint64_t seed);

/// Same construction with caller-supplied v and standard normal z.
Eigen::VectorXd nig_field(const FemMatrices& fem, const SpdeParams& params, double mu, const Eigen::VectorXd& v,
                          const Eigen::VectorXd& z);

/// Inverse-Gaussian draw with the Michael-Schucany-Haas transform.
double draw_inverse_gaussian(double mean, double shape, std::mt19937_64& rng);

double matern_covariance(double d, const MaternParams& p);
double matern_correlation(double d, double range, double nu);

/// kappa = sqrt(8 nu) / range, nu = alpha - 1, tau chosen so the marginal
/// variance is sigma^2. Requires alpha >= 2.
SpdeParams to_spde(const MaternParams& m);
MaternParams to_matern(const SpdeParams& s);

}  // namespace spdekit
