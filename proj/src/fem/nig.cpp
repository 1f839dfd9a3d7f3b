#include <cmath>
#include <random>

#include "spdekit/error.hpp"
#include "spdekit/fem.hpp"

namespace spdekit {
namespace {

SparseMatrix operator_k(const FemMatrices& fem, double kappa) {
  const Index n = fem.C.rows();
  Eigen::VectorXd kc = (kappa * kappa) * fem.c;
  return add(SparseMatrix::diagonal(std::span<const double>(kc.data(), n)), fem.G);
}

}  // namespace

double draw_inverse_gaussian(double mean, double shape, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double nu = normal(rng);
  const double y = nu * nu;
  const double my = mean * y;
  const double x = mean + mean * my / (2.0 * shape) - mean / (2.0 * shape) * std::sqrt(4.0 * shape * my + my * my);
  const double u = uniform(rng);
  return u <= mean / (mean + x) ? x : mean * mean / x;
}

Eigen::VectorXd nig_field(const FemMatrices& fem, const SpdeParams& params, double mu, const Eigen::VectorXd& v,
                          const Eigen::VectorXd& z) {
  const Index n = fem.C.rows();
  require(v.size() == n && z.size() == n, ErrorKind::DimensionMismatch, "v and z must have one entry per node");
  PrecisionModel k;
  k.Q = operator_k(fem, params.kappa());
  Factorization solver(k);
  Eigen::VectorXd rhs(n);
  for (Index i = 0; i < n; ++i) rhs[i] = mu * (v[i] - fem.c[i]) + std::sqrt(v[i]) * z[i];
  return solver.solve(rhs) / params.tau();
}

NigDraw simulate_nig(const Mesh& mesh, const SpdeParams& params, double mu, double gamma, std::uint64_t seed) {
  params.validate();
  require(params.alpha == 2, ErrorKind::InvalidArgument, "NIG simulation is defined for alpha = 2");
  require(gamma > 0 && std::isfinite(gamma), ErrorKind::InvalidArgument, "gamma must be positive");
  require(std::isfinite(mu), ErrorKind::InvalidArgument, "mu must be finite");
  const FemMatrices fem = fem_matrices(mesh);
  const Index n = mesh.n_vertices();
  std::mt19937_64 rng(seed);
  NigDraw out;
  out.v.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double h = fem.c[i];
    out.v[i] = draw_inverse_gaussian(h, gamma * gamma * h * h, rng);
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (Index i = 0; i < n; ++i) z[i] = normal(rng);
  out.u = nig_field(fem, params, mu, out.v, z);
  return out;
}

}  // namespace spdekit
