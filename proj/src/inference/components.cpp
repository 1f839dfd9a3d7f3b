#include <cmath>
#include <memory>

#include "spdekit/error.hpp"
#include "spdekit/inference.hpp"

namespace spdekit {
namespace {

PrecisionModel scaled_copy(const PrecisionModel& s, double tau) {
  PrecisionModel m = s;
  m.Q = s.Q.scaled(tau);
  return m;
}

SparseMatrix widen(const SparseMatrix& A, Index cols) {
  std::vector<Triplet> trip;
  trip.reserve(A.nnz());
  for (Index i = 0; i < A.rows(); ++i) {
    auto c = A.row_cols(i);
    auto v = A.row_values(i);
    for (std::size_t p = 0; p < c.size(); ++p) trip.push_back({i, c[p], v[p]});
  }
  return SparseMatrix::from_triplets(A.rows(), cols, trip);
}

}  // namespace

LatentComponent scaled_structure_component(std::string name, PrecisionModel structure, SparseMatrix A,
                                           PcPrecisionPrior prior, double log_tau_initial) {
  prior.validate();
  structure.validate();
  LatentComponent c;
  c.name = std::move(name);
  c.size = structure.size();
  c.A = std::move(A);
  c.theta_names = {"log_tau"};
  c.theta_initial = Eigen::VectorXd::Constant(1, log_tau_initial);
  auto s = std::make_shared<const PrecisionModel>(std::move(structure));
  c.build = [s](const Eigen::VectorXd& t) { return scaled_copy(*s, std::exp(t[0])); };
  c.log_prior = [prior](const Eigen::VectorXd& t) { return pc_precision_logdensity(std::exp(t[0]), prior) + t[0]; };
  return c;
}

LatentComponent fixed_structure_component(std::string name, PrecisionModel structure, SparseMatrix A, double tau) {
  require(tau > 0 && std::isfinite(tau), ErrorKind::NonPositivePrecision, "component precision must be positive");
  structure.validate();
  LatentComponent c;
  c.name = std::move(name);
  c.size = structure.size();
  c.A = std::move(A);
  c.theta_initial = Eigen::VectorXd(0);
  auto s = std::make_shared<const PrecisionModel>(scaled_copy(structure, tau));
  c.build = [s](const Eigen::VectorXd&) { return *s; };
  c.log_prior = [](const Eigen::VectorXd&) { return 0.0; };
  return c;
}

LatentComponent bym2_component(std::string name, const AdjacencyGraph& g, SparseMatrix A, PcPrecisionPrior tau_prior) {
  tau_prior.validate();
  g.validate();
  require(A.cols() == g.n, ErrorKind::DimensionMismatch, "BYM2 projection must have one column per region");
  LatentComponent c;
  c.name = std::move(name);
  c.size = 2 * g.n;
  c.A = widen(A, c.size);
  c.theta_names = {"log_tau", "logit_w"};
  c.theta_initial = Eigen::VectorXd::Zero(2);
  auto scaled = std::make_shared<const PrecisionModel>(scale_besag(besag_precision(g)));
  c.build = [scaled](const Eigen::VectorXd& t) {
    const double w = 1.0 / (1.0 + std::exp(-t[1]));
    return bym2_from_scaled(*scaled, std::exp(t[0]), w);
  };
  c.log_prior = [tau_prior](const Eigen::VectorXd& t) {
    const double w = 1.0 / (1.0 + std::exp(-t[1]));
    return pc_precision_logdensity(std::exp(t[0]), tau_prior) + t[0] + bym2_weight_logdensity_uniform(w) +
           std::log(w) + std::log1p(-w);
  };
  return c;
}

LatentComponent spde_component(std::string name, const Mesh& mesh, SparseMatrix A, PcRangeSigmaPrior prior, int alpha,
                               double range_initial, double sigma_initial) {
  prior.validate();
  require(alpha == 2 || alpha == 3, ErrorKind::InvalidArgument, "SPDE component supports alpha 2 or 3");
  require(sigma_initial > 0, ErrorKind::NonPositiveArgument, "initial sigma must be positive");
  LatentComponent c;
  c.name = std::move(name);
  c.size = static_cast<Index>(mesh.vertices.size());
  c.A = std::move(A);
  c.theta_names = {"log_range", "log_sigma"};
  c.theta_initial = Eigen::Vector2d(std::log(range_initial > 0 ? range_initial : prior.r0), std::log(sigma_initial));
  auto fem = std::make_shared<const FemMatrices>(fem_matrices(mesh));
  const double nu = alpha - 1.0;
  c.build = [fem, nu](const Eigen::VectorXd& t) {
    const SpdeParams p = to_spde(MaternParams{std::exp(t[0]), std::exp(t[1]), nu});
    PrecisionModel m;
    m.Q = spde_precision_matrix(*fem, p);
    m.label = "spde";
    return m;
  };
  c.log_prior = [prior](const Eigen::VectorXd& t) {
    return pc_range_sigma_logdensity(std::exp(t[0]), std::exp(t[1]), prior) + t[0] + t[1];
  };
  return c;
}

}  // namespace spdekit
