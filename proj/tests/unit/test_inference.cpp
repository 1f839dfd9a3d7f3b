#include <cmath>
#include <fstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "common.hpp"
#include "spdekit/error.hpp"
#include "spdekit/inference.hpp"

using namespace spdekit;

namespace {

nlohmann::json load(const std::string& name) {
  std::ifstream in(test::fixture(name));
  return nlohmann::json::parse(in);
}

PrecisionModel dense_structure(const Eigen::MatrixXd& q) {
  PrecisionModel m;
  m.Q = SparseMatrix::from_dense(q);
  return m;
}

std::shared_ptr<LatentModel> poisson3_model() {
  const auto fx = load("mcmc_poisson3.json");
  auto m = std::make_shared<LatentModel>();
  m->likelihood = Likelihood::poisson;
  const auto y = fx["y"].get<std::vector<double>>();
  m->y = Eigen::Map<const Eigen::VectorXd>(y.data(), 3);
  Eigen::Matrix3d r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = fx["structure"][i][j];
  m->components.push_back(scaled_structure_component("u", dense_structure(r), SparseMatrix::identity(3),
                                                     PcPrecisionPrior{fx["pc_precision"]["U"], fx["pc_precision"]["alpha"]}));
  return m;
}

// n observations of m latent nodes, fixed prior precision and noise.
LatentModel gaussian_toy(int n_latent, int n_obs, std::uint64_t seed, const Eigen::MatrixXd& q, double noise_prec) {
  LatentModel m;
  std::vector<Triplet> t;
  for (int i = 0; i < n_obs; ++i) {
    t.push_back({i, static_cast<Index>((3 * i) % n_latent), 0.6});
    t.push_back({i, static_cast<Index>((3 * i + 1) % n_latent), 0.4});
  }
  m.y = test::random_vector(n_obs, seed);
  m.components.push_back(fixed_structure_component("x", dense_structure(q),
                                                   SparseMatrix::from_triplets(n_obs, n_latent, t), 1.0));
  m.noise_log_precision_fixed = std::log(noise_prec);
  return m;
}

double direct_log_marginal(const LatentModel& m, const Eigen::MatrixXd& q, double noise_prec) {
  const Eigen::MatrixXd A = m.components[0].A.to_dense();
  const Eigen::MatrixXd S = A * q.inverse() * A.transpose() +
                            Eigen::MatrixXd::Identity(A.rows(), A.rows()) / noise_prec;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
  const double logdet = ldlt.vectorD().array().log().sum();
  return -0.5 * A.rows() * std::log(2 * M_PI) - 0.5 * logdet - 0.5 * m.y.dot(ldlt.solve(m.y));
}

}  // namespace

TEST(Laplace, ConjugateNormalNormal) {
  LatentModel m;
  m.y = Eigen::VectorXd::Constant(1, 0.7);
  m.components.push_back(fixed_structure_component("x", dense_structure(Eigen::MatrixXd::Constant(1, 1, 1.0)),
                                                   SparseMatrix::identity(1), 2.0));
  m.noise_log_precision_fixed = std::log(3.0);
  const double v = 1.0 / 2.0 + 1.0 / 3.0;
  const double expect = -0.5 * std::log(2 * M_PI * v) - 0.5 * 0.49 / v;
  EXPECT_NEAR(log_posterior_theta(m, Eigen::VectorXd(0)), expect, 1e-10);
  const auto post = latent_posterior(m, Eigen::VectorXd(0));
  EXPECT_NEAR(post.mean[0], 3.0 * 0.7 / (2.0 + 3.0), 1e-12);
}

TEST(Laplace, GaussianMatchesDirectMarginalLikelihood) {
  const Eigen::MatrixXd q = test::random_spd(12, 4);
  const LatentModel m = gaussian_toy(12, 8, 5, q, 2.5);
  EXPECT_NEAR(log_posterior_theta(m, Eigen::VectorXd(0)), direct_log_marginal(m, q, 2.5), 1e-8);

  const Eigen::MatrixXd A = m.components[0].A.to_dense();
  const Eigen::MatrixXd Qp = q + 2.5 * A.transpose() * A;
  const Eigen::VectorXd mean = Qp.ldlt().solve(2.5 * A.transpose() * m.y);
  EXPECT_LT((latent_posterior(m, Eigen::VectorXd(0)).mean - mean).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Laplace, InvariantUnderLatentPermutation) {
  const int n = 10;
  const Eigen::MatrixXd q = test::random_spd(n, 6);
  LatentModel a = gaussian_toy(n, 7, 8, q, 1.5);
  Eigen::PermutationMatrix<Eigen::Dynamic> p(n);
  for (int i = 0; i < n; ++i) p.indices()[i] = (7 * i + 3) % n;
  LatentModel b = a;
  const Eigen::MatrixXd qp = p * q * p.transpose();
  const Eigen::MatrixXd Ap = a.components[0].A.to_dense() * p.transpose();
  b.components[0] = fixed_structure_component("x", dense_structure(qp), SparseMatrix::from_dense(Ap), 1.0);
  EXPECT_NEAR(log_posterior_theta(a, Eigen::VectorXd(0)), log_posterior_theta(b, Eigen::VectorXd(0)), 1e-12);
}

TEST(Laplace, PoissonSingleObservationAgainstQuadrature) {
  const auto ref = load("reference_values.json");
  double prev = 1;
  for (const auto& r : ref["poisson1"]) {
    const double prec = r["precision"];
    LatentModel m;
    m.likelihood = Likelihood::poisson;
    m.y = Eigen::VectorXd::Constant(1, r["y"].get<double>());
    m.components.push_back(fixed_structure_component("eta", dense_structure(Eigen::MatrixXd::Constant(1, 1, 1.0)),
                                                     SparseMatrix::identity(1), prec));
    const double err = std::abs(log_posterior_theta(m, Eigen::VectorXd(0)) - r["log_marginal"].get<double>());
    EXPECT_LT(err, 0.01) << "precision " << prec;
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(Fit, PoissonThreeNodesAgainstMcmc) {
  const auto fx = load("mcmc_poisson3.json");
  const FitResult r = fit(poisson3_model(), Strategy::grid);
  ASSERT_EQ(r.latent_mean.size(), 3);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(r.latent_mean[i], fx["latent_mean"][i].get<double>(), 0.05);
  double wsum = 0;
  for (const auto& p : r.points) wsum += p.weight;
  EXPECT_NEAR(wsum, 1.0, 1e-12);
  EXPECT_GT(r.points.size(), 1u);
}

TEST(Fit, SinglePointGridEqualsEmpiricalBayes) {
  const auto model = poisson3_model();
  const FitResult eb = fit(model, Strategy::eb);
  GridConfig g;
  g.max_steps = 0;
  g.drop = std::numeric_limits<double>::infinity();
  const FitResult grid = fit(model, Strategy::grid, g);
  ASSERT_EQ(grid.points.size(), 1u);
  EXPECT_EQ(grid.theta_mode, eb.theta_mode);
  EXPECT_EQ(grid.latent_mean, eb.latent_mean);
  EXPECT_EQ(grid.latent_sd, eb.latent_sd);
}

TEST(Fit, NelderMeadOnQuadratic) {
  auto f = [](const Eigen::VectorXd& x) { return (x[0] - 1) * (x[0] - 1) + 3 * (x[1] + 2) * (x[1] + 2) + x[0] * x[1]; };
  const auto r = nelder_mead(f, Eigen::Vector2d(0, 0));
  EXPECT_TRUE(r.converged);
  Eigen::Matrix2d H;
  H << 2, 1, 1, 6;
  const Eigen::Vector2d opt = H.ldlt().solve(Eigen::Vector2d(2, -12));
  EXPECT_NEAR(r.x[0], opt[0], 1e-5);
  EXPECT_NEAR(r.x[1], opt[1], 1e-5);
  const Eigen::MatrixXd fd = finite_difference_hessian(f, r.x);
  EXPECT_LT((fd - H).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Predict, GaussianMeansQuantilesAndDeterminism) {
  auto m = std::make_shared<LatentModel>();
  const int n = 15;
  const Eigen::MatrixXd q = test::random_spd(n, 2);
  *m = gaussian_toy(n, 12, 3, q, 4.0);
  m->noise_log_precision_fixed.reset();
  m->components[0] = scaled_structure_component("x", dense_structure(q), m->components[0].A, PcPrecisionPrior{});
  const FitResult r = fit(m, Strategy::eb);
  const auto post = latent_posterior(*m, r.theta_mode);
  const SparseMatrix Anew = SparseMatrix::identity(n);
  const PredictSummary s = predict(r, Anew, 10000, 17);
  const Eigen::VectorXd sd = marginal_variances(post).cwiseSqrt();
  for (int i = 0; i < n; ++i) {
    EXPECT_NEAR(s.mean[i], post.mean[i], 3 * sd[i] / std::sqrt(10000.0));
    for (int k = 0; k + 1 < 5; ++k) EXPECT_LE(s.quantiles(i, k), s.quantiles(i, k + 1));
  }
  const PredictSummary again = predict(r, Anew, 10000, 17);
  EXPECT_EQ(again.draws, s.draws);
}

TEST(Predict, TinyNoiseReproducesObservations) {
  auto m = std::make_shared<LatentModel>();
  const int n = 6;
  m->y = test::random_vector(n, 9);
  m->components.push_back(fixed_structure_component("x", dense_structure(Eigen::MatrixXd::Identity(n, n)),
                                                    SparseMatrix::identity(n), 1.0));
  m->noise_log_precision_fixed = std::log(1e8);
  const FitResult r = fit(m, Strategy::eb);
  const PredictSummary s = predict(r, SparseMatrix::identity(n), 2000, 1);
  for (int i = 0; i < n; ++i) EXPECT_LE(std::abs(s.mean[i] - m->y[i]), 2 * s.sd[i] + 1e-3);
}

TEST(Model, ValidationErrors) {
  LatentModel m;
  m.likelihood = Likelihood::poisson;
  m.y = Eigen::Vector2d(1.5, 2);
  m.components.push_back(fixed_structure_component("x", dense_structure(Eigen::MatrixXd::Identity(2, 2)),
                                                   SparseMatrix::identity(2), 1.0));
  EXPECT_THROW(m.validate(), Error);
  m.y = Eigen::Vector2d(1, 2);
  m.validate();
  m.y = Eigen::Vector3d(1, 2, 3);
  EXPECT_THROW(m.validate(), Error);
  EXPECT_THROW(parse_strategy("nested"), Error);
}
