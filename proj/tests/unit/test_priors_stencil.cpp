#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "spdekit/error.hpp"
#include "spdekit/priors.hpp"
#include "spdekit/stencil.hpp"

using namespace spdekit;

TEST(Priors, PcPrecisionCalibration) {
  const PcPrecisionPrior p{1.16, 0.01};
  EXPECT_DOUBLE_EQ(p.lambda(), -std::log(0.01) / 1.16);
  EXPECT_NEAR(p.lambda(), 3.9700, 1e-4);
  EXPECT_NEAR(pc_alpha_from_lambda(p.lambda(), 1.16), 0.01, 1e-14);
  // tau = s^-2 maps P(s > U) to P(tau < U^-2)
  boost::math::quadrature::tanh_sinh<double> ts;
  const double tail = ts.integrate([&](double t) { return std::exp(pc_precision_logdensity(t, p)); }, 0.0,
                                   1.0 / (1.16 * 1.16));
  EXPECT_NEAR(tail, 0.01, 1e-6);
  boost::math::quadrature::exp_sinh<double> es;
  const double total = es.integrate([&](double t) { return std::exp(pc_precision_logdensity(t, p)); }, 0.0,
                                    std::numeric_limits<double>::infinity());
  EXPECT_NEAR(total, 1.0, 1e-4);
  EXPECT_THROW(pc_precision_logdensity(0.0, p), Error);
}

TEST(Priors, RangeSigmaTailsAndShrinkage) {
  const PcRangeSigmaPrior p{2.0, 0.05, 1.5, 0.1};
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  const double inf = std::numeric_limits<double>::infinity();
  // the joint density factorizes; integrate one margin with the other fixed
  const double s_fix = 1.0, r_fix = 3.0;
  auto joint = [&](double r, double s) { return std::exp(pc_range_sigma_logdensity(r, s, p)); };
  const double r_norm = es.integrate([&](double r) { return joint(r, s_fix); }, 0.0, inf);
  const double r_tail = ts.integrate([&](double r) { return joint(r, s_fix); }, 0.0, 2.0) / r_norm;
  EXPECT_NEAR(r_tail, 0.05, 1e-6);
  const double s_norm = es.integrate([&](double s) { return joint(r_fix, s); }, 0.0, inf);
  const double s_tail = es.integrate([&](double s) { return joint(r_fix, s); }, 1.5, inf) / s_norm;
  EXPECT_NEAR(s_tail, 0.1, 1e-6);
  EXPECT_NEAR(r_norm * s_norm / joint(r_fix, s_fix), 1.0, 1e-4);

  EXPECT_GT(pc_range_sigma_logdensity(3, 0.5, p), pc_range_sigma_logdensity(3, 1.0, p));
  EXPECT_GT(pc_range_sigma_logdensity(3, 1.0, p), pc_range_sigma_logdensity(3, 2.0, p));
  const PcRangeSigmaPrior wide{4.0, 0.05, 1.5, 0.1};
  EXPECT_GT(wide.lambda_r(), p.lambda_r());
  EXPECT_THROW(pc_range_sigma_logdensity(-1, 1, p), Error);
}

TEST(Priors, MarginalSdRuleOfThumb) {
  const double U = 1.0;
  const PcPrecisionPrior p{U, 0.01};
  std::mt19937_64 rng(31);
  std::exponential_distribution<double> sd(p.lambda());
  std::normal_distribution<double> z;
  const int n = 200000;
  double s2 = 0;
  for (int k = 0; k < n; ++k) {
    const double u = sd(rng) * z(rng);
    s2 += u * u;
  }
  EXPECT_NEAR(std::sqrt(s2 / n), 0.31 * U, 0.031 * U);
}

TEST(Stencil, GridOperator) {
  const Grid2D g{3, 3, 1.0, true};
  const auto l0 = grid_operator_L1(g, 0.0);
  EXPECT_LT(l0.row_sums().cwiseAbs().maxCoeff(), 1e-15);
  const auto l1 = grid_operator_L1(g, 1.0);
  for (double d : l1.diagonal_values()) EXPECT_EQ(d, 5.0);
  EXPECT_TRUE(l1.is_symmetric());

  const Grid2D g4{4, 4, 1.0, true};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(grid_operator_L1(g4, 0.0).to_dense());
  EXPECT_NEAR(es.eigenvalues()[0], 0.0, 1e-12);
  EXPECT_GT(es.eigenvalues()[1], 1e-6);
  EXPECT_LT((es.eigenvectors().col(0).cwiseAbs().array() - 0.25).abs().maxCoeff(), 1e-12);
  EXPECT_EQ(grid_precision(g4, 1.0).rows(), 16);
  EXPECT_THROW((Grid2D{2, 3, 1.0, true}.validate()), Error);
}

TEST(Stencil, LaplacianConvergesAtSecondOrder) {
  // f(x, y) = sin(x) on a periodic 2 pi grid, D f = sin(x) exactly in the limit
  double prev = 0;
  for (int n : {32, 64}) {
    const double h = 2 * M_PI / n;
    const Grid2D g{n, n, h, true};
    Eigen::VectorXd f(n * n), expect(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        f[i * n + j] = std::sin(j * h);
        expect[i * n + j] = std::sin(j * h);
      }
    const double err = (grid_operator_L1(g, 0.0).multiply(f) - expect).cwiseAbs().maxCoeff();
    if (prev > 0) EXPECT_NEAR(prev / err, 4.0, 0.1);
    prev = err;
  }
}

TEST(Stencil, SecondDerivative1d) {
  const double h = 0.1;
  const int n = 101;
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i) f[i] = 5 * (i * h) * (i * h) + std::sin(15 * i * h);
  const Eigen::VectorXd g = second_derivative_1d(f, h);
  ASSERT_EQ(g.size(), n - 2);
  const double bound = 225 * (15 * h) * (15 * h) / 12;
  for (int i = 1; i + 1 < n; ++i) EXPECT_LE(std::abs(g[i - 1] - (10 - 225 * std::sin(15 * i * h))), bound);

  Eigen::VectorXd lin(5), quad(5);
  for (int i = 0; i < 5; ++i) {
    lin[i] = 3 - 2.0 * i;
    quad[i] = double(i * i);
  }
  EXPECT_LT(second_derivative_1d(lin, 1.0).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(second_derivative_1d(quad, 1.0), Eigen::VectorXd::Constant(3, 2.0));
  EXPECT_LT((second_derivative_matrix(n, h).multiply(f) - g).cwiseAbs().maxCoeff(), 1e-9);
  try {
    second_derivative_1d(Eigen::VectorXd::Ones(2), h);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooShort);
  }
}
