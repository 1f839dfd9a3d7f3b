#include <sstream>

#include <gtest/gtest.h>

#include "common.hpp"
#include "spdekit/error.hpp"
#include "spdekit/sparse.hpp"

using namespace spdekit;

TEST(Sparse, TripletsSumDuplicatesAndKeepZeros) {
  std::vector<Triplet> t{{0, 0, 1.0}, {0, 0, 2.0}, {1, 0, 0.0}, {1, 1, 4.0}};
  auto m = SparseMatrix::from_triplets(2, 2, t);
  EXPECT_EQ(m.nnz(), 3u);
  EXPECT_EQ(m.coeff(0, 0), 3.0);
  EXPECT_TRUE(m.stores(1, 0));
  EXPECT_FALSE(m.stores(0, 1));
  EXPECT_EQ(m.coeff(0, 1), 0.0);
}

TEST(Sparse, DenseRoundTripAndProducts) {
  Eigen::MatrixXd a = test::random_spd(12, 1);
  Eigen::MatrixXd b = test::random_spd(12, 2);
  auto sa = SparseMatrix::from_dense(a), sb = SparseMatrix::from_dense(b);
  EXPECT_EQ(sa.to_dense(), a);
  EXPECT_LT((multiply(sa, sb).to_dense() - a * b).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((add(sa, sb, 2.0, -1.0).to_dense() - (2 * a - b)).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::VectorXd x = test::random_vector(12, 3);
  EXPECT_LT((sa.multiply(x) - a * x).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((sa.transpose_multiply(x) - a.transpose() * x).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(quadratic_form(sa, x), x.dot(a * x), 1e-10);
}

TEST(Sparse, GramIsExactlySymmetric) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-1, 1);
  std::vector<Triplet> t;
  for (int k = 0; k < 40; ++k) t.push_back({static_cast<Index>(rng() % 15), static_cast<Index>(rng() % 9), U(rng)});
  auto a = SparseMatrix::from_triplets(15, 9, t);
  auto g = gram(a);
  EXPECT_TRUE(g.is_symmetric());
  EXPECT_LT((g.to_dense() - a.to_dense().transpose() * a.to_dense()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Sparse, KroneckerMatchesDenseExactly) {
  Eigen::MatrixXd a(2, 2), b(3, 3);
  a << 2, -1, -1, 3;
  b << 1, 0.5, 0, 0.5, 2, -0.25, 0, -0.25, 4;
  auto k = kron(SparseMatrix::from_dense(a), SparseMatrix::from_dense(b));
  Eigen::MatrixXd d(6, 6);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) d.block(3 * i, 3 * j, 3, 3) = a(i, j) * b;
  EXPECT_EQ(k.to_dense(), d);
  EXPECT_EQ(k.nnz(), 4u * 7u);
}

TEST(Sparse, SubmatrixAndScaling) {
  Eigen::MatrixXd a = test::random_spd(8, 5);
  auto s = SparseMatrix::from_dense(a);
  std::vector<Index> keep{5, 1, 3};
  Eigen::MatrixXd sub = s.principal_submatrix(keep).to_dense();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(sub(i, j), a(keep[i], keep[j]));
  std::vector<double> l(8, 2.0), r(8, 0.5);
  EXPECT_EQ(scale_rows_cols(s, l, r).to_dense(), a);
  EXPECT_EQ(s.scaled(3.0).to_dense(), 3.0 * a);
}

TEST(Sparse, MatrixMarketRoundTrip) {
  auto s = SparseMatrix::from_dense(test::random_spd(20, 6));
  std::stringstream ss;
  write_matrix_market(ss, s);
  EXPECT_NE(ss.str().find("symmetric"), std::string::npos);
  auto back = read_matrix_market(ss);
  EXPECT_TRUE(back.same_pattern(s));
  EXPECT_EQ(back.to_dense(), s.to_dense());
}

TEST(Sparse, MatrixMarketRejectsGarbage) {
  std::stringstream ss("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n");
  EXPECT_THROW(read_matrix_market(ss), Error);
}
