#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

#include "spdekit/error.hpp"
#include "spdekit/gmrf.hpp"

namespace spdekit {
namespace {

using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Llt = Eigen::SimplicialLLT<EigenSparse, Eigen::Lower, Eigen::AMDOrdering<int>>;

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double logdet_spd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  require(llt.info() == Eigen::Success, ErrorKind::NotPositiveDefinite, "constraint Gram matrix is singular");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// Sparse Cholesky of an SPD matrix with the bookkeeping the model needs.
struct SparseCholesky {
  Llt llt;
  EigenSparse L;
  Eigen::VectorXi perm;  // perm[i] = position of variable i
  double logdet = 0.0;
  Index n = 0;

  explicit SparseCholesky(const SparseMatrix& q) : n(q.rows()) {
    require(q.square(), ErrorKind::DimensionMismatch, "precision must be square");
    if (n == 0) return;
    llt.compute(q.to_eigen());
    require(llt.info() == Eigen::Success, ErrorKind::NotPositiveDefinite,
            "precision matrix is not positive definite (Cholesky pivot <= 0)");
    L = llt.matrixL();
    L.makeCompressed();
    const auto d = L.diagonal();
    for (Index i = 0; i < n; ++i)
      require(std::isfinite(d[i]) && d[i] > 0, ErrorKind::NotPositiveDefinite,
              "precision matrix is not positive definite (Cholesky pivot <= 0)");
    logdet = 2.0 * d.array().log().sum();
    perm = llt.permutationP().indices();
  }

  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const {
    if (n == 0) return b;
    return llt.solve(b);
  }

  // L^-T z mapped back to the original ordering: covariance (L L^T)^-1 in P.
  Eigen::MatrixXd correlate(const Eigen::MatrixXd& z) const {
    Eigen::MatrixXd w = llt.matrixU().solve(z);
    return llt.permutationPinv() * w;
  }

  Eigen::VectorXd inverse_diagonal() const {
    if (n == 0) return {};
    const Eigen::VectorXd dperm = takahashi_diagonal(L);
    Eigen::VectorXd out(n);
    for (Index i = 0; i < n; ++i) out[i] = dperm[perm[i]];
    return out;
  }
};

Eigen::MatrixXd standard_normals(Index n, int draws, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd z(n, draws);
  for (int c = 0; c < draws; ++c)
    for (Index i = 0; i < n; ++i) z(i, c) = normal(rng);
  return z;
}

}  // namespace

Eigen::VectorXd PrecisionModel::mean_or_zero() const {
  return mean.size() == 0 ? Eigen::VectorXd::Zero(size()) : mean;
}

Eigen::VectorXd PrecisionModel::constraint_rhs() const {
  return constraint_values.size() == 0 ? Eigen::VectorXd::Zero(constraints.rows()) : constraint_values;
}

void PrecisionModel::validate() const {
  require(Q.square(), ErrorKind::DimensionMismatch, "precision must be square");
  const Index n = size();
  require(mean.size() == 0 || mean.size() == n, ErrorKind::DimensionMismatch, "mean length differs from Q");
  if (constrained())
    require(constraints.cols() == n, ErrorKind::DimensionMismatch, "constraint rows must have length n");
  require(constraint_values.size() == 0 || constraint_values.size() == constraints.rows(),
          ErrorKind::DimensionMismatch, "constraint values length differs from constraint count");
  if (intrinsic()) {
    require(null_basis.rows() == n, ErrorKind::DimensionMismatch, "null basis must have n rows");
    require(constraints.rows() == null_basis.cols(), ErrorKind::InvalidArgument,
            "intrinsic model needs one constraint per null-space dimension");
  }
}

struct Factorization::Impl {
  PrecisionModel model;
  Eigen::VectorXd mu;
  Eigen::VectorXd e;
  std::unique_ptr<SparseCholesky> chol;

  // intrinsic: pinned nodes and the free complement
  std::vector<Index> pinned, free;
  Eigen::MatrixXd G;        // N (A N)^-1
  double log_abs_det_an = 0.0, log_abs_det_ns = 0.0;

  // proper + constraints: V = Sigma A^T, W = A V
  Eigen::MatrixXd V;
  Eigen::LLT<Eigen::MatrixXd> W;
  Eigen::MatrixXd Wmat;

  double logdet_aat = 0.0;

  Eigen::MatrixXd sigma_pin(const Eigen::MatrixXd& b) const {
    Eigen::MatrixXd bf(static_cast<Index>(free.size()), b.cols());
    for (std::size_t k = 0; k < free.size(); ++k) bf.row(k) = b.row(free[k]);
    const Eigen::MatrixXd yf = chol->solve(bf);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(b.rows(), b.cols());
    for (std::size_t k = 0; k < free.size(); ++k) y.row(free[k]) = yf.row(k);
    return y;
  }

  Eigen::MatrixXd project(const Eigen::MatrixXd& y) const { return y - G * (model.constraints * y); }
};

Factorization::Factorization(const PrecisionModel& model) : impl_(std::make_unique<Impl>()) {
  model.validate();
  Impl& m = *impl_;
  m.model = model;
  m.mu = model.mean_or_zero();
  m.e = model.constraint_rhs();
  const Index n = model.size();
  const Eigen::MatrixXd& A = model.constraints;

  if (model.constrained()) {
    m.logdet_aat = logdet_spd(A * A.transpose());
  }

  if (model.intrinsic()) {
    const Eigen::MatrixXd& N = model.null_basis;
    const Index r = static_cast<Index>(N.cols());
    // pin the nodes where the null basis is best conditioned
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(N.transpose());
    std::vector<Index> pins;
    for (Index k = 0; k < r; ++k) pins.push_back(qr.colsPermutation().indices()[k]);
    std::sort(pins.begin(), pins.end());
    m.pinned = pins;
    std::vector<char> is_pinned(n, 0);
    for (Index p : pins) is_pinned[p] = 1;
    for (Index i = 0; i < n; ++i)
      if (!is_pinned[i]) m.free.push_back(i);
    m.chol = std::make_unique<SparseCholesky>(model.Q.principal_submatrix(m.free));

    Eigen::MatrixXd ns(r, r);
    for (Index k = 0; k < r; ++k) ns.row(k) = N.row(pins[k]);
    const Eigen::MatrixXd an = A * N;
    Eigen::FullPivLU<Eigen::MatrixXd> an_lu(an);
    Eigen::FullPivLU<Eigen::MatrixXd> ns_lu(ns);
    require(an_lu.isInvertible(), ErrorKind::InvalidArgument,
            "constraints do not determine the null-space component");
    require(ns_lu.isInvertible(), ErrorKind::NotPositiveDefinite, "null basis is rank deficient");
    m.G = N * an_lu.inverse();
    m.log_abs_det_an = an_lu.matrixLU().diagonal().array().abs().log().sum();
    m.log_abs_det_ns = ns_lu.matrixLU().diagonal().array().abs().log().sum();
    return;
  }

  m.chol = std::make_unique<SparseCholesky>(model.Q);
  if (model.constrained()) {
    m.V = m.chol->solve(A.transpose());
    m.Wmat = A * m.V;
    m.W.compute(m.Wmat);
    require(m.W.info() == Eigen::Success, ErrorKind::NotPositiveDefinite,
            "constraint covariance is singular (constraints not full rank)");
  }
}

Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

const PrecisionModel& Factorization::model() const { return impl_->model; }
Index Factorization::size() const { return impl_->model.size(); }

double Factorization::log_determinant() const { return impl_->chol->logdet; }

Eigen::VectorXd Factorization::solve(const Eigen::VectorXd& b) const {
  const Impl& m = *impl_;
  require(b.size() == size(), ErrorKind::DimensionMismatch, "right-hand side length differs from Q");
  if (m.model.intrinsic()) {
    const Eigen::MatrixXd pb = b - m.model.constraints.transpose() * (m.G.transpose() * b);
    return m.project(m.sigma_pin(pb));
  }
  return m.chol->solve(b);
}

Eigen::VectorXd Factorization::constrained_mean() const {
  const Impl& m = *impl_;
  if (!m.model.constrained()) return m.mu;
  const Eigen::VectorXd resid = m.model.constraints * m.mu - m.e;
  if (m.model.intrinsic()) return m.mu - m.G * resid;
  return m.mu - m.V * m.W.solve(resid);
}

Eigen::MatrixXd Factorization::sample_from_normals(const Eigen::MatrixXd& z) const {
  const Impl& m = *impl_;
  require(z.rows() == size(), ErrorKind::DimensionMismatch, "normal draws have the wrong length");
  const Eigen::VectorXd mc = constrained_mean();
  if (m.model.intrinsic()) {
    Eigen::MatrixXd zf(static_cast<Index>(m.free.size()), z.cols());
    for (std::size_t k = 0; k < m.free.size(); ++k) zf.row(k) = z.row(m.free[k]);
    const Eigen::MatrixXd yf = m.chol->correlate(zf);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(size(), z.cols());
    for (std::size_t k = 0; k < m.free.size(); ++k) y.row(m.free[k]) = yf.row(k);
    return m.project(y).colwise() + mc;
  }
  Eigen::MatrixXd x = m.chol->correlate(z);
  if (m.model.constrained()) x -= m.V * m.W.solve(m.model.constraints * x);
  return x.colwise() + mc;
}

Eigen::MatrixXd Factorization::sample(int n_draws, std::uint64_t seed) const {
  require(n_draws >= 0, ErrorKind::InvalidArgument, "number of draws must be >= 0");
  return sample_from_normals(standard_normals(size(), n_draws, seed));
}

double Factorization::log_density(const Eigen::VectorXd& x) const {
  const Impl& m = *impl_;
  require(x.size() == size(), ErrorKind::DimensionMismatch, "point length differs from Q");
  const Eigen::VectorXd d = x - m.mu;
  const double quad = quadratic_form(m.model.Q, d);
  const double n = static_cast<double>(size());
  if (m.model.intrinsic()) {
    const double r = static_cast<double>(m.pinned.size());
    return -0.5 * (n - r) * kLog2Pi + 0.5 * m.chol->logdet - 0.5 * quad + m.log_abs_det_an - m.log_abs_det_ns -
           0.5 * m.logdet_aat;
  }
  double lp = -0.5 * n * kLog2Pi + 0.5 * m.chol->logdet - 0.5 * quad;
  if (m.model.constrained()) {
    // density of x given A x = e, on the constraint subspace
    const Eigen::VectorXd de = m.e - m.model.constraints * m.mu;
    const double k = static_cast<double>(m.model.constraints.rows());
    const double log_w = 2.0 * m.W.matrixLLT().diagonal().array().log().sum();
    const double lpe = -0.5 * k * kLog2Pi - 0.5 * log_w - 0.5 * de.dot(m.W.solve(de));
    lp -= lpe + 0.5 * m.logdet_aat;
  }
  return lp;
}

Eigen::VectorXd Factorization::marginal_variances() const {
  const Impl& m = *impl_;
  const Index n = size();
  if (m.model.intrinsic()) {
    const Eigen::VectorXd df = m.chol->inverse_diagonal();
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < m.free.size(); ++k) d[m.free[k]] = df[static_cast<Index>(k)];
    const Eigen::MatrixXd& A = m.model.constraints;
    const Eigen::MatrixXd U = m.sigma_pin(A.transpose());
    const Eigen::MatrixXd BU = A * U;
    for (Index i = 0; i < n; ++i) {
      const auto g = m.G.row(i);
      d[i] += -2.0 * g.dot(U.row(i)) + g * BU * g.transpose();
    }
    return d.cwiseMax(0.0);
  }
  Eigen::VectorXd d = m.chol->inverse_diagonal();
  if (m.model.constrained()) {
    const Eigen::MatrixXd winv_vt = m.W.solve(m.V.transpose());
    for (Index i = 0; i < n; ++i) d[i] -= m.V.row(i).dot(winv_vt.col(i));
    d = d.cwiseMax(0.0);
  }
  return d;
}

std::vector<Index> Factorization::permutation() const {
  const auto& p = impl_->chol->perm;
  return {p.data(), p.data() + p.size()};
}

SparseMatrix Factorization::factor_l() const { return SparseMatrix::from_eigen(impl_->chol->L); }

Factorization factorize(const PrecisionModel& model) { return Factorization(model); }

double log_density(const PrecisionModel& model, const Eigen::VectorXd& x) {
  return Factorization(model).log_density(x);
}

Eigen::VectorXd marginal_variances(const PrecisionModel& model) {
  return Factorization(model).marginal_variances();
}

Eigen::VectorXd takahashi_diagonal(const EigenSparse& L) {
  const Index n = static_cast<Index>(L.cols());
  const int* cp = L.outerIndexPtr();
  const int* ri = L.innerIndexPtr();
  const double* lv = L.valuePtr();
  std::vector<double> sigma(static_cast<std::size_t>(L.nonZeros()), 0.0);

  // position of entry (row, col) with row >= col inside column col
  auto find = [&](Index row, Index col) {
    const int* b = ri + cp[col];
    const int* e = ri + cp[col + 1];
    const int* it = std::lower_bound(b, e, row);
    return static_cast<std::size_t>(it - ri);
  };
  auto entry = [&](Index a, Index b) { return sigma[find(std::max(a, b), std::min(a, b))]; };

  for (Index i = n - 1; i >= 0; --i) {
    const int begin = cp[i], end = cp[i + 1];
    const double lii = lv[begin];
    for (int p = end - 1; p > begin; --p) {
      const Index j = ri[p];
      double s = 0.0;
      for (int q = begin + 1; q < end; ++q) s += lv[q] * entry(ri[q], j);
      sigma[p] = -s / lii;
    }
    double s = 0.0;
    for (int q = begin + 1; q < end; ++q) s += lv[q] * sigma[q];
    sigma[begin] = (1.0 / lii - s) / lii;
  }
  Eigen::VectorXd d(n);
  for (Index i = 0; i < n; ++i) d[i] = sigma[cp[i]];
  return d;
}

PrecisionModel condition_gaussian(const PrecisionModel& prior, const SparseMatrix& A, const Eigen::VectorXd& y,
                                  double noise_precision) {
  prior.validate();
  require(A.cols() == prior.size(), ErrorKind::DimensionMismatch, "observation matrix columns differ from Q");
  require(A.rows() == y.size(), ErrorKind::DimensionMismatch, "observation count differs from A rows");
  require(noise_precision > 0, ErrorKind::NonPositivePrecision, "noise precision must be positive");
  PrecisionModel post = prior;
  post.null_basis.resize(prior.size(), 0);
  if (A.rows() == 0) {
    post.null_basis = prior.null_basis;
    return post;
  }
  post.Q = add(prior.Q, gram(A), 1.0, noise_precision);
  const Eigen::VectorXd mu = prior.mean_or_zero();
  const Eigen::VectorXd rhs = prior.Q.multiply(mu) + noise_precision * A.transpose_multiply(y);
  SparseCholesky chol(post.Q);
  post.mean = chol.solve(rhs);
  post.label = prior.label.empty() ? "posterior" : prior.label + "|data";
  return post;
}

}  // namespace spdekit
