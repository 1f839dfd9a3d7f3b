#include "spdekit/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spdekit/error.hpp"
#include "spdekit/kernels.hpp"

namespace spdekit {

SparseMatrix::SparseMatrix(Index rows, Index cols)
    : rows_(rows), cols_(cols), row_ptr_(static_cast<std::size_t>(rows) + 1, 0) {
  require(rows >= 0 && cols >= 0, ErrorKind::InvalidArgument, "negative matrix dimension");
}

SparseMatrix::SparseMatrix(Index rows, Index cols, std::vector<Index> row_ptr,
                           std::vector<Index> col_idx, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  require(row_ptr_.size() == static_cast<std::size_t>(rows) + 1, ErrorKind::DimensionMismatch,
          "row pointer length must be rows + 1");
  require(col_idx_.size() == values_.size() &&
              static_cast<std::size_t>(row_ptr_.back()) == values_.size(),
          ErrorKind::DimensionMismatch, "inconsistent CSR arrays");
  for (Index i = 0; i < rows_; ++i) {
    require(row_ptr_[i] <= row_ptr_[i + 1], ErrorKind::InvalidArgument, "row pointers must be monotone");
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      require(col_idx_[p] >= 0 && col_idx_[p] < cols_, ErrorKind::IndexOutOfRange,
              "column index out of range");
      require(p == row_ptr_[i] || col_idx_[p - 1] < col_idx_[p], ErrorKind::InvalidArgument,
              "column indices must be strictly increasing within a row");
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols, std::span<const Triplet> triplets) {
  std::vector<Index> count(static_cast<std::size_t>(rows) + 1, 0);
  for (const auto& t : triplets) {
    require(t.row >= 0 && t.row < rows && t.col >= 0 && t.col < cols, ErrorKind::IndexOutOfRange,
            "triplet index out of range");
    ++count[t.row + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());
  // bucket by row keeping insertion order, then stable-sort each row by column
  std::vector<Index> order(triplets.size());
  std::vector<Index> fill(count.begin(), count.end() - 1);
  for (std::size_t k = 0; k < triplets.size(); ++k) order[fill[triplets[k].row]++] = static_cast<Index>(k);

  std::vector<Index> row_ptr(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<Index> col_idx;
  std::vector<double> values;
  col_idx.reserve(triplets.size());
  values.reserve(triplets.size());
  for (Index i = 0; i < rows; ++i) {
    auto first = order.begin() + count[i];
    auto last = order.begin() + count[i + 1];
    std::stable_sort(first, last, [&](Index a, Index b) { return triplets[a].col < triplets[b].col; });
    for (auto it = first; it != last; ++it) {
      const Triplet& t = triplets[*it];
      if (!col_idx.empty() && static_cast<Index>(col_idx.size()) > row_ptr[i] && col_idx.back() == t.col) {
        values.back() += t.value;
      } else {
        col_idx.push_back(t.col);
        values.push_back(t.value);
      }
    }
    row_ptr[i + 1] = static_cast<Index>(col_idx.size());
  }
  return SparseMatrix(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseMatrix SparseMatrix::identity(Index n) {
  std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
  return diagonal(ones);
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> d) {
  const auto n = static_cast<Index>(d.size());
  std::vector<Index> row_ptr(d.size() + 1);
  std::vector<Index> col_idx(d.size());
  std::iota(row_ptr.begin(), row_ptr.end(), 0);
  std::iota(col_idx.begin(), col_idx.end(), 0);
  return SparseMatrix(n, n, std::move(row_ptr), std::move(col_idx), {d.begin(), d.end()});
}

SparseMatrix SparseMatrix::from_dense(const Eigen::MatrixXd& dense, double drop_tol) {
  std::vector<Triplet> t;
  for (Index i = 0; i < dense.rows(); ++i)
    for (Index j = 0; j < dense.cols(); ++j)
      if (std::abs(dense(i, j)) > drop_tol) t.push_back({i, j, dense(i, j)});
  return from_triplets(static_cast<Index>(dense.rows()), static_cast<Index>(dense.cols()), t);
}

bool SparseMatrix::stores(Index i, Index j) const {
  auto cols = row_cols(i);
  return std::binary_search(cols.begin(), cols.end(), j);
}

double SparseMatrix::coeff(Index i, Index j) const {
  auto cols = row_cols(i);
  auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return values_[row_ptr_[i] + (it - cols.begin())];
}

Eigen::VectorXd SparseMatrix::multiply(const Eigen::VectorXd& x) const {
  require(x.size() == cols_, ErrorKind::DimensionMismatch, "matrix-vector dimension mismatch");
  Eigen::VectorXd y(rows_);
  const auto& k = kernels::active();
  for (Index i = 0; i < rows_; ++i) {
    const std::size_t len = static_cast<std::size_t>(row_ptr_[i + 1] - row_ptr_[i]);
    y[i] = k.gather_dot(values_.data() + row_ptr_[i], col_idx_.data() + row_ptr_[i], x.data(), len);
  }
  return y;
}

Eigen::VectorXd SparseMatrix::transpose_multiply(const Eigen::VectorXd& x) const {
  require(x.size() == rows_, ErrorKind::DimensionMismatch, "matrix-vector dimension mismatch");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(cols_);
  for (Index i = 0; i < rows_; ++i)
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) y[col_idx_[p]] += values_[p] * x[i];
  return y;
}

Eigen::VectorXd SparseMatrix::diagonal_values() const {
  Eigen::VectorXd d(std::min(rows_, cols_));
  for (Index i = 0; i < d.size(); ++i) d[i] = coeff(i, i);
  return d;
}

Eigen::VectorXd SparseMatrix::row_sums() const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(rows_);
  for (Index i = 0; i < rows_; ++i)
    for (double v : row_values(i)) s[i] += v;
  return s;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Index> row_ptr(static_cast<std::size_t>(cols_) + 1, 0);
  for (Index c : col_idx_) ++row_ptr[c + 1];
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  std::vector<Index> fill(row_ptr.begin(), row_ptr.end() - 1);
  std::vector<Index> col_idx(nnz());
  std::vector<double> values(nnz());
  for (Index i = 0; i < rows_; ++i)
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      const Index dst = fill[col_idx_[p]]++;
      col_idx[dst] = i;
      values[dst] = values_[p];
    }
  return SparseMatrix(cols_, rows_, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseMatrix SparseMatrix::scaled(double factor) const {
  SparseMatrix out = *this;
  for (double& v : out.values_) v *= factor;
  return out;
}

SparseMatrix SparseMatrix::principal_submatrix(std::span<const Index> keep) const {
  require(square(), ErrorKind::DimensionMismatch, "principal submatrix of a non-square matrix");
  std::vector<Index> position(static_cast<std::size_t>(rows_), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) position[keep[k]] = static_cast<Index>(k);
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const Index i = keep[k];
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
      if (position[col_idx_[p]] >= 0) t.push_back({static_cast<Index>(k), position[col_idx_[p]], values_[p]});
  }
  const auto m = static_cast<Index>(keep.size());
  return from_triplets(m, m, t);
}

bool SparseMatrix::is_symmetric() const {
  if (!square()) return false;
  for (Index i = 0; i < rows_; ++i)
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      const Index j = col_idx_[p];
      if (!stores(j, i) || coeff(j, i) != values_[p]) return false;
    }
  return true;
}

bool SparseMatrix::same_pattern(const SparseMatrix& other) const {
  return rows_ == other.rows_ && cols_ == other.cols_ && row_ptr_ == other.row_ptr_ &&
         col_idx_ == other.col_idx_;
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows_, cols_);
  for (Index i = 0; i < rows_; ++i)
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) d(i, col_idx_[p]) = values_[p];
  return d;
}

Eigen::SparseMatrix<double, Eigen::ColMajor, int> SparseMatrix::to_eigen() const {
  // CSR of A is CSC of A^T; transpose first so the result is A in CSC.
  const SparseMatrix t = transpose();
  Eigen::SparseMatrix<double, Eigen::ColMajor, int> m(rows_, cols_);
  m.resizeNonZeros(static_cast<Eigen::Index>(nnz()));
  std::copy(t.row_ptr_.begin(), t.row_ptr_.end(), m.outerIndexPtr());
  std::copy(t.col_idx_.begin(), t.col_idx_.end(), m.innerIndexPtr());
  std::copy(t.values_.begin(), t.values_.end(), m.valuePtr());
  return m;
}

SparseMatrix SparseMatrix::from_eigen(const Eigen::SparseMatrix<double, Eigen::ColMajor, int>& m) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(m.nonZeros()));
  for (int c = 0; c < m.outerSize(); ++c)
    for (Eigen::SparseMatrix<double, Eigen::ColMajor, int>::InnerIterator it(m, c); it; ++it)
      t.push_back({static_cast<Index>(it.row()), static_cast<Index>(it.col()), it.value()});
  return from_triplets(static_cast<Index>(m.rows()), static_cast<Index>(m.cols()), t);
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  require(a.cols() == b.rows(), ErrorKind::DimensionMismatch, "sparse product dimension mismatch");
  const Index n = b.cols();
  std::vector<Index> marker(static_cast<std::size_t>(n), -1);
  std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
  std::vector<Index> row_ptr(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<Index> col_idx;
  std::vector<double> values;
  std::vector<Index> touched;
  for (Index i = 0; i < a.rows(); ++i) {
    touched.clear();
    auto acols = a.row_cols(i);
    auto avals = a.row_values(i);
    for (std::size_t p = 0; p < acols.size(); ++p) {
      const Index k = acols[p];
      const double aik = avals[p];
      auto bcols = b.row_cols(k);
      auto bvals = b.row_values(k);
      for (std::size_t q = 0; q < bcols.size(); ++q) {
        const Index j = bcols[q];
        if (marker[j] != i) {
          marker[j] = i;
          acc[j] = 0.0;
          touched.push_back(j);
        }
        acc[j] += aik * bvals[q];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (Index j : touched) {
      col_idx.push_back(j);
      values.push_back(acc[j]);
    }
    row_ptr[i + 1] = static_cast<Index>(col_idx.size());
  }
  return SparseMatrix(a.rows(), n, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha, double beta) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::DimensionMismatch,
          "sparse sum dimension mismatch");
  std::vector<Index> row_ptr(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<Index> col_idx;
  std::vector<double> values;
  col_idx.reserve(a.nnz() + b.nnz());
  values.reserve(a.nnz() + b.nnz());
  for (Index i = 0; i < a.rows(); ++i) {
    auto ac = a.row_cols(i);
    auto av = a.row_values(i);
    auto bc = b.row_cols(i);
    auto bv = b.row_values(i);
    std::size_t p = 0, q = 0;
    while (p < ac.size() || q < bc.size()) {
      if (q == bc.size() || (p < ac.size() && ac[p] < bc[q])) {
        col_idx.push_back(ac[p]);
        values.push_back(alpha * av[p]);
        ++p;
      } else if (p == ac.size() || bc[q] < ac[p]) {
        col_idx.push_back(bc[q]);
        values.push_back(beta * bv[q]);
        ++q;
      } else {
        col_idx.push_back(ac[p]);
        values.push_back(alpha * av[p] + beta * bv[q]);
        ++p;
        ++q;
      }
    }
    row_ptr[i + 1] = static_cast<Index>(col_idx.size());
  }
  return SparseMatrix(a.rows(), a.cols(), std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseMatrix scale_rows_cols(const SparseMatrix& a, std::span<const double> left,
                             std::span<const double> right) {
  require(left.size() == static_cast<std::size_t>(a.rows()) &&
              right.size() == static_cast<std::size_t>(a.cols()),
          ErrorKind::DimensionMismatch, "scaling vector length mismatch");
  SparseMatrix out = a;
  auto vals = out.values_mut();
  auto rp = a.row_ptr();
  auto ci = a.col_idx();
  for (Index i = 0; i < a.rows(); ++i)
    for (Index p = rp[i]; p < rp[i + 1]; ++p) vals[p] = (left[i] * right[ci[p]]) * vals[p];
  return out;
}

SparseMatrix gram(const SparseMatrix& a) { return multiply(a.transpose(), a); }

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  const Index rows = a.rows() * b.rows();
  const Index cols = a.cols() * b.cols();
  std::vector<Index> row_ptr(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<Index> col_idx;
  std::vector<double> values;
  col_idx.reserve(a.nnz() * b.nnz());
  values.reserve(a.nnz() * b.nnz());
  for (Index ia = 0; ia < a.rows(); ++ia) {
    auto ac = a.row_cols(ia);
    auto av = a.row_values(ia);
    for (Index ib = 0; ib < b.rows(); ++ib) {
      auto bc = b.row_cols(ib);
      auto bv = b.row_values(ib);
      for (std::size_t p = 0; p < ac.size(); ++p)
        for (std::size_t q = 0; q < bc.size(); ++q) {
          col_idx.push_back(ac[p] * b.cols() + bc[q]);
          values.push_back(av[p] * bv[q]);
        }
      row_ptr[static_cast<std::size_t>(ia * b.rows() + ib) + 1] = static_cast<Index>(col_idx.size());
    }
  }
  return SparseMatrix(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseMatrix mirror_upper(const SparseMatrix& a) {
  require(a.square(), ErrorKind::DimensionMismatch, "mirror of a non-square matrix");
  SparseMatrix out = a;
  auto vals = out.values_mut();
  auto rp = a.row_ptr();
  auto ci = a.col_idx();
  for (Index i = 0; i < a.rows(); ++i)
    for (Index p = rp[i]; p < rp[i + 1]; ++p)
      if (ci[p] < i) {
        require(a.stores(ci[p], i), ErrorKind::InvalidArgument, "matrix is not structurally symmetric");
        vals[p] = a.coeff(ci[p], i);
      }
  return out;
}

double quadratic_form(const SparseMatrix& q, const Eigen::VectorXd& x) {
  const Eigen::VectorXd qx = q.multiply(x);
  return kernels::dot(std::span<const double>(x.data(), x.size()),
                      std::span<const double>(qx.data(), qx.size()));
}

}  // namespace spdekit
