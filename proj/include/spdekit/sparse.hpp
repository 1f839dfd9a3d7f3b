#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace spdekit {

using Index = std::int32_t;

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing within
/// each row. Structural entries are never pruned, even when their value is
/// zero, so that patterns are a function of the construction only.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(Index rows, Index cols);
  SparseMatrix(Index rows, Index cols, std::vector<Index> row_ptr, std::vector<Index> col_idx,
               std::vector<double> values);

  /// Duplicates are summed in the order they appear, so mirrored insertions
  /// produce bitwise-equal (i,j) and (j,i) entries.
  static SparseMatrix from_triplets(Index rows, Index cols, std::span<const Triplet> triplets);
  static SparseMatrix identity(Index n);
  static SparseMatrix diagonal(std::span<const double> d);
  static SparseMatrix from_dense(const Eigen::MatrixXd& dense, double drop_tol = 0.0);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  bool square() const { return rows_ == cols_; }

  std::span<const Index> row_ptr() const { return row_ptr_; }
  std::span<const Index> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values_mut() { return values_; }

  std::span<const Index> row_cols(Index i) const {
    return {col_idx_.data() + row_ptr_[i], static_cast<std::size_t>(row_ptr_[i + 1] - row_ptr_[i])};
  }
  std::span<const double> row_values(Index i) const {
    return {values_.data() + row_ptr_[i], static_cast<std::size_t>(row_ptr_[i + 1] - row_ptr_[i])};
  }

  /// Value at (i, j), zero when not stored.
  double coeff(Index i, Index j) const;
  bool stores(Index i, Index j) const;

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd transpose_multiply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd diagonal_values() const;
  Eigen::VectorXd row_sums() const;

  SparseMatrix transpose() const;
  SparseMatrix scaled(double factor) const;
  /// Rows and columns listed in `keep`, in that order.
  SparseMatrix principal_submatrix(std::span<const Index> keep) const;

  /// Exact (bitwise) symmetry of pattern and values.
  bool is_symmetric() const;
  bool same_pattern(const SparseMatrix& other) const;

  Eigen::MatrixXd to_dense() const;
  Eigen::SparseMatrix<double, Eigen::ColMajor, int> to_eigen() const;
  static SparseMatrix from_eigen(const Eigen::SparseMatrix<double, Eigen::ColMajor, int>& m);

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

/// a * b, pattern = structural product.
SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);

/// alpha * a + beta * b over the union pattern.
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha = 1.0,
                 double beta = 1.0);

/// diag(left) * a * diag(right), each entry computed as (left_i * right_j) * a_ij.
SparseMatrix scale_rows_cols(const SparseMatrix& a, std::span<const double> left,
                             std::span<const double> right);

/// a^T a, exactly symmetric.
SparseMatrix gram(const SparseMatrix& a);

/// Kronecker product; nnz is the product of the operand nnz.
SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);

/// Rebuilds a structurally symmetric matrix from its upper triangle so that
/// values are bitwise symmetric.
SparseMatrix mirror_upper(const SparseMatrix& a);

double quadratic_form(const SparseMatrix& q, const Eigen::VectorXd& x);

// MatrixMarket coordinate format. Symmetric matrices are written with the
// `symmetric` qualifier (lower triangle only).
void write_matrix_market(std::ostream& out, const SparseMatrix& m);
void write_matrix_market(const std::string& path, const SparseMatrix& m);
SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market(const std::string& path);

}  // namespace spdekit
