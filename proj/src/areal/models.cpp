#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "spdekit/areal.hpp"
#include "spdekit/error.hpp"

namespace spdekit {
namespace {

// Columns of the null basis that indicate a single node.
bool is_singleton_column(const Eigen::MatrixXd& n, Index c, Index* node) {
  Index count = 0;
  for (Index i = 0; i < n.rows(); ++i)
    if (n(i, c) != 0.0) {
      ++count;
      *node = i;
    }
  return count == 1;
}

}  // namespace

PrecisionModel besag_precision(const AdjacencyGraph& g, const EdgeWeights* weights) {
  g.validate();
  auto weight = [&](Index i, Index j) {
    if (!weights) return 1.0;
    auto it = weights->find({std::min(i, j), std::max(i, j)});
    if (it == weights->end()) return 1.0;
    require(it->second > 0 && std::isfinite(it->second), ErrorKind::InvalidArgument, "edge weights must be positive");
    return it->second;
  };
  std::vector<Triplet> trip;
  for (Index i = 0; i < g.n; ++i) {
    double d = 0.0;
    for (Index j : g.nb[i]) d += weight(i, j);
    // diagonal first, then neighbours: row i is assembled in column order by from_triplets
    trip.push_back({i, i, d});
    for (Index j : g.nb[i]) trip.push_back({i, j, -weight(i, j)});
  }
  PrecisionModel m;
  m.Q = SparseMatrix::from_triplets(g.n, g.n, trip);
  const auto comps = connected_components(g);
  const Index k = static_cast<Index>(comps.size());
  m.null_basis = Eigen::MatrixXd::Zero(g.n, k);
  m.constraints = Eigen::MatrixXd::Zero(k, g.n);
  m.constraint_values = Eigen::VectorXd::Zero(k);
  for (Index c = 0; c < k; ++c)
    for (Index i : comps[c]) {
      m.null_basis(i, c) = 1.0;
      m.constraints(c, i) = 1.0;
    }
  m.label = weights ? "besag(weighted)" : "besag";
  return m;
}

PrecisionModel scale_besag(const PrecisionModel& besag) {
  besag.validate();
  require(besag.intrinsic(), ErrorKind::InvalidArgument, "scale_besag expects an intrinsic Besag model");
  const Index n = besag.size();
  const Eigen::MatrixXd& N = besag.null_basis;

  // singletons become unit-variance iid nodes before the variances are computed
  PrecisionModel work = besag;
  std::vector<Index> keep_cols;
  std::vector<Index> singletons;
  for (Index c = 0; c < N.cols(); ++c) {
    Index node = -1;
    if (is_singleton_column(N, c, &node))
      singletons.push_back(node);
    else
      keep_cols.push_back(c);
  }
  if (!singletons.empty()) {
    std::vector<Triplet> trip;
    for (Index i = 0; i < n; ++i) {
      auto cols = work.Q.row_cols(i);
      auto vals = work.Q.row_values(i);
      for (std::size_t p = 0; p < cols.size(); ++p) trip.push_back({i, cols[p], vals[p]});
    }
    for (Index s : singletons) {
      trip.push_back({s, s, 1.0 - work.Q.coeff(s, s)});
      work.notes.push_back("singleton component at node " + std::to_string(s) + " set to unit variance");
    }
    work.Q = SparseMatrix::from_triplets(n, n, trip);
    Eigen::MatrixXd nb(n, static_cast<Index>(keep_cols.size()));
    Eigen::MatrixXd cons(static_cast<Index>(keep_cols.size()), n);
    for (std::size_t k = 0; k < keep_cols.size(); ++k) {
      nb.col(k) = N.col(keep_cols[k]);
      cons.row(k) = besag.constraints.row(keep_cols[k]);
    }
    work.null_basis = nb;
    work.constraints = cons;
    work.constraint_values = Eigen::VectorXd::Zero(cons.rows());
  }
  if (work.null_basis.cols() == 0) {
    work.label = besag.label + ",scaled";
    return work;
  }

  const Eigen::VectorXd var = Factorization(work).marginal_variances();
  std::vector<double> factor(n, 1.0);
  for (Index c = 0; c < work.null_basis.cols(); ++c) {
    double sum_log = 0.0;
    Index count = 0;
    for (Index i = 0; i < n; ++i)
      if (work.null_basis(i, c) != 0.0) {
        sum_log += std::log(var[i]);
        ++count;
      }
    const double gm = std::exp(sum_log / count);
    for (Index i = 0; i < n; ++i)
      if (work.null_basis(i, c) != 0.0) factor[i] = gm;
  }
  auto vals = work.Q.values_mut();
  auto rp = work.Q.row_ptr();
  for (Index i = 0; i < n; ++i)
    for (Index p = rp[i]; p < rp[i + 1]; ++p) vals[p] *= factor[i];
  work.label = besag.label + ",scaled";
  return work;
}

PrecisionModel bym2_precision(const AdjacencyGraph& g, double tau, double w) {
  require(tau > 0 && std::isfinite(tau), ErrorKind::NonPositivePrecision, "tau must be positive");
  require(w >= 0 && w <= 1, ErrorKind::WeightOutOfRange, "BYM2 weight must lie in [0, 1]");
  return bym2_from_scaled(scale_besag(besag_precision(g)), tau, w);
}

PrecisionModel bym2_from_scaled(const PrecisionModel& scaled, double tau, double w) {
  require(tau > 0 && std::isfinite(tau), ErrorKind::NonPositivePrecision, "tau must be positive");
  require(w >= 0 && w <= 1, ErrorKind::WeightOutOfRange, "BYM2 weight must lie in [0, 1]");
  const double we = std::min(w, kBym2MaxWeight);
  const Index n = scaled.size();
  const double a = tau / (1.0 - we);
  const double b = -std::sqrt(tau * we) / (1.0 - we);
  const double c = we / (1.0 - we);
  std::vector<Triplet> trip;
  for (Index i = 0; i < n; ++i) {
    trip.push_back({i, i, a});
    if (b != 0.0) trip.push_back({i, n + i, b});
  }
  for (Index i = 0; i < n; ++i) {
    if (b != 0.0) trip.push_back({n + i, i, b});
    auto cols = scaled.Q.row_cols(i);
    auto vals = scaled.Q.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) trip.push_back({n + i, n + cols[p], vals[p]});
    if (c != 0.0) trip.push_back({n + i, n + i, c});
  }
  PrecisionModel m;
  m.Q = SparseMatrix::from_triplets(2 * n, 2 * n, trip);
  const Index r = static_cast<Index>(scaled.null_basis.cols());
  m.null_basis = Eigen::MatrixXd::Zero(2 * n, r);
  m.constraints = Eigen::MatrixXd::Zero(r, 2 * n);
  m.constraint_values = Eigen::VectorXd::Zero(r);
  const double lift = std::sqrt(we / tau);
  for (Index k = 0; k < r; ++k) {
    m.null_basis.col(k).head(n) = lift * scaled.null_basis.col(k);
    m.null_basis.col(k).tail(n) = scaled.null_basis.col(k);
    m.constraints.row(k).tail(n) = scaled.constraints.row(k);
  }
  m.notes = scaled.notes;
  if (w != we) m.notes.push_back("w = 1 evaluated at w = 1 - 1e-9");
  m.label = "bym2";
  return m;
}

void TemporalModel::validate() const {
  switch (kind) {
    case TemporalKind::iid:
      require(length >= 1, ErrorKind::InvalidArgument, "iid length must be >= 1");
      break;
    case TemporalKind::ar1:
      require(length >= 1, ErrorKind::InvalidArgument, "ar1 length must be >= 1");
      require(std::abs(rho) < 1, ErrorKind::InvalidArgument, "ar1 needs |rho| < 1");
      break;
    case TemporalKind::rw1:
      require(length >= 2, ErrorKind::InvalidArgument, "rw1 length must be >= 2");
      break;
    case TemporalKind::rw2:
      require(length >= 3, ErrorKind::InvalidArgument, "rw2 length must be >= 3");
      break;
  }
}

TemporalKind parse_temporal_kind(std::string_view name) {
  if (name == "iid") return TemporalKind::iid;
  if (name == "ar1") return TemporalKind::ar1;
  if (name == "rw1") return TemporalKind::rw1;
  if (name == "rw2") return TemporalKind::rw2;
  fail(ErrorKind::InvalidArgument, "unknown temporal model '" + std::string(name) + "'");
}

PrecisionModel temporal_precision(const TemporalModel& t) {
  t.validate();
  const Index T = t.length;
  PrecisionModel m;
  std::vector<Triplet> trip;
  switch (t.kind) {
    case TemporalKind::iid:
      m.Q = SparseMatrix::identity(T);
      m.label = "iid";
      return m;
    case TemporalKind::ar1: {
      const double s = 1.0 / (1.0 - t.rho * t.rho);
      for (Index i = 0; i < T; ++i) {
        const bool end = i == 0 || i == T - 1;
        if (i > 0) trip.push_back({i, i - 1, -t.rho * s});
        trip.push_back({i, i, (end ? 1.0 : 1.0 + t.rho * t.rho) * s});
        if (i + 1 < T) trip.push_back({i, i + 1, -t.rho * s});
      }
      if (T == 1) trip = {{0, 0, 1.0}};
      m.Q = SparseMatrix::from_triplets(T, T, trip);
      m.label = "ar1";
      return m;
    }
    case TemporalKind::rw1: {
      AdjacencyGraph path;
      path.n = T;
      path.nb.assign(T, {});
      for (Index i = 0; i + 1 < T; ++i) {
        path.nb[i].push_back(i + 1);
        path.nb[i + 1].push_back(i);
      }
      for (auto& l : path.nb) std::sort(l.begin(), l.end());
      m = besag_precision(path);
      m.label = "rw1";
      return m;
    }
    case TemporalKind::rw2: {
      for (Index r = 0; r + 2 < T; ++r) {
        trip.push_back({r, r, 1.0});
        trip.push_back({r, r + 1, -2.0});
        trip.push_back({r, r + 2, 1.0});
      }
      const SparseMatrix D = SparseMatrix::from_triplets(T - 2, T, trip);
      m.Q = gram(D);
      m.null_basis.resize(T, 2);
      m.constraints.resize(2, T);
      for (Index i = 0; i < T; ++i) {
        m.null_basis(i, 0) = 1.0;
        m.null_basis(i, 1) = static_cast<double>(i) - 0.5 * (T - 1);
        m.constraints(0, i) = 1.0;
        m.constraints(1, i) = static_cast<double>(i) - 0.5 * (T - 1);
      }
      m.constraint_values = Eigen::VectorXd::Zero(2);
      m.label = "rw2";
      return m;
    }
  }
  fail(ErrorKind::InvalidArgument, "unknown temporal model");
}

PrecisionModel kronecker_precision(const PrecisionModel& qt, const PrecisionModel& qs) {
  qt.validate();
  qs.validate();
  const Index T = qt.size(), S = qs.size();
  PrecisionModel m;
  m.Q = kron(qt.Q, qs.Q);
  m.label = qt.label + "(x)" + qs.label;

  const Eigen::MatrixXd It = Eigen::MatrixXd::Identity(T, T);
  const Eigen::MatrixXd Is = Eigen::MatrixXd::Identity(S, S);
  auto dense_kron = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
      for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
  };

  const Index kt = static_cast<Index>(qt.constraints.rows()), ks = static_cast<Index>(qs.constraints.rows());
  if (kt + ks > 0) {
    Eigen::MatrixXd stacked(kt * S + T * ks, T * S);
    if (kt > 0) stacked.topRows(kt * S) = dense_kron(qt.constraints, Is);
    if (ks > 0) stacked.bottomRows(T * ks) = dense_kron(It, qs.constraints);
    // keep a full-rank subset of the original rows
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(stacked.transpose());
    const Index rank = static_cast<Index>(qr.rank());
    std::vector<Index> rows;
    for (Index k = 0; k < rank; ++k) rows.push_back(qr.colsPermutation().indices()[k]);
    std::sort(rows.begin(), rows.end());
    m.constraints.resize(rank, T * S);
    for (Index k = 0; k < rank; ++k) m.constraints.row(k) = stacked.row(rows[k]);
    m.constraint_values = Eigen::VectorXd::Zero(rank);
  }

  const Index rt = static_cast<Index>(qt.null_basis.cols()), rs = static_cast<Index>(qs.null_basis.cols());
  if (rt + rs > 0) {
    Eigen::MatrixXd bt = It;  // complement of the temporal null space
    if (rt > 0) {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(qt.null_basis);
      const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(T, T);
      bt = q.rightCols(T - rt);
    }
    Eigen::MatrixXd first = rt > 0 ? dense_kron(qt.null_basis, Is) : Eigen::MatrixXd(T * S, 0);
    Eigen::MatrixXd second = rs > 0 ? dense_kron(bt, qs.null_basis) : Eigen::MatrixXd(T * S, 0);
    m.null_basis.resize(T * S, first.cols() + second.cols());
    m.null_basis << first, second;
  }
  return m;
}

}  // namespace spdekit
