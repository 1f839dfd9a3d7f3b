#include <algorithm>
#include <cmath>
#include <numbers>

#include "spdekit/error.hpp"
#include "spdekit/inference.hpp"

namespace spdekit {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

struct ThetaSplit {
  double noise_log_precision = 0.0;
  std::vector<Eigen::VectorXd> component;
};

ThetaSplit split_theta(const LatentModel& m, const Eigen::VectorXd& theta) {
  require(theta.size() == m.n_theta(), ErrorKind::DimensionMismatch,
          "theta has " + std::to_string(theta.size()) + " entries, model expects " + std::to_string(m.n_theta()));
  ThetaSplit s;
  Index at = 0;
  if (m.likelihood == Likelihood::gaussian) {
    if (m.noise_log_precision_fixed)
      s.noise_log_precision = *m.noise_log_precision_fixed;
    else
      s.noise_log_precision = theta[at++];
  }
  for (const auto& c : m.components) {
    const Index k = static_cast<Index>(c.theta_names.size());
    s.component.push_back(theta.segment(at, k));
    at += k;
  }
  return s;
}

// Joint design [A_1 ... A_k X].
SparseMatrix joint_design(const LatentModel& m) {
  std::vector<Triplet> trip;
  Index col0 = 0;
  for (const auto& c : m.components) {
    for (Index i = 0; i < c.A.rows(); ++i) {
      auto cols = c.A.row_cols(i);
      auto vals = c.A.row_values(i);
      for (std::size_t p = 0; p < cols.size(); ++p) trip.push_back({i, col0 + cols[p], vals[p]});
    }
    col0 += c.size;
  }
  for (Index i = 0; i < m.fixed_effects.rows(); ++i)
    for (Index j = 0; j < m.fixed_effects.cols(); ++j)
      if (m.fixed_effects(i, j) != 0.0) trip.push_back({i, col0 + j, m.fixed_effects(i, j)});
  return SparseMatrix::from_triplets(m.n_obs(), m.n_latent(), trip);
}

// Block-diagonal prior over (u_1, ..., u_k, beta) and the log prior of theta.
PrecisionModel joint_prior(const LatentModel& m, const ThetaSplit& th, double* log_prior_theta) {
  const Index n = m.n_latent();
  std::vector<PrecisionModel> blocks;
  double lp = 0.0;
  if (m.likelihood == Likelihood::gaussian && !m.noise_log_precision_fixed) {
    const double t = th.noise_log_precision;
    lp += pc_precision_logdensity(std::exp(t), m.noise_prior) + t;
  }
  Index total_k = 0, total_r = 0;
  for (std::size_t c = 0; c < m.components.size(); ++c) {
    const auto& comp = m.components[c];
    if (comp.log_prior) lp += comp.log_prior(th.component[c]);
    blocks.push_back(comp.build(th.component[c]));
    const auto& b = blocks.back();
    require(b.size() == comp.size, ErrorKind::DimensionMismatch, "component '" + comp.name + "' changed size");
    total_k += static_cast<Index>(b.constraints.rows());
    total_r += static_cast<Index>(b.null_basis.cols());
  }
  if (log_prior_theta) *log_prior_theta = lp;

  PrecisionModel joint;
  std::vector<Triplet> trip;
  joint.constraints = Eigen::MatrixXd::Zero(total_k, n);
  joint.constraint_values = Eigen::VectorXd::Zero(total_k);
  joint.null_basis = Eigen::MatrixXd::Zero(n, total_r);
  joint.mean = Eigen::VectorXd::Zero(n);
  Index off = 0, krow = 0, rcol = 0;
  for (const auto& b : blocks) {
    for (Index i = 0; i < b.size(); ++i) {
      auto cols = b.Q.row_cols(i);
      auto vals = b.Q.row_values(i);
      for (std::size_t p = 0; p < cols.size(); ++p) trip.push_back({off + i, off + cols[p], vals[p]});
    }
    joint.mean.segment(off, b.size()) = b.mean_or_zero();
    const Index k = static_cast<Index>(b.constraints.rows());
    if (k > 0) {
      joint.constraints.block(krow, off, k, b.size()) = b.constraints;
      joint.constraint_values.segment(krow, k) = b.constraint_rhs();
    }
    const Index r = static_cast<Index>(b.null_basis.cols());
    if (r > 0) joint.null_basis.block(off, rcol, b.size(), r) = b.null_basis;
    krow += k;
    rcol += r;
    off += b.size();
  }
  for (Index j = 0; j < m.fixed_effects.cols(); ++j) trip.push_back({off + j, off + j, m.fixed_effect_precision});
  joint.Q = SparseMatrix::from_triplets(n, n, trip);
  joint.label = "latent";
  return joint;
}

struct PosteriorState {
  PrecisionModel prior;
  PrecisionModel posterior;  // Gaussian approximation at the mode; mean = mode
  double log_likelihood = 0.0;
  double log_prior_theta = 0.0;
  int iterations = 0;
};

double poisson_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  double s = 0.0;
  for (Index i = 0; i < y.size(); ++i) s += y[i] * eta[i] - std::exp(eta[i]) - std::lgamma(y[i] + 1.0);
  return s;
}

PrecisionModel gaussian_approximation(const PrecisionModel& prior, const SparseMatrix& A, const Eigen::VectorXd& w) {
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const std::vector<double> ones(A.cols(), 1.0);
  const SparseMatrix wa = scale_rows_cols(A, std::span<const double>(sw.data(), sw.size()), ones);
  PrecisionModel post;
  post.Q = add(prior.Q, gram(wa));
  post.constraints = prior.constraints;
  post.constraint_values = prior.constraint_values;
  post.label = "posterior";
  return post;
}

// Unconstrained solve followed by conditioning on the constraints.
Eigen::VectorXd constrained_solve(PrecisionModel& post, const Eigen::VectorXd& rhs) {
  PrecisionModel free;
  free.Q = post.Q;
  post.mean = Factorization(free).solve(rhs);
  return Factorization(post).constrained_mean();
}

PosteriorState solve_posterior(const LatentModel& m, const Eigen::VectorXd& theta) {
  m.validate();
  const ThetaSplit th = split_theta(m, theta);
  PosteriorState st;
  st.prior = joint_prior(m, th, &st.log_prior_theta);
  const SparseMatrix A = joint_design(m);
  const Index nobs = m.n_obs();
  const Eigen::VectorXd off = m.offset.size() == 0 ? Eigen::VectorXd::Zero(nobs) : m.offset;
  const Eigen::VectorXd mu0 = st.prior.mean_or_zero();
  const Eigen::VectorXd q_mu0 = st.prior.Q.multiply(mu0);

  if (m.likelihood == Likelihood::gaussian) {
    const double prec = std::exp(th.noise_log_precision);
    PrecisionModel post = gaussian_approximation(st.prior, A, Eigen::VectorXd::Constant(nobs, prec));
    const Eigen::VectorXd x = constrained_solve(post, q_mu0 + prec * A.transpose_multiply(m.y - off));
    post.mean = x;
    const Eigen::VectorXd r = m.y - off - A.multiply(x);
    st.log_likelihood = 0.5 * nobs * (th.noise_log_precision - kLog2Pi) - 0.5 * prec * r.squaredNorm();
    st.posterior = std::move(post);
    st.iterations = 1;
    return st;
  }

  auto objective = [&](const Eigen::VectorXd& x) {
    return poisson_loglik(m.y, A.multiply(x) + off) - 0.5 * quadratic_form(st.prior.Q, x - mu0);
  };
  Eigen::VectorXd x = mu0;
  if (st.prior.constrained()) {
    PrecisionModel probe;
    probe.Q = SparseMatrix::identity(st.prior.size());
    probe.mean = mu0;
    probe.constraints = st.prior.constraints;
    probe.constraint_values = st.prior.constraint_values;
    x = Factorization(probe).constrained_mean();
  }
  double fx = objective(x);
  for (int it = 1;; ++it) {
    require(it <= 100, ErrorKind::NewtonDivergence, "Newton iteration did not converge in 100 steps");
    const Eigen::VectorXd eta = A.multiply(x) + off;
    const Eigen::VectorXd w = eta.array().exp();
    PrecisionModel post = gaussian_approximation(st.prior, A, w);
    const Eigen::VectorXd target =
        constrained_solve(post, q_mu0 + A.transpose_multiply(m.y - w + w.cwiseProduct(eta - off)));
    require(target.allFinite(), ErrorKind::NewtonDivergence, "Newton step produced non-finite values");
    const Eigen::VectorXd step = target - x;
    double s = 1.0;
    Eigen::VectorXd cand = target;
    double fc = objective(cand);
    while (!(std::isfinite(fc) && fc >= fx - 1e-12 * std::abs(fx)) && s > 1e-10) {
      s *= 0.5;
      cand = x + s * step;
      fc = objective(cand);
    }
    require(std::isfinite(fc), ErrorKind::NewtonDivergence, "Newton iteration diverged");
    const double change = (s * step).lpNorm<Eigen::Infinity>();
    x = cand;
    fx = fc;
    st.iterations = it;
    if (change < 1e-8) break;
  }
  const Eigen::VectorXd eta = A.multiply(x) + off;
  st.posterior = gaussian_approximation(st.prior, A, eta.array().exp());
  st.posterior.mean = x;
  st.log_likelihood = poisson_loglik(m.y, eta);
  return st;
}

}  // namespace

Index LatentModel::n_latent() const {
  Index n = 0;
  for (const auto& c : components) n += c.size;
  return n + static_cast<Index>(fixed_effects.cols());
}

Index LatentModel::n_theta() const {
  Index k = (likelihood == Likelihood::gaussian && !noise_log_precision_fixed) ? 1 : 0;
  for (const auto& c : components) k += static_cast<Index>(c.theta_names.size());
  return k;
}

std::vector<std::string> LatentModel::theta_names() const {
  std::vector<std::string> names;
  if (likelihood == Likelihood::gaussian && !noise_log_precision_fixed) names.push_back("log_noise_precision");
  for (const auto& c : components)
    for (const auto& t : c.theta_names) names.push_back(c.name + "." + t);
  return names;
}

Eigen::VectorXd LatentModel::theta_initial() const {
  Eigen::VectorXd t(n_theta());
  Index at = 0;
  if (likelihood == Likelihood::gaussian && !noise_log_precision_fixed) t[at++] = noise_log_precision_initial;
  for (const auto& c : components) {
    t.segment(at, c.theta_initial.size()) = c.theta_initial;
    at += static_cast<Index>(c.theta_initial.size());
  }
  return t;
}

void LatentModel::validate() const {
  const Index nobs = n_obs();
  require(n_theta() <= 20, ErrorKind::InvalidArgument, "at most 20 hyperparameters are supported");
  require(offset.size() == 0 || offset.size() == nobs, ErrorKind::DimensionMismatch, "offset length differs from y");
  require(fixed_effects.cols() == 0 || fixed_effects.rows() == nobs, ErrorKind::DimensionMismatch,
          "fixed-effect design rows differ from y");
  require(fixed_effect_precision > 0, ErrorKind::NonPositivePrecision, "fixed-effect precision must be positive");
  for (const auto& c : components) {
    require(c.A.rows() == nobs && c.A.cols() == c.size, ErrorKind::DimensionMismatch,
            "component '" + c.name + "' projection has the wrong shape");
    require(static_cast<std::size_t>(c.theta_initial.size()) == c.theta_names.size(), ErrorKind::DimensionMismatch,
            "component '" + c.name + "' theta_initial differs from its names");
    require(static_cast<bool>(c.build), ErrorKind::InvalidArgument, "component '" + c.name + "' has no builder");
  }
  if (likelihood == Likelihood::poisson)
    for (Index i = 0; i < nobs; ++i)
      require(y[i] >= 0 && y[i] == std::floor(y[i]), ErrorKind::InvalidArgument,
              "Poisson observations must be non-negative integers");
}

PrecisionModel latent_posterior(const LatentModel& model, const Eigen::VectorXd& theta, int* newton_iterations) {
  PosteriorState st = solve_posterior(model, theta);
  if (newton_iterations) *newton_iterations = st.iterations;
  return std::move(st.posterior);
}

LaplaceEvaluation evaluate_laplace(const LatentModel& model, const Eigen::VectorXd& theta) {
  PosteriorState st = solve_posterior(model, theta);
  LaplaceEvaluation ev;
  ev.mode = st.posterior.mean;
  ev.newton_iterations = st.iterations;
  ev.log_likelihood = st.log_likelihood;
  ev.log_prior_theta = st.log_prior_theta;
  ev.log_prior_latent = Factorization(st.prior).log_density(ev.mode);
  ev.log_conditional = Factorization(st.posterior).log_density(ev.mode);
  ev.log_posterior = ev.log_likelihood + ev.log_prior_latent - ev.log_conditional + ev.log_prior_theta;
  return ev;
}

double log_posterior_theta(const LatentModel& model, const Eigen::VectorXd& theta) {
  return evaluate_laplace(model, theta).log_posterior;
}

}  // namespace spdekit
