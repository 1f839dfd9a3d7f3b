#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "spdekit/error.hpp"
#include "spdekit/inference.hpp"

namespace spdekit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x) {
  const double v = f(x);
  return std::isfinite(v) ? v : kInf;
}

// -log pi(theta | y); numerical breakdowns at extreme theta count as +inf.
std::function<double(const Eigen::VectorXd&)> negative_log_posterior(const LatentModel& m, int* counter) {
  return [&m, counter](const Eigen::VectorXd& t) {
    if (counter) ++*counter;
    try {
      return -log_posterior_theta(m, t);
    } catch (const Error& e) {
      if (is_numerical(e.kind()) || e.kind() == ErrorKind::NonPositivePrecision) return kInf;
      throw;
    }
  };
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                            double h) {
  Eigen::VectorXd g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

ThetaPoint make_point(const LatentModel& m, const Eigen::VectorXd& theta, double lp) {
  ThetaPoint p;
  p.theta = theta;
  p.log_posterior = lp;
  const PrecisionModel post = latent_posterior(m, theta, &p.newton_iterations);
  p.latent_mean = post.mean;
  p.latent_sd = Factorization(post).marginal_variances().cwiseSqrt();
  return p;
}

double quantile7(std::vector<double>& v, double q) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             double initial_step, double tolerance, int max_evaluations) {
  NelderMeadResult r;
  const Index n = static_cast<Index>(x0.size());
  if (n == 0) {
    r.x = x0;
    r.value = safe_eval(f, x0);
    r.evaluations = 1;
    r.converged = std::isfinite(r.value);
    return r;
  }
  std::vector<Eigen::VectorXd> xs(n + 1, x0);
  std::vector<double> fs(n + 1);
  for (Index i = 0; i < n; ++i) xs[i + 1][i] += initial_step;
  for (Index i = 0; i <= n; ++i) fs[i] = safe_eval(f, xs[i]);
  r.evaluations = n + 1;
  require(std::isfinite(fs[0]), ErrorKind::OptimizerFailure, "objective is not finite at the starting point");

  std::vector<Index> order(n + 1);
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return fs[a] < fs[b]; });
    const Index best = order.front(), worst = order.back(), second = order[n - 1];
    double diameter = 0.0;
    for (Index i = 0; i <= n; ++i) diameter = std::max(diameter, (xs[i] - xs[best]).lpNorm<Eigen::Infinity>());
    if (fs[worst] - fs[best] <= tolerance * (1.0 + std::abs(fs[best])) && diameter <= 1e-6) {
      r.converged = true;
      break;
    }
    if (r.evaluations >= max_evaluations) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Index i = 0; i <= n; ++i)
      if (i != worst) centroid += xs[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + (centroid - xs[worst]);
    const double fr = safe_eval(f, xr);
    ++r.evaluations;
    if (fr < fs[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs[worst]);
      const double fe = safe_eval(f, xe);
      ++r.evaluations;
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[second]) {
      xs[worst] = xr;
      fs[worst] = fr;
      continue;
    }
    const bool outside = fr < fs[worst];
    const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                       : Eigen::VectorXd(centroid + 0.5 * (xs[worst] - centroid));
    const double fc = safe_eval(f, xc);
    ++r.evaluations;
    if (fc < (outside ? fr : fs[worst])) {
      xs[worst] = xc;
      fs[worst] = fc;
      continue;
    }
    for (Index i = 0; i <= n; ++i) {
      if (i == best) continue;
      xs[i] = xs[best] + 0.5 * (xs[i] - xs[best]);
      fs[i] = safe_eval(f, xs[i]);
      ++r.evaluations;
    }
  }
  const Index best = static_cast<Index>(std::min_element(fs.begin(), fs.end()) - fs.begin());
  r.x = xs[best];
  r.value = fs[best];
  return r;
}

Eigen::MatrixXd finite_difference_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& x, double step) {
  const Index n = static_cast<Index>(x.size());
  Eigen::MatrixXd H(n, n);
  const double f0 = f(x);
  for (Index i = 0; i < n; ++i) {
    Eigen::VectorXd a = x, b = x;
    a[i] += step;
    b[i] -= step;
    H(i, i) = (f(a) - 2 * f0 + f(b)) / (step * step);
    for (Index j = 0; j < i; ++j) {
      Eigen::VectorXd pp = x, pm = x, mp = x, mm = x;
      pp[i] += step, pp[j] += step;
      pm[i] += step, pm[j] -= step;
      mp[i] -= step, mp[j] += step;
      mm[i] -= step, mm[j] -= step;
      H(i, j) = H(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * step * step);
    }
  }
  return H;
}

Strategy parse_strategy(const std::string& name) {
  if (name == "eb") return Strategy::eb;
  if (name == "grid") return Strategy::grid;
  fail(ErrorKind::InvalidArgument, "unknown strategy '" + name + "' (expected eb or grid)");
}

FitResult fit(std::shared_ptr<const LatentModel> model, Strategy strategy, const GridConfig& grid) {
  require(model != nullptr, ErrorKind::InvalidArgument, "no model");
  const LatentModel& m = *model;
  m.validate();
  require(grid.step_sd > 0 && grid.drop > 0 && grid.max_steps >= 0, ErrorKind::InvalidArgument,
          "grid step, drop and max_steps must be positive");

  FitResult out;
  out.model = model;
  out.strategy = strategy == Strategy::eb ? "eb" : "grid";
  out.theta_names = m.theta_names();
  int evals = 0;
  const auto f = negative_log_posterior(m, &evals);

  NelderMeadResult nm = nelder_mead(f, m.theta_initial());
  require(nm.converged, ErrorKind::OptimizerFailure,
          "hyperparameter optimisation did not converge in " + std::to_string(nm.evaluations) + " evaluations");
  Eigen::VectorXd mode = nm.x;
  double fmode = nm.value;
  Eigen::MatrixXd H = finite_difference_hessian(f, mode);
  for (int polish = 0; polish < 5 && mode.size() > 0; ++polish) {
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) break;
    const Eigen::VectorXd cand = mode - llt.solve(fd_gradient(f, mode, 1e-4));
    const double fc = f(cand);
    if (!(fc < fmode)) break;
    const double moved = (cand - mode).lpNorm<Eigen::Infinity>();
    mode = cand;
    fmode = fc;
    H = finite_difference_hessian(f, mode);
    if (moved < 1e-6) break;
  }
  require(H.allFinite(), ErrorKind::OptimizerFailure, "Hessian at the mode is not finite");
  out.theta_mode = mode;
  out.theta_hessian = H;

  if (strategy == Strategy::eb || mode.size() == 0) {
    out.points.push_back(make_point(m, mode, -fmode));
    out.points.back().weight = 1.0;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    require(eig.eigenvalues().minCoeff() > 0, ErrorKind::OptimizerFailure,
            "Hessian at the mode is not positive definite");
    const Eigen::VectorXd sd = H.inverse().diagonal().cwiseSqrt();
    const Index k = static_cast<Index>(mode.size());
    std::map<std::vector<int>, char> seen;
    std::deque<std::vector<int>> queue;
    queue.push_back(std::vector<int>(k, 0));
    seen[queue.front()] = 1;
    std::vector<std::pair<Eigen::VectorXd, double>> kept;
    std::size_t evaluated = 0;
    while (!queue.empty()) {
      const std::vector<int> z = queue.front();
      queue.pop_front();
      require(++evaluated <= grid.max_points, ErrorKind::GridExplosion,
              "grid exceeded " + std::to_string(grid.max_points) + " points");
      Eigen::VectorXd t = mode;
      for (Index i = 0; i < k; ++i) t[i] += z[i] * grid.step_sd * sd[i];
      const double val = f(t);
      if (!std::isfinite(val) || val - fmode > grid.drop) continue;
      kept.emplace_back(t, -val);
      for (Index i = 0; i < k; ++i)
        for (int d : {-1, 1}) {
          std::vector<int> nz = z;
          nz[i] += d;
          if (std::abs(nz[i]) > grid.max_steps || seen.count(nz)) continue;
          seen[nz] = 1;
          queue.push_back(std::move(nz));
        }
    }
    double top = -kInf;
    for (const auto& [t, lp] : kept) top = std::max(top, lp);
    double total = 0.0;
    for (const auto& [t, lp] : kept) {
      out.points.push_back(make_point(m, t, lp));
      out.points.back().weight = std::exp(lp - top);
      total += out.points.back().weight;
    }
    for (auto& p : out.points) p.weight /= total;
  }

  const Index n = m.n_latent();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n), second = Eigen::VectorXd::Zero(n);
  for (const auto& p : out.points) {
    mean += p.weight * p.latent_mean;
    second += p.weight * (p.latent_sd.array().square() + p.latent_mean.array().square()).matrix();
  }
  out.latent_mean = mean;
  out.latent_sd = (second - mean.cwiseProduct(mean)).cwiseMax(0.0).cwiseSqrt();
  out.optimizer_evaluations = evals;
  out.provenance = {"strategy=" + out.strategy, "n_theta=" + std::to_string(mode.size()),
                    "n_latent=" + std::to_string(n), "theta_points=" + std::to_string(out.points.size()),
                    "objective_evaluations=" + std::to_string(evals),
                    "fixed_effect_precision=" + std::to_string(m.fixed_effect_precision), "jitter=0"};
  return out;
}

PredictSummary predict(const FitResult& fit, const SparseMatrix& A_new, int n_draws, std::uint64_t seed,
                       std::optional<Link> link) {
  require(fit.model != nullptr && !fit.points.empty(), ErrorKind::InvalidArgument, "fit result has no model");
  require(n_draws >= 2, ErrorKind::InvalidArgument, "need at least 2 draws");
  const LatentModel& m = *fit.model;
  require(A_new.cols() == m.n_latent(), ErrorKind::DimensionMismatch,
          "prediction matrix has " + std::to_string(A_new.cols()) + " columns, latent vector has " +
              std::to_string(m.n_latent()));
  const Link lk = link.value_or(m.likelihood == Likelihood::poisson ? Link::exp : Link::identity);

  std::mt19937_64 rng(seed);
  std::vector<double> w;
  for (const auto& p : fit.points) w.push_back(p.weight);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::vector<std::size_t> which(n_draws);
  for (auto& k : which) k = pick(rng);
  std::normal_distribution<double> normal;

  const Index n = m.n_latent(), mrows = A_new.rows();
  PredictSummary s;
  s.draws.resize(mrows, n_draws);
  std::map<std::size_t, std::unique_ptr<Factorization>> cache;
  for (int d = 0; d < n_draws; ++d) {
    auto& fac = cache[which[d]];
    if (!fac) fac = std::make_unique<Factorization>(latent_posterior(m, fit.points[which[d]].theta));
    Eigen::MatrixXd z(n, 1);
    for (Index i = 0; i < n; ++i) z(i, 0) = normal(rng);
    Eigen::VectorXd eta = A_new.multiply(fac->sample_from_normals(z).col(0));
    if (lk == Link::exp) eta = eta.array().exp();
    s.draws.col(d) = eta;
  }
  s.mean = s.draws.rowwise().mean();
  s.sd.resize(mrows);
  s.quantiles.resize(mrows, 5);
  for (Index i = 0; i < mrows; ++i) {
    std::vector<double> row(n_draws);
    for (int d = 0; d < n_draws; ++d) row[d] = s.draws(i, d);
    double ss = 0.0;
    for (double v : row) ss += (v - s.mean[i]) * (v - s.mean[i]);
    s.sd[i] = std::sqrt(ss / (n_draws - 1));
    for (int q = 0; q < 5; ++q) s.quantiles(i, q) = quantile7(row, kPredictQuantiles[q]);
  }
  return s;
}

}  // namespace spdekit
