#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spdekit/areal.hpp"
#include "spdekit/fem.hpp"
#include "spdekit/gmrf.hpp"
#include "spdekit/priors.hpp"
#include "spdekit/sparse.hpp"

namespace spdekit {

/// One latent block u_k with its projection A_k (n_obs x size) and a precision
/// builder over its hyperparameters (internal, unconstrained scale).
struct LatentComponent {
  std::string name;
  Index size = 0;
  SparseMatrix A;
  std::vector<std::string> theta_names;
  Eigen::VectorXd theta_initial;
  std::function<PrecisionModel(const Eigen::VectorXd& theta)> build;
  /// Log prior density of theta on the internal scale (Jacobian included).
  std::function<double(const Eigen::VectorXd& theta)> log_prior;
};

enum class Likelihood { gaussian, poisson };

struct LatentModel {
  std::vector<LatentComponent> components;
  Eigen::MatrixXd fixed_effects;  // n_obs x p, may have no columns
  double fixed_effect_precision = 1e-4;
  Likelihood likelihood = Likelihood::gaussian;
  Eigen::VectorXd y;
  Eigen::VectorXd offset;  // empty means zero
  /// Gaussian noise: theta_0 = log precision with a PC prior, unless fixed.
  PcPrecisionPrior noise_prior{1.0, 0.01};
  double noise_log_precision_initial = 0.0;
  std::optional<double> noise_log_precision_fixed;

  Index n_obs() const { return static_cast<Index>(y.size()); }
  Index n_latent() const;
  Index n_theta() const;
  std::vector<std::string> theta_names() const;
  Eigen::VectorXd theta_initial() const;
  void validate() const;
};

// Component factories. Precision-type hyperparameters are log tau with a PC
// prior on 1/sqrt(tau).

/// Q = tau * structure.Q, keeping the structure's null space and constraints.
LatentComponent scaled_structure_component(std::string name, PrecisionModel structure, SparseMatrix A,
                                           PcPrecisionPrior prior, double log_tau_initial = 0.0);
/// Same with tau fixed (no hyperparameter).
LatentComponent fixed_structure_component(std::string name, PrecisionModel structure, SparseMatrix A,
                                          double tau);
/// theta = (log tau, logit w); uniform prior on w. A maps onto the first
/// (b) half of the joint (b, u*) vector.
LatentComponent bym2_component(std::string name, const AdjacencyGraph& g, SparseMatrix A, PcPrecisionPrior tau_prior);
/// theta = (log range, log sigma) with the joint PC prior.
LatentComponent spde_component(std::string name, const Mesh& mesh, SparseMatrix A, PcRangeSigmaPrior prior,
                               int alpha = 2, double range_initial = 0.0, double sigma_initial = 1.0);

struct LaplaceEvaluation {
  double log_posterior = 0.0;  // unnormalized log pi(theta | y)
  double log_likelihood = 0.0;
  double log_prior_latent = 0.0;
  double log_conditional = 0.0;
  double log_prior_theta = 0.0;
  Eigen::VectorXd mode;        // latent conditional mode (constrained)
  int newton_iterations = 0;
};

/// Laplace approximation of log pi(theta | y) up to a constant.
LaplaceEvaluation evaluate_laplace(const LatentModel& model, const Eigen::VectorXd& theta);
double log_posterior_theta(const LatentModel& model, const Eigen::VectorXd& theta);

/// Gaussian approximation of pi(x | y, theta) at its mode.
PrecisionModel latent_posterior(const LatentModel& model, const Eigen::VectorXd& theta, int* newton_iterations = nullptr);

struct GridConfig {
  double step_sd = 0.5;   // lattice step in posterior standard deviations
  double drop = 2.5;      // keep points within this log-density drop from the mode
  int max_steps = 20;     // per axis and direction; 0 evaluates the mode only
  std::size_t max_points = 100000;
};

struct ThetaPoint {
  Eigen::VectorXd theta;
  double log_posterior = 0.0;
  double weight = 0.0;
  Eigen::VectorXd latent_mean;
  Eigen::VectorXd latent_sd;
  int newton_iterations = 0;
};

struct FitResult {
  std::string strategy;
  std::vector<std::string> theta_names;
  Eigen::VectorXd theta_mode;
  Eigen::MatrixXd theta_hessian;  // of -log pi(theta | y) at the mode
  std::vector<ThetaPoint> points;
  Eigen::VectorXd latent_mean;
  Eigen::VectorXd latent_sd;
  int optimizer_evaluations = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> provenance;
  std::shared_ptr<const LatentModel> model;
};

enum class Strategy { eb, grid };
Strategy parse_strategy(const std::string& name);

FitResult fit(std::shared_ptr<const LatentModel> model, Strategy strategy, const GridConfig& grid = {});

enum class Link { identity, exp };

struct PredictSummary {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  Eigen::MatrixXd quantiles;  // rows: locations, columns: 2.5, 25, 50, 75, 97.5 %
  Eigen::MatrixXd draws;      // locations x n_draws
};

inline constexpr double kPredictQuantiles[5] = {0.025, 0.25, 0.5, 0.75, 0.975};

/// Draws theta from the fit weights, the latent vector from the Gaussian
/// approximation at that theta, and returns summaries of link(A_new x).
PredictSummary predict(const FitResult& fit, const SparseMatrix& A_new, int n_draws, std::uint64_t seed,
                       std::optional<Link> link = std::nullopt);

/// Derivative-free minimisation used by the eb strategy.
struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             double initial_step = 0.5, double tolerance = 1e-9, int max_evaluations = 4000);

/// Central-difference Hessian.
Eigen::MatrixXd finite_difference_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& x, double step = 1e-3);

}  // namespace spdekit
