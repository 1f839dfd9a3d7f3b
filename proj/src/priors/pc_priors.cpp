#include <cmath>
#include <limits>

#include "spdekit/error.hpp"
#include "spdekit/priors.hpp"

namespace spdekit {
namespace {

void check_probability(double p, const char* name) {
  require(p > 0 && p < 1, ErrorKind::InvalidArgument, std::string(name) + " must lie in (0, 1)");
}

}  // namespace

double PcPrecisionPrior::lambda() const {
  validate();
  return -std::log(alpha) / U;
}

void PcPrecisionPrior::validate() const {
  require(U > 0 && std::isfinite(U), ErrorKind::InvalidArgument, "U must be positive");
  check_probability(alpha, "alpha");
}

double PcRangeSigmaPrior::lambda_r() const {
  validate();
  return -std::log(alpha_r) * r0;
}

double PcRangeSigmaPrior::lambda_s() const {
  validate();
  return -std::log(alpha_s) / sigma0;
}

void PcRangeSigmaPrior::validate() const {
  require(r0 > 0 && sigma0 > 0 && std::isfinite(r0) && std::isfinite(sigma0), ErrorKind::InvalidArgument,
          "r0 and sigma0 must be positive");
  check_probability(alpha_r, "alpha_r");
  check_probability(alpha_s, "alpha_s");
}

double pc_precision_logdensity(double tau, const PcPrecisionPrior& prior) {
  require(tau > 0 && std::isfinite(tau), ErrorKind::NonPositivePrecision, "precision must be positive");
  const double lambda = prior.lambda();
  return std::log(lambda / 2.0) - 1.5 * std::log(tau) - lambda / std::sqrt(tau);
}

double pc_range_sigma_logdensity(double r, double sigma, const PcRangeSigmaPrior& prior) {
  require(r > 0 && sigma > 0 && std::isfinite(r) && std::isfinite(sigma), ErrorKind::NonPositiveArgument,
          "range and sigma must be positive");
  const double lr = prior.lambda_r(), ls = prior.lambda_s();
  return std::log(lr) - 2.0 * std::log(r) - lr / r + std::log(ls) - ls * sigma;
}

double pc_alpha_from_lambda(double lambda, double U) {
  require(lambda > 0 && U > 0, ErrorKind::InvalidArgument, "lambda and U must be positive");
  return std::exp(-lambda * U);
}

double bym2_weight_logdensity_uniform(double w) {
  require(w >= 0 && w <= 1, ErrorKind::WeightOutOfRange, "BYM2 weight must lie in [0, 1]");
  return 0.0;
}

}  // namespace spdekit
