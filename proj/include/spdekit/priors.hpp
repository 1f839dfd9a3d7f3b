#pragma once

namespace spdekit {

/// Exponential prior on the standard deviation 1/sqrt(tau), calibrated by
/// P(1/sqrt(tau) > U) = alpha.
struct PcPrecisionPrior {
  double U = 1.0;
  double alpha = 0.01;

  double lambda() const;
  void validate() const;
};

/// Joint prior for (range r, sigma) calibrated by P(r < r0) = alpha_r and
/// P(sigma > sigma0) = alpha_s.
struct PcRangeSigmaPrior {
  double r0 = 1.0;
  double alpha_r = 0.05;
  double sigma0 = 1.0;
  double alpha_s = 0.05;

  double lambda_r() const;
  double lambda_s() const;
  void validate() const;
};

/// log(lambda/2) - 1.5 log(tau) - lambda tau^-1/2. NonPositivePrecision for tau <= 0.
double pc_precision_logdensity(double tau, const PcPrecisionPrior& prior);

/// log of lambda_r r^-2 exp(-lambda_r / r) * lambda_s exp(-lambda_s sigma).
/// NonPositiveArgument for r <= 0 or sigma <= 0.
double pc_range_sigma_logdensity(double r, double sigma, const PcRangeSigmaPrior& prior);

/// Tail probability alpha implied by lambda and U (inverse of the calibration).
double pc_alpha_from_lambda(double lambda, double U);

/// Placeholder prior for the BYM2 weight: uniform on [0, 1].
double bym2_weight_logdensity_uniform(double w);

}  // namespace spdekit
