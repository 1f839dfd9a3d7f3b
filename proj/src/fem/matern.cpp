#include <cmath>
#include <numbers>

#include "spdekit/error.hpp"
#include "spdekit/fem.hpp"

namespace spdekit {

void MaternParams::validate() const {
  require(range > 0 && sigma > 0 && nu > 0 && std::isfinite(range) && std::isfinite(sigma) && std::isfinite(nu),
          ErrorKind::InvalidArgument, "range, sigma and nu must be positive");
}

double matern_correlation(double d, double range, double nu) {
  require(d >= 0, ErrorKind::InvalidArgument, "distance must be >= 0");
  if (d == 0.0) return 1.0;
  const double x = std::sqrt(8.0 * nu) * d / range;
  if (x > 700.0) return 0.0;
  return std::exp((1.0 - nu) * std::log(2.0) - std::lgamma(nu) + nu * std::log(x)) * std::cyl_bessel_k(nu, x);
}

double matern_covariance(double d, const MaternParams& p) {
  p.validate();
  return p.sigma * p.sigma * matern_correlation(d, p.range, p.nu);
}

SpdeParams to_spde(const MaternParams& m) {
  m.validate();
  const double alpha = m.nu + 1.0;
  require(alpha == std::round(alpha) && alpha >= 2 && alpha <= 4, ErrorKind::InvalidArgument,
          "nu must be 1, 2 or 3 (integer alpha = nu + 1)");
  SpdeParams s;
  s.alpha = static_cast<int>(alpha);
  const double kappa = std::sqrt(8.0 * m.nu) / m.range;
  s.log_kappa = std::log(kappa);
  s.log_tau = 0.5 * (std::lgamma(m.nu) - std::lgamma(m.nu + 1.0) - std::log(4.0 * std::numbers::pi) -
                     2.0 * m.nu * s.log_kappa - 2.0 * std::log(m.sigma));
  return s;
}

MaternParams to_matern(const SpdeParams& s) {
  s.validate();
  require(s.alpha >= 2, ErrorKind::InvalidArgument, "alpha = 1 has no Matern counterpart in two dimensions");
  MaternParams m;
  m.nu = s.alpha - 1.0;
  m.range = std::sqrt(8.0 * m.nu) / s.kappa();
  const double log_var = std::lgamma(m.nu) - std::lgamma(m.nu + 1.0) - std::log(4.0 * std::numbers::pi) -
                         2.0 * m.nu * s.log_kappa - 2.0 * s.log_tau;
  m.sigma = std::exp(0.5 * log_var);
  return m;
}

}  // namespace spdekit
