#ifndef DAMC_DISTRIBUTIONS_HPP
#define DAMC_DISTRIBUTIONS_HPP

#include <Eigen/Dense>

#include "damc/rng.hpp"

namespace damc {

struct InverseGaussianParams {
  double kappa;  // mean, > 0
  double psi;    // shape, > 0
};

struct PolyaGammaParams {
  double a;  // shape, > 0 (integer in every model use)
  double b;  // tilt, >= 0
};

/// Inverse-Gaussian(kappa, psi) draw via the Michael-Schucany-Haas
/// transformation with one uniform root selection.
double sample_inverse_gaussian(const InverseGaussianParams& params, RngStream& rng);

double log_density_inverse_gaussian(double u, const InverseGaussianParams& params);

/// PG(a, b) draw.  Integer a uses an exact alternating-series rejection
/// sampler for PG(1, b) convolved a times; non-integer a falls back to the
/// truncated Gamma-series representation (200 terms; the truncation bias on
/// the mean is below a * 2.6e-4, see the implementation note).
double sample_polya_gamma(const PolyaGammaParams& params, RngStream& rng);

/// PG(a, b) density at theta > 0, evaluated by truncating the alternating
/// series once the alternating-remainder bound drops below tol.
/// Throws convergence_error if the bound is not met within the term cap.
double density_polya_gamma(double theta, const PolyaGammaParams& params,
                           double tol = 1e-12);

/// Normal(mu, sigma2) truncated to (0, inf) when e = 1 and to (-inf, 0]
/// when e = 0.  Inverse-CDF in the body of the distribution; switches to an
/// exponential-envelope rejection sampler (Robert 1995) when the truncation
/// boundary lies more than 5 standard deviations into the tail, where the
/// CDF underflows.
double sample_truncated_normal(double mu, double sigma2, int e, RngStream& rng);

/// Generalized inverse Gaussian with density proportional to
/// x^(p-1) exp(-(a x + b / x) / 2) on x > 0.  Ratio-of-uniforms with the
/// region shifted to the mode; the bounding rectangle is exact (stationary
/// points come from a closed-form cubic).
double sample_generalized_inverse_gaussian(double p, double a, double b,
                                           RngStream& rng);

double log_density_generalized_inverse_gaussian_unnorm(double x, double p,
                                                       double a, double b);

/// Reciprocal of a Gamma(shape, rate) draw.
double sample_inverse_gamma(double shape, double rate, RngStream& rng);

enum class MvnParam { Covariance, Precision };

/// Gaussian draw using one lower-triangular factorization per call.
/// The matrix is interpreted per the parameterization flag. Throws
/// not_spd_error when a Cholesky pivot falls below 1e-12 times the largest
/// diagonal entry.
Eigen::VectorXd sample_multivariate_normal(const Eigen::VectorXd& mean,
                                           const Eigen::MatrixXd& matrix,
                                           MvnParam param, RngStream& rng);

/// Asymmetric Laplace density alpha(1-alpha) exp(-eps (alpha - 1{eps<0})),
/// the check-loss likelihood with alpha-quantile zero.
double density_asymmetric_laplace(double eps, double alpha);

/// Lower Cholesky factor of an SPD matrix.  Pivot tolerance
/// 1e-12 * max diagonal; failure throws not_spd_error.
Eigen::MatrixXd cholesky_spd(const Eigen::MatrixXd& m);

}  // namespace damc

#endif  // DAMC_DISTRIBUTIONS_HPP
