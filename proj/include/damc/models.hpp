#ifndef DAMC_MODELS_HPP
#define DAMC_MODELS_HPP

#include <Eigen/Dense>
#include <vector>

#include "damc/da_core.hpp"
#include "damc/rng.hpp"

namespace damc {

// ---------------------------------------------------------------------------
// Shrinkage regression (lasso and elastic net)
// ---------------------------------------------------------------------------

enum class ColumnPrep { Validate, Center, CenterScale };

/// Linear model with centered design columns, a Laplace shrinkage prior on
/// the coefficients and an inverse-gamma prior on the variance.  The chain
/// state packs [beta(p), sigma2].  The stored latent coordinate is the
/// inverse-Gaussian draw v_j = 1/y_j.
struct LassoModel {
  Eigen::MatrixXd w;
  Eigen::VectorXd z;
  Eigen::VectorXd z_tilde;  // z - mean(z)
  double lambda = 1.0;
  double alpha = 0.0;  // variance prior shape
  double xi = 0.0;     // variance prior rate

  static LassoModel make(Eigen::MatrixXd w, Eigen::VectorXd z, double lambda,
                         double alpha = 0.0, double xi = 0.0,
                         ColumnPrep prep = ColumnPrep::Center);
};

/// Elastic net adds the ridge weight lambda2; lambda2 = 0 reproduces the
/// lasso chain draw for draw.
struct ElasticNetModel {
  LassoModel base;
  double lambda1 = 1.0;
  double lambda2 = 0.0;

  static ElasticNetModel make(Eigen::MatrixXd w, Eigen::VectorXd z, double lambda1,
                              double lambda2, double alpha = 0.0, double xi = 0.0,
                              ColumnPrep prep = ColumnPrep::Center);
};

State lasso_da_step(const LassoModel& model, const State& state, RngStream& rng);
State elastic_net_da_step(const ElasticNetModel& model, const State& state,
                          RngStream& rng);

/// Latent draw v = 1/y given (beta, sigma2); exposed for the distributed
/// engine, which fans these out across workers.
Eigen::VectorXd lasso_draw_latent(const LassoModel& model, const State& state,
                                  RngStream& rng);
double lasso_draw_latent_item(const LassoModel& model, int j, const State& state,
                              RngStream& rng);
/// (sigma2', beta') given the latent vector v.
State lasso_draw_state(const LassoModel& model, const Eigen::VectorXd& v,
                       RngStream& rng);

AugmentedModel lasso_augmented(const LassoModel& model);
AugmentedModel elastic_net_augmented(const ElasticNetModel& model);

// ---------------------------------------------------------------------------
// Binomial logistic regression with Polya-Gamma augmentation
// ---------------------------------------------------------------------------

struct LogisticModel {
  Eigen::MatrixXd w;       // m x p design
  Eigen::VectorXd z;       // success counts
  Eigen::VectorXd trials;  // integer trial counts l_i >= 1
  Eigen::VectorXd mu0;
  Eigen::MatrixXd q;       // prior precision, symmetric PSD
  Eigen::VectorXd kappa;   // z_i - l_i / 2
  bool improper_prior_ok = false;

  /// Q = 0 (flat prior) is accepted only with assert_propriety set: the
  /// posterior must be proper for the chain to make sense.
  static LogisticModel make(Eigen::MatrixXd w, Eigen::VectorXd z,
                            Eigen::VectorXd trials, Eigen::VectorXd mu0,
                            Eigen::MatrixXd q, bool assert_propriety = false);
};

State pg_logistic_da_step(const LogisticModel& model, const State& beta,
                          RngStream& rng);

double logistic_draw_latent_item(const LogisticModel& model, int i, const State& beta,
                                 RngStream& rng);
State logistic_draw_state(const LogisticModel& model, const Eigen::VectorXd& y,
                          RngStream& rng);

AugmentedModel logistic_augmented(const LogisticModel& model);

// ---------------------------------------------------------------------------
// Probit GLMM (random effects chain, fixed effects known)
// ---------------------------------------------------------------------------

struct ProbitBlockSpec {
  Eigen::MatrixXd lambda;  // SPD, unknown-but-fixed input
  Eigen::MatrixXd r;       // SPD, known structure
};

struct ProbitGlmmModel {
  Eigen::MatrixXd w;  // m x p fixed-effect design
  Eigen::MatrixXd v;  // m x q random-effect design
  Eigen::VectorXd beta;
  Eigen::VectorXi z;  // binary responses
  std::vector<ProbitBlockSpec> blocks;

  // Derived quantities, fixed at construction.
  Eigen::MatrixXd a_lambda;       // direct sum of kron(lambda_j, r_j)
  Eigen::MatrixXd post_precision; // V^T V + A^{-1}
  Eigen::MatrixXd v1;             // I - V (V^T V + A^{-1})^{-1} V^T
  Eigen::VectorXd w_beta;         // W beta

  static ProbitGlmmModel make(Eigen::MatrixXd w, Eigen::MatrixXd v,
                              Eigen::VectorXd beta, Eigen::VectorXi z,
                              std::vector<ProbitBlockSpec> blocks);
};

State probit_glmm_da_step(const ProbitGlmmModel& model, const State& u, RngStream& rng);
State probit_haar_pxda_step(const ProbitGlmmModel& model, const State& u,
                            RngStream& rng);

/// The scaling draw of the sandwich move: g from the density proportional
/// to g^(m-1) exp(-(s g^2 - 2 t g) / 2) with s = y' V1 y, t = y' V1 W beta.
double probit_draw_group_scale(const ProbitGlmmModel& model, const Eigen::VectorXd& y,
                               RngStream& rng);

AugmentedModel probit_augmented(const ProbitGlmmModel& model);

/// Kronecker product helper (dense; the random-effect dimension is small).
Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// ---------------------------------------------------------------------------
// Robit (Student-t link) regression
// ---------------------------------------------------------------------------

struct RobitModel {
  Eigen::MatrixXd w;
  Eigen::VectorXi z;
  double nu = 4.0;          // degrees of freedom
  Eigen::VectorXd beta_a;   // prior mean
  Eigen::MatrixXd sigma_a;  // prior precision, SPD

  static RobitModel make(Eigen::MatrixXd w, Eigen::VectorXi z, double nu,
                         Eigen::VectorXd beta_a, Eigen::MatrixXd sigma_a);
};

/// One sweep: latent (u_i, lambda_i) from their conditionals given beta,
/// then beta from its Gaussian conditional.  The latent conditionals are
/// u_i | beta ~ t_nu(w_i' beta, 1) truncated by the response sign and
/// lambda_i | u_i, beta ~ Gamma((nu+1)/2, (nu + (u_i - w_i' beta)^2)/2);
/// both are validated against the restricted joint in the test suite.
State robit_da_step(const RobitModel& model, const State& beta, RngStream& rng);

Eigen::VectorXd robit_draw_latent(const RobitModel& model, const State& beta,
                                  RngStream& rng);  // [u(m), lambda(m)]
State robit_draw_state(const RobitModel& model, const Eigen::VectorXd& y,
                       RngStream& rng);

AugmentedModel robit_augmented(const RobitModel& model);

/// Student-t CDF with nu degrees of freedom (standardized).
double student_t_cdf(double x, double nu);

// ---------------------------------------------------------------------------
// Bayesian quantile regression (two-block chain)
// ---------------------------------------------------------------------------

struct QuantRegModel {
  Eigen::MatrixXd w;  // n x p
  Eigen::VectorXd z;
  double alpha = 0.5;      // quantile level
  Eigen::VectorXd beta0;   // coefficient prior mean
  Eigen::MatrixXd b0;      // coefficient prior covariance, SPD
  double n0 = 1.0;         // scale prior shape x 2
  double t0 = 1.0;         // scale prior rate x 2
  // Derived.
  double theta = 0.0;   // (1 - 2 alpha) / (alpha (1 - alpha))
  double tau2 = 0.0;    // 2 / (alpha (1 - alpha))
  Eigen::MatrixXd b0_inv;
  double logdet_b0 = 0.0;

  static QuantRegModel make(Eigen::MatrixXd w, Eigen::VectorXd z, double alpha,
                            Eigen::VectorXd beta0, Eigen::MatrixXd b0, double n0,
                            double t0);
};

struct QuantRegState {
  Eigen::VectorXd beta;
  Eigen::VectorXd r;  // latent rates, all positive
  double sigma = 1.0;
};

/// Three draws in composition order: sigma from its inverse-gamma
/// conditional given (beta, R); beta from its Gaussian conditional given
/// (R, sigma); each R_i from its generalized-inverse-Gaussian conditional
/// given (beta, sigma).  Conditional parameters are derived from the
/// normal/exponential mixture representation and validated against the
/// restricted joint in the test suite.
QuantRegState quantreg_two_block_step(const QuantRegModel& model,
                                      const QuantRegState& state, RngStream& rng);

/// Adds the positive-reals scaling move on sigma between the draws.
/// Variant 2 draws the scale from its closed inverse-gamma form; variant 1
/// uses rejection with a dominating inverse-gamma envelope.
QuantRegState quantreg_two_block_pxda_step(const QuantRegModel& model, int variant,
                                           const QuantRegState& state, RngStream& rng);

TwoBlockModel quantreg_two_block_model(const QuantRegModel& model);

/// Flat packing [beta(p), r(n), sigma] for traces.
State quantreg_pack(const QuantRegState& s);
QuantRegState quantreg_unpack(const QuantRegModel& model, const State& x);

}  // namespace damc

#endif  // DAMC_MODELS_HPP
