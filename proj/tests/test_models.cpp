#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <vector>

#include "damc/da_core.hpp"
#include "damc/diagnostics.hpp"
#include "damc/distributions.hpp"
#include "damc/errors.hpp"
#include "damc/models.hpp"
#include "support.hpp"

using namespace damc;
using testsupport::grid_moments_1d;
using testsupport::grid_moments_2d;

namespace {

// Fixed toy datasets shared with the acceptance suite.
Eigen::MatrixXd lasso_design() {
  Eigen::MatrixXd w(5, 1);
  w << 1.2, -0.7, 0.4, -1.5, 0.6;
  return w;
}
Eigen::VectorXd lasso_response() {
  Eigen::VectorXd z(5);
  z << 0.8, -0.5, 0.3, -1.2, 0.9;
  return z;
}

double lasso_log_target(const LassoModel& m, double beta, double sigma2) {
  // Joint posterior of (beta, sigma2) under the flat intercept-integrated
  // likelihood and the lambda shrinkage prior, alpha = xi = 0.
  const double ssr = (m.z_tilde - m.w * Eigen::VectorXd::Constant(1, beta)).squaredNorm();
  const double nm = static_cast<double>(m.w.rows());
  return -((nm - 1.0 + 1.0) / 2.0) * std::log(sigma2) -
         (ssr + 2.0 * m.lambda * std::sqrt(sigma2) * std::fabs(beta)) / (2.0 * sigma2) -
         std::log(sigma2);
}

double en_log_target(const ElasticNetModel& m, double beta, double sigma2) {
  const double ssr =
      (m.base.z_tilde - m.base.w * Eigen::VectorXd::Constant(1, beta)).squaredNorm();
  const double nm = static_cast<double>(m.base.w.rows());
  return -((nm - 1.0 + 1.0) / 2.0) * std::log(sigma2) -
         (ssr + 2.0 * m.lambda1 * std::sqrt(sigma2) * std::fabs(beta) +
          m.lambda2 * beta * beta) /
             (2.0 * sigma2) -
         std::log(sigma2);
}

/// Batch-means SE of the variance estimate: batch means of the squared
/// deviations from the overall mean.
BatchMeans variance_batch_means(const Eigen::VectorXd& trace) {
  const double mean = trace.mean();
  return batch_means_se((trace.array() - mean).square().matrix());
}

}  // namespace

TEST_CASE("lasso conditional structure") {
  Eigen::MatrixXd w(2, 1);
  w << 1.0, -1.0;
  Eigen::VectorXd z(2);
  z << 1.0, -1.0;
  const auto model = LassoModel::make(w, z, 1.0, 0.0, 0.0, ColumnPrep::Validate);

  SUBCASE("coefficient conditional mean at y = 1 is 2/3") {
    // (W'W + D^-1)^-1 W'z = (2 + 1)^-1 * 2.
    RngStream rng(900, 0);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(1);  // v = 1/y = 1
    double acc = 0.0;
    const int n = 200000;
    double var_acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto s = lasso_draw_state(model, v, rng);
      acc += s(0);
      var_acc += s(0) * s(0);
    }
    const double mean = acc / n;
    const double sd = std::sqrt(var_acc / n - mean * mean);
    CHECK(std::fabs(mean - 2.0 / 3.0) < 3.0 * sd / std::sqrt(n));
  }
  SUBCASE("variance conditional matches its closed-form mean") {
    // sigma2' ~ IG((m-1)/2 + alpha, quad/2 + xi); for m = 2, alpha = 0 the
    // shape is 1/2 and the mean diverges, so use a model with alpha = 2.
    const auto m2 = LassoModel::make(w, z, 1.0, 2.0, 0.5, ColumnPrep::Validate);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(1);
    const double quad = z.squaredNorm() - (2.0 / 3.0) * 2.0;  // z'z - z'W M^-1 W'z
    const double shape = (2.0 - 1.0) / 2.0 + 2.0;
    const double rate = quad / 2.0 + 0.5;
    RngStream rng(901, 0);
    double acc = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) acc += lasso_draw_state(m2, v, rng)(1);
    CHECK(acc / n == doctest::Approx(rate / (shape - 1.0)).epsilon(0.02));
  }
  SUBCASE("near-zero coefficient takes the exact gamma limit") {
    RngStream rng(902, 0);
    State s(2);
    s << 0.0, 1.0;
    for (int i = 0; i < 100; ++i) {
      const double v = lasso_draw_latent_item(model, 0, s, rng);
      CHECK(v > 0.0);
      CHECK(std::isfinite(v));
    }
  }
  SUBCASE("centering is enforced") {
    Eigen::MatrixXd off(2, 1);
    off << 1.0, 2.0;
    CHECK_THROWS_AS(LassoModel::make(off, z, 1.0, 0.0, 0.0, ColumnPrep::Validate),
                    invalid_parameter);
  }
}

TEST_CASE("lasso chain matches the dense-grid posterior") {
  const auto model = LassoModel::make(lasso_design(), lasso_response(), 1.0);
  const auto oracle = grid_moments_2d(
      [&](double b, double s2) { return lasso_log_target(model, b, s2); }, -3.0, 3.0,
      1e-5, 400.0, 500, 800, /*log_y=*/true);

  RngStream rng(903, 0);
  State x(2);
  x << 0.0, 1.0;
  const KernelFn kernel = [&](const State& s, RngStream& r) {
    return lasso_da_step(model, s, r);
  };
  const auto trace = run_chain(kernel, x, 80000, 2000, rng, "da", "lasso");
  const auto bm_beta = batch_means_se(trace.draws.col(0));
  const auto bm_s2 = batch_means_se(trace.draws.col(1));
  CHECK(std::fabs(bm_beta.mean - oracle.mean_x) < 3.0 * bm_beta.se);
  CHECK(std::fabs(bm_s2.mean - oracle.mean_y) < 3.0 * bm_s2.se);
  const auto vb = variance_batch_means(trace.draws.col(0));
  CHECK(std::fabs(vb.mean - oracle.var_x) < 3.0 * vb.se);

  SUBCASE("dispersed starts agree") {
    RngStream rng2(904, 0);
    State far(2);
    far << 2.5, 9.0;
    const auto t2 = run_chain(kernel, far, 80000, 2000, rng2);
    const auto bm2 = batch_means_se(t2.draws.col(0));
    CHECK(std::fabs(bm2.mean - bm_beta.mean) <
          3.0 * std::sqrt(bm2.se * bm2.se + bm_beta.se * bm_beta.se));
  }
}

TEST_CASE("lasso conditional mode matches the soft-threshold solution") {
  const auto model = LassoModel::make(lasso_design(), lasso_response(), 1.3);
  const double sigma2 = 0.8, sigma = std::sqrt(sigma2);
  const double wz = (model.w.transpose() * model.z_tilde)(0);
  const double ww = (model.w.transpose() * model.w)(0);
  // argmin SSR + 2 lambda sigma |beta|.
  const double t = model.lambda * sigma;
  const double closed =
      (std::fabs(wz) <= t) ? 0.0 : (wz - (wz > 0 ? t : -t)) / ww;
  // Dense grid argmax of the conditional posterior.
  double best = -1e300, arg = 0.0;
  for (int i = 0; i <= 40000; ++i) {
    const double b = -2.0 + 4.0 * i / 40000.0;
    const double ssr = (model.z_tilde - model.w * Eigen::VectorXd::Constant(1, b)).squaredNorm();
    const double lp = -(ssr + 2.0 * model.lambda * sigma * std::fabs(b)) / (2.0 * sigma2);
    if (lp > best) {
      best = lp;
      arg = b;
    }
  }
  CHECK(std::fabs(arg - closed) <= 2e-4);
}

TEST_CASE("elastic net") {
  SUBCASE("lambda2 = 0 reproduces the lasso trajectory draw for draw") {
    const auto lasso = LassoModel::make(lasso_design(), lasso_response(), 1.0);
    const auto en = ElasticNetModel::make(lasso_design(), lasso_response(), 1.0, 0.0);
    RngStream r1(905, 1), r2(905, 1);
    State x(2);
    x << 0.4, 1.0;
    State a = x, b = x;
    for (int i = 0; i < 200; ++i) {
      a = lasso_da_step(lasso, a, r1);
      b = elastic_net_da_step(en, b, r2);
      CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  SUBCASE("chain matches the dense-grid posterior") {
    const auto en = ElasticNetModel::make(lasso_design(), lasso_response(), 1.0, 0.7);
    const auto oracle = grid_moments_2d(
        [&](double b, double s2) { return en_log_target(en, b, s2); }, -3.0, 3.0, 1e-5,
        400.0, 500, 800, /*log_y=*/true);
    RngStream rng(906, 0);
    State x(2);
    x << 0.0, 1.0;
    const auto trace = run_chain(
        [&](const State& s, RngStream& r) { return elastic_net_da_step(en, s, r); }, x,
        80000, 2000, rng);
    const auto bm = batch_means_se(trace.draws.col(0));
    CHECK(std::fabs(bm.mean - oracle.mean_x) < 3.0 * bm.se);
    const auto bs = batch_means_se(trace.draws.col(1));
    CHECK(std::fabs(bs.mean - oracle.mean_y) < 3.0 * bs.se);
  }
  SUBCASE("ridge-shifted latent diagonal stays inside (0, 1/lambda2)") {
    const auto en = ElasticNetModel::make(lasso_design(), lasso_response(), 1.0, 0.7);
    const auto aug = elastic_net_augmented(en);
    RngStream rng(907, 0);
    State x(2);
    x << 0.4, 1.0;
    for (int i = 0; i < 200; ++i) {
      const auto v = aug.draw_y_given_x(x, rng);
      for (int j = 0; j < v.size(); ++j) {
        const double dtilde = 1.0 / (en.lambda2 + v(j));
        CHECK(dtilde > 0.0);
        CHECK(dtilde < 1.0 / en.lambda2);
      }
    }
  }
}

TEST_CASE("polya-gamma logistic regression") {
  SUBCASE("kappa is z - trials/2") {
    Eigen::MatrixXd w(2, 1);
    w << 0.3, -0.8;
    Eigen::VectorXd z(2), l(2), mu0(1);
    z << 1.0, 0.0;
    l << 1.0, 1.0;
    mu0 << 0.0;
    const auto m = LogisticModel::make(w, z, l, mu0, Eigen::MatrixXd::Identity(1, 1));
    CHECK(m.kappa(0) == doctest::Approx(0.5));
    CHECK(m.kappa(1) == doctest::Approx(-0.5));
  }
  SUBCASE("zero design collapses to the prior") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 2);
    Eigen::VectorXd z(3), l(3);
    z << 1, 0, 1;
    l << 1, 1, 1;
    const auto m = LogisticModel::make(w, z, l, Eigen::VectorXd::Zero(2),
                                       Eigen::MatrixXd::Identity(2, 2));
    RngStream rng(908, 0);
    State beta(2);
    beta << 5.0, -7.0;  // irrelevant
    const int n = 200000;
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    double acc_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto b = pg_logistic_da_step(m, beta, rng);
      acc += b;
      acc_sq += b(0) * b(0);
    }
    CHECK(std::fabs(acc(0) / n) < 3.0 / std::sqrt(n));
    CHECK(std::fabs(acc(1) / n) < 3.0 / std::sqrt(n));
    CHECK(acc_sq / n == doctest::Approx(1.0).epsilon(0.02));
  }
  SUBCASE("chain posterior matches 1-D quadrature") {
    Eigen::MatrixXd w(3, 1);
    w << 1.0, -0.6, 0.3;
    Eigen::VectorXd z(3), l(3), mu0(1);
    z << 1, 0, 1;
    l << 1, 1, 1;
    mu0 << 0.0;
    const auto m = LogisticModel::make(w, z, l, mu0, Eigen::MatrixXd::Identity(1, 1));
    auto logpost = [&](double b) {
      double acc = -0.5 * b * b;
      for (int i = 0; i < 3; ++i) {
        const double eta = w(i, 0) * b;
        acc += z(i) * eta - l(i) * std::log1p(std::exp(eta));
      }
      return acc;
    };
    const auto oracle = grid_moments_1d(logpost, -8.0, 8.0);
    RngStream rng(909, 0);
    State beta = State::Zero(1);
    const auto trace = run_chain(
        [&](const State& s, RngStream& r) { return pg_logistic_da_step(m, s, r); },
        beta, 60000, 1000, rng);
    const auto bm = batch_means_se(trace.draws.col(0));
    CHECK(std::fabs(bm.mean - oracle.mean_x) < 3.0 * bm.se);
  }
  SUBCASE("flat prior requires the propriety flag") {
    Eigen::MatrixXd w(2, 1);
    w << 0.5, -0.5;
    Eigen::VectorXd z(2), l(2);
    z << 1, 0;
    l << 1, 1;
    CHECK_THROWS_AS(LogisticModel::make(w, z, l, Eigen::VectorXd::Zero(1),
                                        Eigen::MatrixXd::Zero(1, 1)),
                    invalid_parameter);
    CHECK_NOTHROW(LogisticModel::make(w, z, l, Eigen::VectorXd::Zero(1),
                                      Eigen::MatrixXd::Zero(1, 1), true));
  }
}

namespace {

ProbitGlmmModel tiny_probit() {
  Eigen::MatrixXd w(2, 1);
  w << 0.5, -0.3;
  Eigen::MatrixXd v(2, 1);
  v << 1.0, 0.7;
  Eigen::VectorXd beta(1);
  beta << 0.8;
  Eigen::VectorXi z(2);
  z << 1, 0;
  std::vector<ProbitBlockSpec> blocks(1);
  blocks[0].lambda = Eigen::MatrixXd::Constant(1, 1, 0.9);
  blocks[0].r = Eigen::MatrixXd::Identity(1, 1);
  return ProbitGlmmModel::make(w, v, beta, z, blocks);
}

double probit_log_post(const ProbitGlmmModel& m, double u) {
  double acc = -0.5 * u * u / m.a_lambda(0, 0);
  for (int i = 0; i < m.v.rows(); ++i) {
    const double eta = m.w_beta(i) + m.v(i, 0) * u;
    const double p = normal_cdf(eta);
    acc += (m.z(i) == 1) ? std::log(std::max(p, 1e-300))
                         : std::log(std::max(1.0 - p, 1e-300));
  }
  return acc;
}

}  // namespace

TEST_CASE("probit glmm") {
  const auto model = tiny_probit();
  SUBCASE("truncation signs follow the responses") {
    RngStream rng(910, 0);
    const auto aug = probit_augmented(model);
    State u = State::Zero(1);
    for (int i = 0; i < 500; ++i) {
      const auto y = aug.draw_y_given_x(u, rng);
      CHECK(y(0) > 0.0);
      CHECK(y(1) <= 0.0);
    }
  }
  SUBCASE("zero random-effect design returns the prior on effects") {
    Eigen::MatrixXd v0 = Eigen::MatrixXd::Zero(2, 1);
    Eigen::MatrixXd w(2, 1);
    w << 0.5, -0.3;
    Eigen::VectorXd beta(1);
    beta << 0.8;
    Eigen::VectorXi z(2);
    z << 1, 0;
    std::vector<ProbitBlockSpec> blocks(1);
    blocks[0].lambda = Eigen::MatrixXd::Constant(1, 1, 0.9);
    blocks[0].r = Eigen::MatrixXd::Identity(1, 1);
    const auto m0 = ProbitGlmmModel::make(w, v0, beta, z, blocks);
    RngStream rng(911, 0);
    State u(1);
    u << 3.0;
    const int n = 200000;
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = probit_glmm_da_step(m0, u, rng)(0);
      acc += d;
      acc2 += d * d;
    }
    CHECK(std::fabs(acc / n) < 3.0 * std::sqrt(0.9 / n));
    CHECK(acc2 / n == doctest::Approx(0.9).epsilon(0.02));
  }
  SUBCASE("da chain matches 1-D quadrature of the effect posterior") {
    const auto oracle =
        grid_moments_1d([&](double u) { return probit_log_post(model, u); }, -6.0, 6.0);
    RngStream rng(912, 0);
    const auto trace = run_chain(
        [&](const State& s, RngStream& r) { return probit_glmm_da_step(model, s, r); },
        State::Zero(1), 60000, 1000, rng);
    const auto bm = batch_means_se(trace.draws.col(0));
    CHECK(std::fabs(bm.mean - oracle.mean_x) < 3.0 * bm.se);
  }
  SUBCASE("pxda chain targets the same posterior") {
    const auto oracle =
        grid_moments_1d([&](double u) { return probit_log_post(model, u); }, -6.0, 6.0);
    RngStream rng(913, 0);
    const auto trace = run_chain(
        [&](const State& s, RngStream& r) {
          return probit_haar_pxda_step(model, s, r);
        },
        State::Zero(1), 60000, 1000, rng);
    const auto bm = batch_means_se(trace.draws.col(0));
    CHECK(std::fabs(bm.mean - oracle.mean_x) < 3.0 * bm.se);
  }
  SUBCASE("zero-shift scale draw is chi-square in g^2 s") {
    // With beta = 0 the linear term drops and g^2 y'V1y ~ chi^2_m.
    Eigen::MatrixXd w(2, 1);
    w << 0.5, -0.3;
    Eigen::MatrixXd v(2, 1);
    v << 1.0, 0.7;
    Eigen::VectorXi z(2);
    z << 1, 0;
    std::vector<ProbitBlockSpec> blocks(1);
    blocks[0].lambda = Eigen::MatrixXd::Constant(1, 1, 0.9);
    blocks[0].r = Eigen::MatrixXd::Identity(1, 1);
    const auto m0 = ProbitGlmmModel::make(w, v, Eigen::VectorXd::Zero(1), z, blocks);
    RngStream rng(914, 0);
    const auto aug = probit_augmented(m0);
    State u = State::Zero(1);
    const int n = 40000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto y = aug.draw_y_given_x(u, rng);
      const double s = y.dot(m0.v1 * y);
      const double g = probit_draw_group_scale(m0, y, rng);
      acc += g * g * s;
    }
    const double mean = acc / n;
    const double se = std::sqrt(2.0 * 2.0 / n);  // var chi^2_m = 2m, m = 2
    CHECK(std::fabs(mean - 2.0) < 3.0 * se);
  }
}

TEST_CASE("robit regression") {
  Eigen::MatrixXd w(2, 1);
  w << 1.0, -0.8;
  Eigen::VectorXi z(2);
  z << 1, 0;
  Eigen::VectorXd beta_a(1);
  beta_a << 0.2;
  Eigen::MatrixXd sigma_a = Eigen::MatrixXd::Constant(1, 1, 1.5);
  const auto model = RobitModel::make(w, z, 4.0, beta_a, sigma_a);

  SUBCASE("latent precision draws are positive") {
    RngStream rng(915, 0);
    State beta = State::Zero(1);
    for (int i = 0; i < 300; ++i) {
      const auto y = robit_draw_latent(model, beta, rng);
      CHECK(y(2) > 0.0);
      CHECK(y(3) > 0.0);
      CHECK(y(0) > 0.0);   // z_1 = 1
      CHECK(y(1) <= 0.0);  // z_2 = 0
    }
  }
  SUBCASE("chain matches 1-D quadrature of the robit posterior") {
    auto logpost = [&](double b) {
      double acc = -0.5 * sigma_a(0, 0) * (b - beta_a(0)) * (b - beta_a(0));
      for (int i = 0; i < 2; ++i) {
        const double f = student_t_cdf(w(i, 0) * b, 4.0);
        acc += (z(i) == 1) ? std::log(std::max(f, 1e-300))
                           : std::log(std::max(1.0 - f, 1e-300));
      }
      return acc;
    };
    const auto oracle = grid_moments_1d(logpost, -7.0, 7.0);
    RngStream rng(916, 0);
    const auto trace = run_chain(
        [&](const State& s, RngStream& r) { return robit_da_step(model, s, r); },
        State::Zero(1), 60000, 1000, rng);
    const auto bm = batch_means_se(trace.draws.col(0));
    CHECK(std::fabs(bm.mean - oracle.mean_x) < 3.0 * bm.se);
  }
  SUBCASE("large dof approaches the probit posterior") {
    const auto heavy = RobitModel::make(w, z, 1e4, Eigen::VectorXd::Zero(1), sigma_a);
    // Matching probit chain: effects model with W = 0, V = design,
    // A = prior covariance.
    std::vector<ProbitBlockSpec> blocks(1);
    blocks[0].lambda = Eigen::MatrixXd::Constant(1, 1, 1.0 / 1.5);
    blocks[0].r = Eigen::MatrixXd::Identity(1, 1);
    const auto probit = ProbitGlmmModel::make(Eigen::MatrixXd::Zero(2, 1),
                                              Eigen::MatrixXd(w.cast<double>()),
                                              Eigen::VectorXd::Zero(1), z, blocks);
    RngStream r1(917, 0), r2(918, 0);
    const auto t_robit = run_chain(
        [&](const State& s, RngStream& r) { return robit_da_step(heavy, s, r); },
        State::Zero(1), 60000, 1000, r1);
    const auto t_probit = run_chain(
        [&](const State& s, RngStream& r) { return probit_glmm_da_step(probit, s, r); },
        State::Zero(1), 60000, 1000, r2);
    const auto ba = batch_means_se(t_robit.draws.col(0));
    const auto bb = batch_means_se(t_probit.draws.col(0));
    CHECK(std::fabs(ba.mean - bb.mean) <
          3.0 * std::sqrt(ba.se * ba.se + bb.se * bb.se));
  }
  SUBCASE("derived conditionals match the restricted joint") {
    // lambda_1 given (beta, u): restriction of the full joint.
    RngStream rng(919, 0);
    const double beta = 0.4, u1 = 0.9;
    const double mu = w(0, 0) * beta;
    std::vector<double> draws(20000);
    for (auto& d : draws)
      d = rng.gamma((model.nu + 1.0) / 2.0, (model.nu + (u1 - mu) * (u1 - mu)) / 2.0);
    auto restricted = [&](double lam) {
      // phi(u1; mu, 1/lam) Gamma(lam; nu/2, nu/2) as a function of lam.
      return std::sqrt(lam) * std::exp(-0.5 * lam * (u1 - mu) * (u1 - mu)) *
             std::pow(lam, model.nu / 2.0 - 1.0) * std::exp(-model.nu * lam / 2.0);
    };
    std::vector<double> edges;
    for (double q = 0.2; q < 6.0; q += 0.2) edges.push_back(q);
    const double p = testsupport::chi_square_gof_pvalue(draws, edges, restricted,
                                                        1e-8, 60.0);
    CHECK(p > 0.001);

    // u_1 given beta: truncated t, against the lambda-marginalized joint.
    boost::math::students_t tdist(model.nu);
    std::vector<double> udraws(20000);
    for (auto& d : udraws) {
      const auto y = robit_draw_latent(model, State::Constant(1, beta), rng);
      d = y(0);
    }
    auto trestricted = [&](double uu) {
      return uu > 0.0 ? boost::math::pdf(tdist, uu - mu) : 0.0;
    };
    std::vector<double> uedges;
    for (double q = 0.25; q < 4.0; q += 0.25) uedges.push_back(q);
    const double pu = testsupport::chi_square_gof_pvalue(udraws, uedges, trestricted,
                                                         1e-9, 40.0);
    CHECK(pu > 0.001);
  }
}

namespace {

QuantRegModel tiny_quantreg() {
  Eigen::MatrixXd w(4, 1);
  w << 0.9, -0.4, 1.3, -1.1;
  Eigen::VectorXd z(4);
  z << 0.7, -0.2, 1.5, -0.9;
  Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(1);
  Eigen::MatrixXd b0 = Eigen::MatrixXd::Constant(1, 1, 4.0);
  return QuantRegModel::make(w, z, 0.3, beta0, b0, 2.0, 2.0);
}

double quantreg_log_post(const QuantRegModel& m, double beta, double sigma) {
  // Marginal over the latent rates via the asymmetric-Laplace likelihood.
  double acc = -0.5 * (beta - m.beta0(0)) * (beta - m.beta0(0)) / m.b0(0, 0);
  acc += -(m.n0 / 2.0 + 1.0) * std::log(sigma) - m.t0 / (2.0 * sigma);
  for (int i = 0; i < m.z.size(); ++i) {
    const double eps = (m.z(i) - m.w(i, 0) * beta) / sigma;
    acc += std::log(density_asymmetric_laplace(eps, m.alpha)) - std::log(sigma);
  }
  return acc;
}

}  // namespace

TEST_CASE("bayesian quantile regression") {
  const auto model = tiny_quantreg();

  SUBCASE("alpha = 1/2 gives theta 0 and tau^2 8") {
    const auto half = QuantRegModel::make(model.w, model.z, 0.5, model.beta0, model.b0,
                                          2.0, 2.0);
    CHECK(half.theta == doctest::Approx(0.0));
    CHECK(half.tau2 == doctest::Approx(8.0));
  }
  SUBCASE("mixture identity: rate-mixed normal equals the scaled likelihood") {
    RngStream rng(920, 0);
    const double beta = 0.3, sigma = 1.4, zi = 0.7, wi = 0.9;
    const int n = 2000000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = sigma * rng.exponential();  // Exp with mean sigma
      const double var = r * sigma * model.tau2;
      const double d = zi - wi * beta - model.theta * r;
      acc += std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * M_PI * var);
    }
    const double target =
        density_asymmetric_laplace((zi - wi * beta) / sigma, model.alpha) / sigma;
    CHECK(acc / n == doctest::Approx(target).epsilon(0.02));
  }
  SUBCASE("two-block chain matches the dense-grid posterior") {
    const auto oracle = grid_moments_2d(
        [&](double b, double s) { return quantreg_log_post(model, b, s); }, -2.5, 3.0,
        1e-4, 200.0, 500, 800, /*log_y=*/true);
    RngStream rng(921, 0);
    QuantRegState st{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(4), 1.0};
    const int n = 80000;
    Eigen::VectorXd betas(n), sigmas(n);
    for (int i = 0; i < 2000; ++i) st = quantreg_two_block_step(model, st, rng);
    for (int i = 0; i < n; ++i) {
      st = quantreg_two_block_step(model, st, rng);
      betas(i) = st.beta(0);
      sigmas(i) = st.sigma;
    }
    const auto bb = batch_means_se(betas);
    CHECK(std::fabs(bb.mean - oracle.mean_x) < 3.0 * bb.se);
    const auto bs = batch_means_se(sigmas);
    CHECK(std::fabs(bs.mean - oracle.mean_y) < 3.0 * bs.se);
  }
  SUBCASE("sandwich variants share the stationary law") {
    RngStream r1(922, 0), r2(923, 0), r3(924, 0);
    const int n = 60000;
    auto run_variant = [&](int variant, RngStream& rng) {
      QuantRegState st{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(4), 1.0};
      Eigen::VectorXd betas(n);
      for (int i = 0; i < 1000; ++i)
        st = quantreg_two_block_pxda_step(model, variant, st, rng);
      for (int i = 0; i < n; ++i) {
        st = quantreg_two_block_pxda_step(model, variant, st, rng);
        betas(i) = st.beta(0);
      }
      return betas;
    };
    const auto b1 = run_variant(1, r1);
    const auto b2 = run_variant(2, r2);
    QuantRegState st{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(4), 1.0};
    Eigen::VectorXd b0v(n);
    for (int i = 0; i < 1000; ++i) st = quantreg_two_block_step(model, st, r3);
    for (int i = 0; i < n; ++i) {
      st = quantreg_two_block_step(model, st, r3);
      b0v(i) = st.beta(0);
    }
    const auto s1 = batch_means_se(b1), s2 = batch_means_se(b2), s0 = batch_means_se(b0v);
    CHECK(std::fabs(s1.mean - s2.mean) <
          3.0 * std::sqrt(s1.se * s1.se + s2.se * s2.se));
    CHECK(std::fabs(s2.mean - s0.mean) <
          3.0 * std::sqrt(s2.se * s2.se + s0.se * s0.se));
  }
  SUBCASE("trivial group reduces the generic sandwich to the plain step") {
    const auto tb = quantreg_two_block_model(model);
    TwoBlockHaar haar;
    haar.group = multiplicative_group(1);
    haar.draw_g = [](const State&, const State&, const State&, int, RngStream&) {
      return 1.0;
    };
    RngStream r1(925, 0), r2(925, 0);
    TwoBlockState x{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(4)};
    for (int i = 0; i < 50; ++i) {
      const auto a = two_block_pxda_step(tb, haar, 1, x, r1);
      const auto b = two_block_da_step(tb, x, r2);
      CHECK((a.u - b.u).cwiseAbs().maxCoeff() == 0.0);
      CHECK((a.v - b.v).cwiseAbs().maxCoeff() == 0.0);
      x = b;
    }
  }
  SUBCASE("derived conditionals match the restricted joint") {
    RngStream rng(926, 0);
    const Eigen::VectorXd beta = Eigen::VectorXd::Constant(1, 0.4);
    const Eigen::VectorXd rfix = (Eigen::VectorXd(4) << 0.8, 1.1, 0.5, 1.7).finished();
    // sigma given (beta, R): build the restriction from the raw model
    // density, not from the derived inverse-gamma form.
    auto restricted_sigma = [&](double s) {
      if (s <= 0.0) return 0.0;
      double logp = -(model.n0 / 2.0 + 1.0) * std::log(s) - model.t0 / (2.0 * s);
      for (int i = 0; i < 4; ++i) {
        const double var = rfix(i) * s * model.tau2;
        const double d = model.z(i) - model.w(i, 0) * beta(0) - model.theta * rfix(i);
        logp += -0.5 * std::log(var) - 0.5 * d * d / var;
        logp += -std::log(s) - rfix(i) / s;
      }
      return std::exp(logp);
    };
    const auto tb = quantreg_two_block_model(model);
    std::vector<double> sdraws(20000);
    for (auto& d : sdraws) d = tb.draw_y_given_x(beta, rfix, rng)(0);
    std::vector<double> edges;
    for (double q = 0.4; q < 6.0; q += 0.2) edges.push_back(q);
    CHECK(testsupport::chi_square_gof_pvalue(sdraws, edges, restricted_sigma, 1e-4,
                                             80.0) > 0.001);

    // R_1 given (beta, sigma).
    const double sig = 1.2;
    auto restricted_r = [&](double r) {
      if (r <= 0.0) return 0.0;
      const double var = r * sig * model.tau2;
      const double d = model.z(0) - model.w(0, 0) * beta(0) - model.theta * r;
      return std::exp(-0.5 * d * d / var - r / sig) / std::sqrt(var);
    };
    std::vector<double> rdraws(20000);
    for (auto& d : rdraws) {
      const auto rv = tb.draw_v_given_uy(beta, State::Constant(1, sig), rng);
      d = rv(0);
    }
    std::vector<double> redges;
    for (double q = 0.1; q < 4.0; q += 0.13) redges.push_back(q);
    CHECK(testsupport::chi_square_gof_pvalue(rdraws, redges, restricted_r, 1e-9, 60.0) >
          0.001);

    // beta given (R, sigma).
    auto restricted_beta = [&](double b) {
      double logp = -0.5 * (b - model.beta0(0)) * (b - model.beta0(0)) / model.b0(0, 0);
      for (int i = 0; i < 4; ++i) {
        const double var = rfix(i) * sig * model.tau2;
        const double d = model.z(i) - model.w(i, 0) * b - model.theta * rfix(i);
        logp += -0.5 * d * d / var;
      }
      return std::exp(logp);
    };
    std::vector<double> bdraws(20000);
    for (auto& d : bdraws) d = tb.draw_u_given_vy(rfix, State::Constant(1, sig), rng)(0);
    std::vector<double> bedges;
    for (double q = -2.0; q < 3.0; q += 0.2) bedges.push_back(q);
    CHECK(testsupport::chi_square_gof_pvalue(bdraws, bedges, restricted_beta, -12.0,
                                             12.0) > 0.001);
  }
}

TEST_CASE("every chain agrees across dispersed starting points") {
  auto agree = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const auto sa = batch_means_se(a), sb = batch_means_se(b);
    return std::fabs(sa.mean - sb.mean) <
           3.0 * std::sqrt(sa.se * sa.se + sb.se * sb.se);
  };
  const int n = 40000, burn = 2000;

  SUBCASE("elastic net") {
    const auto en = ElasticNetModel::make(lasso_design(), lasso_response(), 1.0, 0.7);
    auto runit = [&](State init, std::uint64_t seed) {
      RngStream rng(seed, 0);
      return run_chain(
          [&](const State& s, RngStream& r) { return elastic_net_da_step(en, s, r); },
          init, n, burn, rng);
    };
    State near(2), far(2);
    near << 0.0, 1.0;
    far << 2.0, 8.0;
    CHECK(agree(runit(near, 930).draws.col(0), runit(far, 931).draws.col(0)));
  }
  SUBCASE("logistic") {
    Eigen::MatrixXd w(3, 1);
    w << 1.0, -0.6, 0.3;
    Eigen::VectorXd z(3), l(3);
    z << 1, 0, 1;
    l << 1, 1, 1;
    const auto m = LogisticModel::make(w, z, l, Eigen::VectorXd::Zero(1),
                                       Eigen::MatrixXd::Identity(1, 1));
    auto runit = [&](double init, std::uint64_t seed) {
      RngStream rng(seed, 0);
      return run_chain(
          [&](const State& s, RngStream& r) { return pg_logistic_da_step(m, s, r); },
          State::Constant(1, init), n, burn, rng);
    };
    CHECK(agree(runit(0.0, 932).draws.col(0), runit(4.0, 933).draws.col(0)));
  }
  SUBCASE("probit glmm") {
    const auto model = tiny_probit();
    auto runit = [&](double init, std::uint64_t seed) {
      RngStream rng(seed, 0);
      return run_chain(
          [&](const State& s, RngStream& r) { return probit_glmm_da_step(model, s, r); },
          State::Constant(1, init), n, burn, rng);
    };
    CHECK(agree(runit(0.0, 934).draws.col(0), runit(-3.0, 935).draws.col(0)));
  }
  SUBCASE("robit") {
    Eigen::MatrixXd w(2, 1);
    w << 1.0, -0.8;
    Eigen::VectorXi z(2);
    z << 1, 0;
    const auto model = RobitModel::make(w, z, 4.0, Eigen::VectorXd::Constant(1, 0.2),
                                        Eigen::MatrixXd::Constant(1, 1, 1.5));
    auto runit = [&](double init, std::uint64_t seed) {
      RngStream rng(seed, 0);
      return run_chain(
          [&](const State& s, RngStream& r) { return robit_da_step(model, s, r); },
          State::Constant(1, init), n, burn, rng);
    };
    CHECK(agree(runit(0.0, 936).draws.col(0), runit(3.5, 937).draws.col(0)));
  }
  SUBCASE("quantile regression") {
    const auto model = tiny_quantreg();
    auto runit = [&](double binit, double sinit, std::uint64_t seed) {
      RngStream rng(seed, 0);
      QuantRegState st{Eigen::VectorXd::Constant(1, binit), Eigen::VectorXd::Ones(4),
                       sinit};
      Eigen::VectorXd betas(n);
      for (int i = 0; i < burn; ++i) st = quantreg_two_block_step(model, st, rng);
      for (int i = 0; i < n; ++i) {
        st = quantreg_two_block_step(model, st, rng);
        betas(i) = st.beta(0);
      }
      return betas;
    };
    CHECK(agree(runit(0.0, 1.0, 938), runit(-2.0, 7.0, 939)));
  }
}

TEST_CASE("elastic-net conditional mode matches the penalized solution") {
  const auto en = ElasticNetModel::make(lasso_design(), lasso_response(), 1.3, 0.8);
  const double sigma2 = 0.8, sigma = std::sqrt(sigma2);
  const double wz = (en.base.w.transpose() * en.base.z_tilde)(0);
  const double ww = (en.base.w.transpose() * en.base.w)(0);
  // argmin SSR + 2 lambda1 sigma |beta| + lambda2 beta^2.
  const double t = en.lambda1 * sigma;
  const double closed =
      (std::fabs(wz) <= t) ? 0.0 : (wz - (wz > 0 ? t : -t)) / (ww + en.lambda2);
  double best = -1e300, arg = 0.0;
  for (int i = 0; i <= 40000; ++i) {
    const double b = -2.0 + 4.0 * i / 40000.0;
    const double ssr =
        (en.base.z_tilde - en.base.w * Eigen::VectorXd::Constant(1, b)).squaredNorm();
    const double lp = -(ssr + 2.0 * en.lambda1 * sigma * std::fabs(b) +
                        en.lambda2 * b * b) /
                      (2.0 * sigma2);
    if (lp > best) {
      best = lp;
      arg = b;
    }
  }
  CHECK(std::fabs(arg - closed) <= 2e-4);
}
