#include <cmath>

#include "damc/distributions.hpp"
#include "damc/errors.hpp"
#include "damc/logconcave.hpp"
#include "damc/models.hpp"

namespace damc {

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ProbitGlmmModel ProbitGlmmModel::make(Eigen::MatrixXd w, Eigen::MatrixXd v,
                                      Eigen::VectorXd beta, Eigen::VectorXi z,
                                      std::vector<ProbitBlockSpec> blocks) {
  const Eigen::Index m = w.rows(), q = v.cols();
  if (v.rows() != m || z.size() != m || beta.size() != w.cols())
    throw invalid_parameter("probit glmm: dimension mismatch");
  for (Eigen::Index i = 0; i < m; ++i)
    if (z(i) != 0 && z(i) != 1)
      throw invalid_parameter("probit glmm: responses must be binary");
  if (blocks.empty()) throw invalid_parameter("probit glmm: need random-effect blocks");

  ProbitGlmmModel model;
  model.w = std::move(w);
  model.v = std::move(v);
  model.beta = std::move(beta);
  model.z = std::move(z);
  model.blocks = std::move(blocks);

  // A = direct sum over blocks of kron(lambda_j, r_j); everything dense,
  // the random-effect dimension is small in every use.
  Eigen::Index total = 0;
  for (const auto& b : model.blocks) total += b.lambda.rows() * b.r.rows();
  if (total != q)
    throw invalid_parameter("probit glmm: block dimensions must sum to q");
  model.a_lambda = Eigen::MatrixXd::Zero(q, q);
  Eigen::Index at = 0;
  for (const auto& b : model.blocks) {
    cholesky_spd(b.lambda);  // SPD gates
    cholesky_spd(b.r);
    const Eigen::MatrixXd block = kronecker(b.lambda, b.r);
    model.a_lambda.block(at, at, block.rows(), block.cols()) = block;
    at += block.rows();
  }

  const Eigen::MatrixXd a_chol = cholesky_spd(model.a_lambda);
  const Eigen::MatrixXd a_inv =
      a_chol.transpose().triangularView<Eigen::Upper>().solve(
          a_chol.triangularView<Eigen::Lower>().solve(
              Eigen::MatrixXd::Identity(q, q)));
  model.post_precision = model.v.transpose() * model.v + a_inv;
  const Eigen::MatrixXd p_chol = cholesky_spd(model.post_precision);
  const Eigen::MatrixXd p_inv_vt =
      p_chol.transpose().triangularView<Eigen::Upper>().solve(
          p_chol.triangularView<Eigen::Lower>().solve(model.v.transpose()));
  model.v1 = Eigen::MatrixXd::Identity(m, m) - model.v * p_inv_vt;
  model.v1 = 0.5 * (model.v1 + model.v1.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.v1);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw invalid_parameter("probit glmm: V1 must be positive semidefinite");
  model.w_beta = model.w * model.beta;
  return model;
}

namespace {

Eigen::VectorXd draw_truncated_latents(const ProbitGlmmModel& model, const State& u,
                                       RngStream& rng) {
  const Eigen::Index m = model.v.rows();
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double mean = model.w_beta(i) + model.v.row(i).dot(u);
    y(i) = sample_truncated_normal(mean, 1.0, model.z(i), rng);
  }
  return y;
}

State draw_effects_given_latents(const ProbitGlmmModel& model, const Eigen::VectorXd& y,
                                 RngStream& rng) {
  const Eigen::VectorXd b = model.v.transpose() * (y - model.w_beta);
  const Eigen::MatrixXd l = cholesky_spd(model.post_precision);
  const Eigen::VectorXd mean = l.transpose().triangularView<Eigen::Upper>().solve(
      l.triangularView<Eigen::Lower>().solve(b));
  Eigen::VectorXd zdraw(mean.size());
  for (Eigen::Index j = 0; j < zdraw.size(); ++j) zdraw(j) = rng.normal();
  return mean + l.transpose().triangularView<Eigen::Upper>().solve(zdraw);
}

}  // namespace

State probit_glmm_da_step(const ProbitGlmmModel& model, const State& u,
                          RngStream& rng) {
  return draw_effects_given_latents(model, draw_truncated_latents(model, u, rng), rng);
}

double probit_draw_group_scale(const ProbitGlmmModel& model, const Eigen::VectorXd& y,
                               RngStream& rng) {
  const double m = static_cast<double>(model.v.rows());
  const double s = y.dot(model.v1 * y);
  if (!(s > 0.0))
    throw invalid_parameter("probit pxda: y'V1y must be positive for the scale draw");
  const double t = y.dot(model.v1 * model.w_beta);
  auto logf = [m, s, t](double g) {
    return (m - 1.0) * std::log(g) - 0.5 * (s * g * g - 2.0 * t * g);
  };
  double guess;
  if (m > 1.0)
    guess = (t + std::sqrt(t * t + 4.0 * s * (m - 1.0))) / (2.0 * s);
  else
    guess = std::max(t, std::sqrt(1.0 / s)) / s;
  return sample_log_concave(logf, 0.0, std::numeric_limits<double>::infinity(),
                            std::max(guess, 1e-8), rng);
}

State probit_haar_pxda_step(const ProbitGlmmModel& model, const State& u,
                            RngStream& rng) {
  const Eigen::VectorXd y = draw_truncated_latents(model, u, rng);
  const double g = probit_draw_group_scale(model, y, rng);
  return draw_effects_given_latents(model, g * y, rng);
}

AugmentedModel probit_augmented(const ProbitGlmmModel& model) {
  AugmentedModel m;
  m.state_dim = static_cast<int>(model.v.cols());
  m.aug_dim = static_cast<int>(model.v.rows());
  m.draw_y_given_x = [model](const State& x, RngStream& rng) {
    return Eigen::VectorXd(draw_truncated_latents(model, x, rng));
  };
  m.draw_x_given_y = [model](const State& y, RngStream& rng) {
    return draw_effects_given_latents(model, y, rng);
  };
  return m;
}

}  // namespace damc
