#include <cmath>

#include "damc/distributions.hpp"
#include "damc/errors.hpp"
#include "damc/models.hpp"

namespace damc {

LogisticModel LogisticModel::make(Eigen::MatrixXd w, Eigen::VectorXd z,
                                  Eigen::VectorXd trials, Eigen::VectorXd mu0,
                                  Eigen::MatrixXd q, bool assert_propriety) {
  const Eigen::Index m = w.rows(), p = w.cols();
  if (z.size() != m || trials.size() != m)
    throw invalid_parameter("logistic: response/trials size mismatch");
  if (mu0.size() != p || q.rows() != p || q.cols() != p)
    throw invalid_parameter("logistic: prior dimension mismatch");
  for (Eigen::Index i = 0; i < m; ++i) {
    if (std::fabs(trials(i) - std::round(trials(i))) > 1e-9 || trials(i) < 1.0)
      throw invalid_parameter("logistic: trial counts must be integers >= 1");
    if (z(i) < 0.0 || z(i) > trials(i))
      throw invalid_parameter("logistic: need 0 <= z_i <= trials_i");
  }
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw invalid_parameter("logistic: prior precision must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
  if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()))
    throw invalid_parameter("logistic: prior precision must be positive semidefinite");
  if (q.cwiseAbs().maxCoeff() == 0.0 && !assert_propriety)
    throw invalid_parameter(
        "logistic: flat prior (Q = 0) requires the posterior-propriety assertion");

  LogisticModel model;
  model.w = std::move(w);
  model.z = std::move(z);
  model.trials = std::move(trials);
  model.mu0 = std::move(mu0);
  model.q = std::move(q);
  model.kappa = model.z - model.trials / 2.0;
  model.improper_prior_ok = assert_propriety;
  return model;
}

double logistic_draw_latent_item(const LogisticModel& model, int i, const State& beta,
                                 RngStream& rng) {
  const double tilt = std::fabs(model.w.row(i).dot(beta));
  return sample_polya_gamma({model.trials(i), tilt}, rng);
}

State logistic_draw_state(const LogisticModel& model, const Eigen::VectorXd& y,
                          RngStream& rng) {
  const Eigen::MatrixXd prec =
      model.w.transpose() * y.asDiagonal() * model.w + model.q;
  const Eigen::VectorXd b =
      model.w.transpose() * model.kappa + model.q * model.mu0;
  try {
    const Eigen::MatrixXd l = cholesky_spd(prec);
    const Eigen::VectorXd mean = l.transpose().triangularView<Eigen::Upper>().solve(
        l.triangularView<Eigen::Lower>().solve(b));
    Eigen::VectorXd zdraw(mean.size());
    for (Eigen::Index j = 0; j < zdraw.size(); ++j) zdraw(j) = rng.normal();
    return mean + l.transpose().triangularView<Eigen::Upper>().solve(zdraw);
  } catch (const not_spd_error&) {
    throw not_spd_error(
        "logistic: W'YW + Q not positive definite; with a singular prior "
        "precision the posterior-propriety assertion does not make the "
        "conditional proper");
  }
}

State pg_logistic_da_step(const LogisticModel& model, const State& beta,
                          RngStream& rng) {
  const Eigen::Index m = model.w.rows();
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i)
    y(i) = logistic_draw_latent_item(model, static_cast<int>(i), beta, rng);
  return logistic_draw_state(model, y, rng);
}

AugmentedModel logistic_augmented(const LogisticModel& model) {
  AugmentedModel m;
  m.state_dim = static_cast<int>(model.w.cols());
  m.aug_dim = static_cast<int>(model.w.rows());
  m.draw_y_given_x = [model](const State& x, RngStream& rng) {
    Eigen::VectorXd y(model.w.rows());
    for (Eigen::Index i = 0; i < y.size(); ++i)
      y(i) = logistic_draw_latent_item(model, static_cast<int>(i), x, rng);
    return y;
  };
  m.draw_x_given_y = [model](const State& y, RngStream& rng) {
    return logistic_draw_state(model, y, rng);
  };
  return m;
}

}  // namespace damc
