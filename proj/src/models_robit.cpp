#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "damc/distributions.hpp"
#include "damc/errors.hpp"
#include "damc/models.hpp"

namespace damc {

double student_t_cdf(double x, double nu) {
  boost::math::students_t dist(nu);
  return boost::math::cdf(dist, x);
}

RobitModel RobitModel::make(Eigen::MatrixXd w, Eigen::VectorXi z, double nu,
                            Eigen::VectorXd beta_a, Eigen::MatrixXd sigma_a) {
  if (w.rows() != z.size()) throw invalid_parameter("robit: design/response mismatch");
  if (!(nu > 0.0)) throw invalid_parameter("robit: degrees of freedom must be > 0");
  if (beta_a.size() != w.cols() || sigma_a.rows() != w.cols() ||
      sigma_a.cols() != w.cols())
    throw invalid_parameter("robit: prior dimension mismatch");
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if (z(i) != 0 && z(i) != 1)
      throw invalid_parameter("robit: responses must be binary");
  cholesky_spd(sigma_a);  // SPD gate
  RobitModel m;
  m.w = std::move(w);
  m.z = std::move(z);
  m.nu = nu;
  m.beta_a = std::move(beta_a);
  m.sigma_a = std::move(sigma_a);
  return m;
}

namespace {

// t_nu(0, 1) truncated to (bound, inf) by upper-tail inverse CDF.
double truncated_t_above(double bound, double nu, RngStream& rng) {
  boost::math::students_t dist(nu);
  const double tail = boost::math::cdf(boost::math::complement(dist, bound));
  const double q = rng.uniform_pos() * tail;
  return boost::math::quantile(boost::math::complement(dist, q));
}

}  // namespace

Eigen::VectorXd robit_draw_latent(const RobitModel& model, const State& beta,
                                  RngStream& rng) {
  const Eigen::Index m = model.w.rows();
  Eigen::VectorXd out(2 * m);  // [u, lambda]
  for (Eigen::Index i = 0; i < m; ++i) {
    const double mu = model.w.row(i).dot(beta);
    double u;
    if (model.z(i) == 1)
      u = mu + truncated_t_above(-mu, model.nu, rng);
    else
      u = -(-mu + truncated_t_above(mu, model.nu, rng));
    const double d = u - mu;
    const double lambda =
        rng.gamma((model.nu + 1.0) / 2.0, (model.nu + d * d) / 2.0);
    out(i) = u;
    out(m + i) = lambda;
  }
  return out;
}

State robit_draw_state(const RobitModel& model, const Eigen::VectorXd& y,
                       RngStream& rng) {
  const Eigen::Index m = model.w.rows();
  const Eigen::VectorXd u = y.head(m);
  const Eigen::VectorXd lambda = y.tail(m);
  const Eigen::MatrixXd prec =
      model.sigma_a + model.w.transpose() * lambda.asDiagonal() * model.w;
  const Eigen::VectorXd b = model.w.transpose() * (lambda.asDiagonal() * u) +
                            model.sigma_a * model.beta_a;
  const Eigen::MatrixXd l = cholesky_spd(prec);
  const Eigen::VectorXd mean = l.transpose().triangularView<Eigen::Upper>().solve(
      l.triangularView<Eigen::Lower>().solve(b));
  Eigen::VectorXd zdraw(mean.size());
  for (Eigen::Index j = 0; j < zdraw.size(); ++j) zdraw(j) = rng.normal();
  return mean + l.transpose().triangularView<Eigen::Upper>().solve(zdraw);
}

State robit_da_step(const RobitModel& model, const State& beta, RngStream& rng) {
  return robit_draw_state(model, robit_draw_latent(model, beta, rng), rng);
}

AugmentedModel robit_augmented(const RobitModel& model) {
  AugmentedModel m;
  m.state_dim = static_cast<int>(model.w.cols());
  m.aug_dim = static_cast<int>(2 * model.w.rows());
  m.draw_y_given_x = [model](const State& x, RngStream& rng) {
    return Eigen::VectorXd(robit_draw_latent(model, x, rng));
  };
  m.draw_x_given_y = [model](const State& y, RngStream& rng) {
    return robit_draw_state(model, y, rng);
  };
  return m;
}

}  // namespace damc
