#include <cmath>

#include "damc/distributions.hpp"
#include "damc/errors.hpp"
#include "damc/models.hpp"

namespace damc {

namespace {

void prep_columns(Eigen::MatrixXd& w, ColumnPrep prep) {
  const auto m = w.rows();
  if (prep == ColumnPrep::Center || prep == ColumnPrep::CenterScale) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) w.col(j).array() -= w.col(j).mean();
  }
  if (prep == ColumnPrep::CenterScale) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      const double ms = std::sqrt(w.col(j).squaredNorm() / m);
      if (ms > 0.0) w.col(j) /= ms;
    }
  }
  for (Eigen::Index j = 0; j < w.cols(); ++j)
    if (std::fabs(w.col(j).sum()) > 1e-10 * static_cast<double>(m))
      throw invalid_parameter("shrinkage model: design columns must be centered");
}

// One sweep shared by the lasso and elastic-net chains.  lambda2 = 0 is
// the lasso; both conditionals then agree draw for draw.
State shrinkage_step(const Eigen::MatrixXd& w, const Eigen::VectorXd& zt,
                     double lambda1, double lambda2, double alpha, double xi,
                     const State& state, RngStream& rng) {
  const Eigen::Index p = w.cols();
  const Eigen::Index m = w.rows();
  const Eigen::VectorXd beta = state.head(p);
  const double sigma2 = state(p);
  if (!(sigma2 > 0.0)) throw invalid_parameter("shrinkage step: sigma2 must be > 0");
  const double sigma = std::sqrt(sigma2);

  Eigen::VectorXd v(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (std::fabs(beta(j)) < 1e-300 * sigma) {
      // Exact conditional in the beta_j -> 0 limit.
      v(j) = 1.0 / rng.gamma(0.5, lambda1 * lambda1 / 2.0);
    } else {
      v(j) = sample_inverse_gaussian(
          {lambda1 * sigma / std::fabs(beta(j)), lambda1 * lambda1}, rng);
    }
  }

  Eigen::MatrixXd prec = w.transpose() * w;
  for (Eigen::Index j = 0; j < p; ++j) prec(j, j) += lambda2 + v(j);
  const Eigen::MatrixXd l = cholesky_spd(prec);
  const Eigen::VectorXd wz = w.transpose() * zt;
  const Eigen::VectorXd half = l.triangularView<Eigen::Lower>().solve(wz);
  const Eigen::VectorXd mean =
      l.transpose().triangularView<Eigen::Upper>().solve(half);

  const double quad = std::max(zt.squaredNorm() - half.squaredNorm(), 0.0);
  const double rate = quad / 2.0 + xi;
  if (!(rate > 0.0))
    throw invalid_parameter("shrinkage step: degenerate variance conditional");
  const double sigma2p =
      sample_inverse_gamma((static_cast<double>(m) - 1.0) / 2.0 + alpha, rate, rng);

  Eigen::VectorXd zdraw(p);
  for (Eigen::Index j = 0; j < p; ++j) zdraw(j) = rng.normal();
  const Eigen::VectorXd betap =
      mean + std::sqrt(sigma2p) *
                 l.transpose().triangularView<Eigen::Upper>().solve(zdraw);

  State out(p + 1);
  out << betap, sigma2p;
  return out;
}

State state_from_latent(const Eigen::MatrixXd& w, const Eigen::VectorXd& zt,
                        double lambda2, double alpha, double xi,
                        const Eigen::VectorXd& v, RngStream& rng) {
  const Eigen::Index p = w.cols();
  const Eigen::Index m = w.rows();
  Eigen::MatrixXd prec = w.transpose() * w;
  for (Eigen::Index j = 0; j < p; ++j) prec(j, j) += lambda2 + v(j);
  const Eigen::MatrixXd l = cholesky_spd(prec);
  const Eigen::VectorXd wz = w.transpose() * zt;
  const Eigen::VectorXd half = l.triangularView<Eigen::Lower>().solve(wz);
  const Eigen::VectorXd mean =
      l.transpose().triangularView<Eigen::Upper>().solve(half);
  const double quad = std::max(zt.squaredNorm() - half.squaredNorm(), 0.0);
  const double rate = quad / 2.0 + xi;
  if (!(rate > 0.0))
    throw invalid_parameter("shrinkage step: degenerate variance conditional");
  const double sigma2p =
      sample_inverse_gamma((static_cast<double>(m) - 1.0) / 2.0 + alpha, rate, rng);
  Eigen::VectorXd zdraw(p);
  for (Eigen::Index j = 0; j < p; ++j) zdraw(j) = rng.normal();
  const Eigen::VectorXd betap =
      mean + std::sqrt(sigma2p) *
                 l.transpose().triangularView<Eigen::Upper>().solve(zdraw);
  State out(p + 1);
  out << betap, sigma2p;
  return out;
}

double latent_item(double beta_j, double sigma, double lambda1, RngStream& rng) {
  if (std::fabs(beta_j) < 1e-300 * sigma)
    return 1.0 / rng.gamma(0.5, lambda1 * lambda1 / 2.0);
  return sample_inverse_gaussian({lambda1 * sigma / std::fabs(beta_j), lambda1 * lambda1},
                                 rng);
}

}  // namespace

LassoModel LassoModel::make(Eigen::MatrixXd w, Eigen::VectorXd z, double lambda,
                            double alpha, double xi, ColumnPrep prep) {
  if (w.rows() != z.size()) throw invalid_parameter("lasso: design/response mismatch");
  if (w.rows() < 2) throw invalid_parameter("lasso: need at least two observations");
  if (!(lambda > 0.0)) throw invalid_parameter("lasso: lambda must be > 0");
  if (alpha < 0.0 || xi < 0.0)
    throw invalid_parameter("lasso: variance prior parameters must be >= 0");
  prep_columns(w, prep);
  LassoModel m;
  m.w = std::move(w);
  m.z = std::move(z);
  m.z_tilde = m.z.array() - m.z.mean();
  m.lambda = lambda;
  m.alpha = alpha;
  m.xi = xi;
  return m;
}

ElasticNetModel ElasticNetModel::make(Eigen::MatrixXd w, Eigen::VectorXd z,
                                      double lambda1, double lambda2, double alpha,
                                      double xi, ColumnPrep prep) {
  if (lambda2 < 0.0) throw invalid_parameter("elastic net: lambda2 must be >= 0");
  ElasticNetModel m;
  m.base = LassoModel::make(std::move(w), std::move(z), lambda1, alpha, xi, prep);
  m.lambda1 = lambda1;
  m.lambda2 = lambda2;
  return m;
}

State lasso_da_step(const LassoModel& model, const State& state, RngStream& rng) {
  return shrinkage_step(model.w, model.z_tilde, model.lambda, 0.0, model.alpha,
                        model.xi, state, rng);
}

State elastic_net_da_step(const ElasticNetModel& model, const State& state,
                          RngStream& rng) {
  return shrinkage_step(model.base.w, model.base.z_tilde, model.lambda1, model.lambda2,
                        model.base.alpha, model.base.xi, state, rng);
}

Eigen::VectorXd lasso_draw_latent(const LassoModel& model, const State& state,
                                  RngStream& rng) {
  const Eigen::Index p = model.w.cols();
  Eigen::VectorXd v(p);
  const double sigma = std::sqrt(state(p));
  for (Eigen::Index j = 0; j < p; ++j)
    v(j) = latent_item(state(j), sigma, model.lambda, rng);
  return v;
}

double lasso_draw_latent_item(const LassoModel& model, int j, const State& state,
                              RngStream& rng) {
  const double sigma = std::sqrt(state(model.w.cols()));
  return latent_item(state(j), sigma, model.lambda, rng);
}

State lasso_draw_state(const LassoModel& model, const Eigen::VectorXd& v,
                       RngStream& rng) {
  return state_from_latent(model.w, model.z_tilde, 0.0, model.alpha, model.xi, v, rng);
}

AugmentedModel lasso_augmented(const LassoModel& model) {
  AugmentedModel m;
  m.state_dim = static_cast<int>(model.w.cols()) + 1;
  m.aug_dim = static_cast<int>(model.w.cols());
  m.draw_y_given_x = [model](const State& x, RngStream& rng) {
    return Eigen::VectorXd(lasso_draw_latent(model, x, rng));
  };
  m.draw_x_given_y = [model](const State& y, RngStream& rng) {
    return lasso_draw_state(model, y, rng);
  };
  return m;
}

AugmentedModel elastic_net_augmented(const ElasticNetModel& model) {
  AugmentedModel m;
  m.state_dim = static_cast<int>(model.base.w.cols()) + 1;
  m.aug_dim = static_cast<int>(model.base.w.cols());
  m.draw_y_given_x = [model](const State& x, RngStream& rng) {
    const Eigen::Index p = model.base.w.cols();
    Eigen::VectorXd v(p);
    const double sigma = std::sqrt(x(p));
    for (Eigen::Index j = 0; j < p; ++j)
      v(j) = latent_item(x(j), sigma, model.lambda1, rng);
    return v;
  };
  m.draw_x_given_y = [model](const State& y, RngStream& rng) {
    return state_from_latent(model.base.w, model.base.z_tilde, model.lambda2,
                             model.base.alpha, model.base.xi, y, rng);
  };
  return m;
}

}  // namespace damc
