#include "damc/da_core.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "damc/errors.hpp"
#include "damc/logconcave.hpp"

namespace damc {

GroupAction multiplicative_group(int m) {
  GroupAction g;
  g.identity = 1.0;
  g.compose = [](double a, double b) { return a * b; };
  g.invert = [](double a) { return 1.0 / a; };
  g.act = [](double a, const State& y) -> State { return a * y; };
  g.chi = [m](double a) { return std::pow(a, m); };
  g.log_haar = [](double a) { return -std::log(a); };
  return g;
}

GroupAction sign_flip_group() {
  GroupAction g;
  g.identity = 1.0;
  g.compose = [](double a, double b) { return a * b; };
  g.invert = [](double a) { return a; };
  g.act = [](double a, const State& y) -> State { return a * y; };
  g.chi = [](double) { return 1.0; };
  g.log_haar = [](double) { return 0.0; };
  return g;
}

HaarSandwich make_haar_logconcave(
    GroupAction group, std::function<double(double, const State&)> log_g_density,
    double lo, double hi, std::function<double(const State&)> mode_guess) {
  HaarSandwich h;
  h.group = std::move(group);
  h.draw_g = [log_g_density = std::move(log_g_density), lo, hi,
              mode_guess = std::move(mode_guess)](const State& y, RngStream& rng) {
    auto logf = [&](double g) { return log_g_density(g, y); };
    const double guess = mode_guess ? mode_guess(y) : 0.5 * (lo + std::min(hi, lo + 2.0));
    return sample_log_concave(logf, lo, hi, guess, rng);
  };
  return h;
}

HaarSandwich make_haar_finite(
    GroupAction group, std::vector<double> elements,
    std::function<double(double, const State&)> log_g_density) {
  HaarSandwich h;
  h.group = std::move(group);
  h.draw_g = [elements = std::move(elements),
              log_g_density = std::move(log_g_density)](const State& y, RngStream& rng) {
    if (elements.size() == 1) return elements.front();
    double max_lw = -std::numeric_limits<double>::infinity();
    std::vector<double> lw(elements.size());
    for (std::size_t i = 0; i < elements.size(); ++i) {
      lw[i] = log_g_density(elements[i], y);
      max_lw = std::max(max_lw, lw[i]);
    }
    double total = 0.0;
    for (double& w : lw) {
      w = std::exp(w - max_lw);
      total += w;
    }
    double pick = rng.uniform() * total;
    for (std::size_t i = 0; i < elements.size(); ++i) {
      pick -= lw[i];
      if (pick <= 0.0) return elements[i];
    }
    return elements.back();
  };
  return h;
}

State da_step(const AugmentedModel& model, const State& x, RngStream& rng) {
  const State y = model.draw_y_given_x(x, rng);
  return model.draw_x_given_y(y, rng);
}

State sandwich_step(const AugmentedModel& model, const MiddleKernel& middle,
                    const State& x, RngStream& rng) {
  const State y = model.draw_y_given_x(x, rng);
  const State yp = middle.draw(y, rng);
  return model.draw_x_given_y(yp, rng);
}

State haar_pxda_step(const AugmentedModel& model, const HaarSandwich& haar,
                     const State& x, RngStream& rng) {
  const State y = model.draw_y_given_x(x, rng);
  const double g = haar.draw_g(y, rng);
  const State yp = haar.group.act(g, y);
  return model.draw_x_given_y(yp, rng);
}

TwoBlockState two_block_da_step(const TwoBlockModel& model, const TwoBlockState& x,
                                RngStream& rng) {
  const State y = model.draw_y_given_x(x.u, x.v, rng);
  const State up = model.draw_u_given_vy(x.v, y, rng);
  const State vp = model.draw_v_given_uy(up, y, rng);
  return {up, vp};
}

TwoBlockState two_block_pxda_step(const TwoBlockModel& model, const TwoBlockHaar& haar,
                                  int variant, const TwoBlockState& x, RngStream& rng) {
  if (variant != 1 && variant != 2)
    throw invalid_parameter("two_block_pxda_step: variant must be 1 or 2");
  const State y = model.draw_y_given_x(x.u, x.v, rng);
  const double g = haar.draw_g(x.u, x.v, y, variant, rng);
  const State gy = haar.group.act(g, y);
  const State up = model.draw_u_given_vy(x.v, gy, rng);
  const State vp = model.draw_v_given_uy(up, gy, rng);
  return {up, vp};
}

namespace {

TwoBlockState unpack(const TwoBlockModel& model, const State& x) {
  return {x.head(model.u_dim), x.tail(model.v_dim)};
}

State pack(const TwoBlockState& s) {
  State x(s.u.size() + s.v.size());
  x << s.u, s.v;
  return x;
}

}  // namespace

KernelFn two_block_kernel(const TwoBlockModel& model) {
  return [model](const State& x, RngStream& rng) {
    return pack(two_block_da_step(model, unpack(model, x), rng));
  };
}

KernelFn two_block_pxda_kernel(const TwoBlockModel& model, const TwoBlockHaar& haar,
                               int variant) {
  return [model, haar, variant](const State& x, RngStream& rng) {
    return pack(two_block_pxda_step(model, haar, variant, unpack(model, x), rng));
  };
}

ChainTrace run_chain(const KernelFn& kernel, State init, int n, int burn_in,
                     RngStream& rng, const std::string& kernel_id,
                     const std::string& model_id) {
  if (n <= 0) throw invalid_parameter("run_chain: n must be positive");
  if (burn_in < 0) throw invalid_parameter("run_chain: burn_in must be >= 0");

  ChainTrace trace;
  trace.seed = rng.seed();
  trace.stream_id = rng.stream_id();
  trace.kernel_id = kernel_id;
  trace.model_id = model_id;
  trace.burn_in = burn_in;
  trace.draws.resize(n, init.size());

  State x = std::move(init);
  const auto t0 = std::chrono::steady_clock::now();
  int done = 0;
  try {
    for (int i = 0; i < burn_in; ++i) {
      x = kernel(x, rng);
      ++done;
    }
    for (int i = 0; i < n; ++i) {
      x = kernel(x, rng);
      trace.draws.row(i) = x.transpose();
      ++done;
    }
  } catch (const std::exception& e) {
    throw chain_abort(std::string("kernel failure: ") + e.what(), done);
  }
  const auto t1 = std::chrono::steady_clock::now();
  trace.total_seconds = std::chrono::duration<double>(t1 - t0).count();
  trace.seconds_per_iter = trace.total_seconds / std::max(1, burn_in + n);
  return trace;
}

}  // namespace damc
