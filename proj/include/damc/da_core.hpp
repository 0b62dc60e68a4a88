#ifndef DAMC_DA_CORE_HPP
#define DAMC_DA_CORE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "damc/rng.hpp"

namespace damc {

using State = Eigen::VectorXd;

/// One-step Markov kernel as a closure over the current state.
using KernelFn = std::function<State(const State&, RngStream&)>;

/// The two conditional samplers defining a data-augmentation chain:
/// x -> y ~ f(y|x) -> x' ~ f(x'|y).  Immutable after construction and
/// shareable read-only across chains.
struct AugmentedModel {
  int state_dim = 0;
  int aug_dim = 0;
  std::function<State(const State& x, RngStream&)> draw_y_given_x;
  std::function<State(const State& y, RngStream&)> draw_x_given_y;
  /// Optional joint log density (may be null).
  std::function<double(const State& x, const State& y)> log_joint;
};

/// Extra middle move y -> y' that must leave the augmentation marginal
/// invariant for the sandwich kernel to stay valid.
struct MiddleKernel {
  std::function<State(const State& y, RngStream&)> draw;
};

/// Topological group with a one-dimensional coordinate acting on the
/// augmented space: identity, composition, inversion, the action t_g, the
/// multiplier chi making Lebesgue measure relatively invariant, and the
/// left-Haar log density over the coordinate.
struct GroupAction {
  double identity = 1.0;
  std::function<double(double, double)> compose;
  std::function<double(double)> invert;
  std::function<State(double g, const State& y)> act;
  std::function<double(double g)> chi;
  std::function<double(double g)> log_haar;
};

/// The multiplicative group on the positive reals scaling an m-vector:
/// t_g(y) = g y, chi(g) = g^m, Haar density dg/g.
GroupAction multiplicative_group(int m);

/// Two-element sign-flip group acting by y -> g y, g in {+1, -1}.
GroupAction sign_flip_group();

/// A Haar sandwich move: the group plus a sampler for g from the density
/// proportional to f_Y(t_g(y)) chi(g) nu_l(g).  How g is drawn is the
/// model's business (exact form, log-concave rejection, enumeration);
/// these kernels only enforce the three-step skeleton.
struct HaarSandwich {
  GroupAction group;
  std::function<double(const State& y, RngStream&)> draw_g;
};

/// Build the g-sampler from the caller's log pullback
/// g -> log f_Y(t_g(y)) + log chi(g) + log nu_l(g) via log-concave
/// rejection on the open interval (lo, hi).
HaarSandwich make_haar_logconcave(
    GroupAction group,
    std::function<double(double g, const State& y)> log_g_density, double lo,
    double hi, std::function<double(const State& y)> mode_guess);

/// Exact enumeration sampler for a finite set of group elements.
HaarSandwich make_haar_finite(
    GroupAction group, std::vector<double> elements,
    std::function<double(double g, const State& y)> log_g_density);

State da_step(const AugmentedModel& model, const State& x, RngStream& rng);

State sandwich_step(const AugmentedModel& model, const MiddleKernel& middle,
                    const State& x, RngStream& rng);

State haar_pxda_step(const AugmentedModel& model, const HaarSandwich& haar,
                     const State& x, RngStream& rng);

/// Conditional samplers for a two-block chain: y ~ f(y|u,v), then
/// u' ~ f(u|v,y), then v' ~ f(v|u',y).
struct TwoBlockModel {
  int u_dim = 0;
  int v_dim = 0;
  int aug_dim = 0;
  std::function<State(const State& u, const State& v, RngStream&)> draw_y_given_x;
  std::function<State(const State& v, const State& y, RngStream&)> draw_u_given_vy;
  std::function<State(const State& u, const State& y, RngStream&)> draw_v_given_uy;
};

/// g-sampler for the two-block Haar sandwich; variant selects between the
/// two valid middle densities (1: proportional to f_{V,Y}(v, t_g y) chi(g),
/// 2: proportional to f_{U,V,Y}(u, v, t_g y) chi(g)).
struct TwoBlockHaar {
  GroupAction group;
  std::function<double(const State& u, const State& v, const State& y,
                       int variant, RngStream&)>
      draw_g;
};

struct TwoBlockState {
  State u;
  State v;
};

TwoBlockState two_block_da_step(const TwoBlockModel& model, const TwoBlockState& x,
                                RngStream& rng);

TwoBlockState two_block_pxda_step(const TwoBlockModel& model, const TwoBlockHaar& haar,
                                  int variant, const TwoBlockState& x, RngStream& rng);

/// Pack a two-block kernel into a flat-state KernelFn (u then v).
KernelFn two_block_kernel(const TwoBlockModel& model);
KernelFn two_block_pxda_kernel(const TwoBlockModel& model, const TwoBlockHaar& haar,
                               int variant);

/// Post-burn-in draws with run metadata.  Burn-in is discarded, not
/// returned; traces are the diagnostic unit.
struct ChainTrace {
  Eigen::MatrixXd draws;  // n x p, one post-burn-in state per row
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::string kernel_id;
  std::string model_id;
  int burn_in = 0;
  double seconds_per_iter = 0.0;
  double total_seconds = 0.0;
};

/// Run a kernel for burn_in + n iterations, recording the final n states
/// and per-iteration wall clock.  A kernel failure aborts with a
/// chain_abort carrying the completed-iteration count.
ChainTrace run_chain(const KernelFn& kernel, State init, int n, int burn_in,
                     RngStream& rng, const std::string& kernel_id = "",
                     const std::string& model_id = "");

}  // namespace damc

#endif  // DAMC_DA_CORE_HPP
