#ifndef DAMC_DISCRETE_HPP
#define DAMC_DISCRETE_HPP

#include <Eigen/Dense>
#include <vector>

#include "damc/da_core.hpp"
#include "damc/rng.hpp"

namespace damc {

/// Exact finite joint pmf over labeled x and y grids.  Total mass is
/// normalized at construction and validated to 1e-14.
struct DiscreteJoint {
  Eigen::VectorXd x_grid;
  Eigen::VectorXd y_grid;
  Eigen::MatrixXd pmf;  // size x * size y
  bool strictly_positive = false;

  static DiscreteJoint make(Eigen::VectorXd x_grid, Eigen::VectorXd y_grid,
                            Eigen::MatrixXd pmf);

  Eigen::Index sx() const { return pmf.rows(); }
  Eigen::Index sy() const { return pmf.cols(); }
  Eigen::VectorXd fx() const { return pmf.rowwise().sum(); }
  Eigen::VectorXd fy() const { return pmf.colwise().sum().transpose(); }
  /// Row x: conditional pmf of y given x.
  Eigen::MatrixXd y_given_x() const;
  /// Row y: conditional pmf of x given y.
  Eigen::MatrixXd x_given_y() const;
};

/// Row-stochastic transition matrix over a labeled grid.
struct TransitionMatrix {
  Eigen::MatrixXd p;
  Eigen::VectorXd grid;

  static TransitionMatrix make(Eigen::MatrixXd p, Eigen::VectorXd grid);
};

/// K[x, x'] = sum_y f(x'|y) f(y|x), exact arithmetic over the grid.
TransitionMatrix build_da_kernel(const DiscreteJoint& joint);

/// Exact triple-sum sandwich kernel.  The middle matrix must be
/// row-stochastic and leave f_Y invariant (checked to 1e-10; violation is
/// an error, this is the validity gate for sandwich moves).
TransitionMatrix build_sandwich_kernel(const DiscreteJoint& joint,
                                       const Eigen::MatrixXd& middle);

/// Left unit eigenvector normalized to a pmf.  Throws if the unit
/// eigenvalue is not simple (reducible chain).
Eigen::VectorXd stationary_distribution(const TransitionMatrix& kernel);

/// Max over pairs of |k(x'|x) f(x) - k(x|x') f(x')|.
double check_detailed_balance(const TransitionMatrix& kernel,
                              const Eigen::VectorXd& pmf);

/// Uniform-proposal Metropolis kernel on the y grid; reversible with
/// respect to fy by construction.
Eigen::MatrixXd metropolis_middle(const Eigen::VectorXd& fy, RngStream& rng);

/// Conditional-expectation projection onto the given partition of the
/// y grid: r(y'|y) = fy(y') / mass(orbit(y)) within the orbit.  Idempotent
/// and fy-reversible; this is what a finite group action induces.
Eigen::MatrixXd orbit_projection_middle(const Eigen::VectorXd& fy,
                                        const std::vector<std::vector<int>>& orbits);

/// Orbits of the group generated by a set of grid permutations.
std::vector<std::vector<int>> orbits_of_permutations(
    int n, const std::vector<std::vector<int>>& perms);

/// Live sampler view of a discrete joint: states are 1-vectors holding
/// grid values, draws are exact inverse-CDF conditional draws.
AugmentedModel discrete_model(const DiscreteJoint& joint);

/// Middle kernel drawing from an explicit row-stochastic matrix on
/// the y grid.
MiddleKernel discrete_middle(const Eigen::MatrixXd& middle,
                             const Eigen::VectorXd& y_grid);

/// Random strictly-positive joint for property sweeps.
DiscreteJoint random_joint(int sx, int sy, RngStream& rng, double min_mass = 1e-3);

int grid_index(const Eigen::VectorXd& grid, double value);

/// Inverse-CDF draw of a grid index from a pmf row.
int sample_index(const Eigen::VectorXd& pmf, RngStream& rng);

// ---------------------------------------------------------------------------
// Three-variable joint for the two-block chain
// ---------------------------------------------------------------------------

struct DiscreteTwoBlockJoint {
  Eigen::VectorXd u_grid, v_grid, y_grid;
  std::vector<Eigen::MatrixXd> pmf;  // one (su x sv) slab per y index

  static DiscreteTwoBlockJoint make(Eigen::VectorXd u_grid, Eigen::VectorXd v_grid,
                                    Eigen::VectorXd y_grid,
                                    std::vector<Eigen::MatrixXd> pmf);

  Eigen::Index su() const { return u_grid.size(); }
  Eigen::Index sv() const { return v_grid.size(); }
  Eigen::Index sy() const { return y_grid.size(); }
  /// f over flattened (u, v) states, index iu * sv + iv.
  Eigen::VectorXd fx() const;
  Eigen::VectorXd fy() const;
  double p(int iu, int iv, int iy) const { return pmf[iy](iu, iv); }
};

/// Exact three-step kernel over flattened (u, v) states:
/// y ~ f(y|u,v), u' ~ f(u|v,y), v' ~ f(v|u',y).
TransitionMatrix build_two_block_kernel(const DiscreteTwoBlockJoint& joint);

/// Exact four-step two-block sandwich kernel with a finite group acting on
/// the y grid by permutation; variant 1 weights g by f_{V,Y}(v, gy),
/// variant 2 by f_{U,V,Y}(u, v, gy).
TransitionMatrix build_two_block_pxda_kernel(
    const DiscreteTwoBlockJoint& joint,
    const std::vector<std::vector<int>>& group_perms, int variant);

/// Live sampler view; u and v states are 1-vectors of grid values.
TwoBlockModel discrete_two_block_model(const DiscreteTwoBlockJoint& joint);

DiscreteTwoBlockJoint random_two_block_joint(int su, int sv, int sy, RngStream& rng,
                                             double min_mass = 1e-3);

// ---------------------------------------------------------------------------
// Conditionally independent two-block augmentation for the distributed chain
// ---------------------------------------------------------------------------

/// f(x, y1, y2) = fx(x) f(y1|x) f(y2|x); conditional independence holds by
/// construction and is what the distributed kernel's invariance rests on.
struct DiscreteBlockedJoint {
  Eigen::VectorXd x_grid, y1_grid, y2_grid;
  Eigen::VectorXd fx;           // mass over x
  Eigen::MatrixXd y1_given_x;   // row x: pmf over y1
  Eigen::MatrixXd y2_given_x;   // row x: pmf over y2

  static DiscreteBlockedJoint make(Eigen::VectorXd x_grid, Eigen::VectorXd y1_grid,
                                   Eigen::VectorXd y2_grid, Eigen::VectorXd fx,
                                   Eigen::MatrixXd y1_given_x,
                                   Eigen::MatrixXd y2_given_x);

  Eigen::Index sx() const { return x_grid.size(); }
  Eigen::Index s1() const { return y1_grid.size(); }
  Eigen::Index s2() const { return y2_grid.size(); }
  /// Flattened (x, y1, y2) index.
  Eigen::Index flat(int ix, int i1, int i2) const {
    return (static_cast<Eigen::Index>(ix) * s1() + i1) * s2() + i2;
  }
  /// Joint pmf over flattened states.
  Eigen::VectorXd joint_pmf() const;
  /// Row (y1, y2)-flattened conditional of x.
  Eigen::VectorXd x_given_y(int i1, int i2) const;
};

DiscreteBlockedJoint random_blocked_joint(int sx, int s1, int s2, RngStream& rng);

/// Exact joint-chain transition matrix of the asynchronous distributed
/// kernel with two latent blocks: with probability eps both blocks are
/// refreshed from f(y_j|x); otherwise block j alone is refreshed with the
/// x-dependent selection probability c_j(x); then x' ~ f(x|y').  States are
/// flattened (x, y1, y2).
TransitionMatrix adda_exact_kernel_discrete(const DiscreteBlockedJoint& joint,
                                            const Eigen::VectorXd& c1,
                                            double epsilon);

}  // namespace damc

#endif  // DAMC_DISCRETE_HPP
