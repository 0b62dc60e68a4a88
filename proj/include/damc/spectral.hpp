#ifndef DAMC_SPECTRAL_HPP
#define DAMC_SPECTRAL_HPP

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <vector>

#include "damc/discrete.hpp"

namespace damc {

/// Spectrum of a kernel on the mean-zero subspace of its stationary law.
struct SpectrumReport {
  Eigen::VectorXd eigenvalues;  // mean-zero spectrum, sorted descending
  double op_norm = 0.0;         // largest |eigenvalue| on that subspace
  int multiplicity = 0;         // of the largest eigenvalue
  bool positive = false;        // all eigenvalues >= -1e-12
  bool reversible = false;      // symmetrization check passed
};

/// Eigen-decomposition of D^{1/2} K D^{-1/2} (D = diag pmf) with the
/// stationary direction deflated.  Non-reversible kernels get singular
/// values instead, flagged accordingly.
SpectrumReport spectrum(const TransitionMatrix& kernel, const Eigen::VectorXd& pmf);

/// Singular triplets of f(x,y) / sqrt(fx fy) with the trivial constant
/// triplet removed; beta(i)^2 are the DA kernel's eigenvalues.
struct SvdTriplets {
  Eigen::VectorXd beta;    // descending, in [0, 1]
  Eigen::MatrixXd g;       // columns: orthonormal x-functions in L2(fx)
  Eigen::MatrixXd h;       // columns: orthonormal y-functions in L2(fy)
  double max_relation_error = 0.0;  // worst deviation in P_Y g = beta h etc.
};

SvdTriplets svd_triplets(const DiscreteJoint& joint);

/// Numerical check that an idempotent, fy-reversible middle kernel gives a
/// sandwich spectrum dominated pointwise by the DA spectrum, with equality
/// at index i exactly when the middle kernel fixes h_i.
struct DominanceReport {
  Eigen::VectorXd da_eigenvalues;        // beta_i^2, descending
  Eigen::VectorXd sandwich_eigenvalues;  // descending
  double da_norm = 0.0;
  double sandwich_norm = 0.0;
  bool pointwise_ok = false;
  bool norm_ok = false;
  bool equality_criterion_ok = false;
};

DominanceReport verify_dominance(const DiscreteJoint& joint,
                                 const Eigen::MatrixXd& idempotent_middle);

/// Group-action middle kernels on a grid.  Returns true iff
/// f(x|y) = f(x|gy) for all group elements on the grid; when true the
/// sandwich kernel is asserted identical to the DA kernel, when false at
/// least one strict eigenvalue drop is asserted.
struct HaarTrivialityReport {
  bool invariant = false;
  double max_kernel_diff = 0.0;
  double max_eigen_drop = 0.0;
};

HaarTrivialityReport haar_triviality_check(
    const DiscreteJoint& joint, const std::vector<std::vector<int>>& group_perms);

/// Bivariate-normal test bed: standard margins, correlation rho.  Its DA
/// kernel is the Gaussian autoregression x' ~ N(rho^2 x, 1 - rho^4) with
/// mean-zero spectrum {rho^(2i)}.
struct GaussianToy {
  double rho = 0.5;
  double half_width = 8.0;  // grid covers [-L, L]
  int points = 400;
};

/// Quadrature estimates of the trace integral int k(x,x) dx and the
/// squared-kernel double integral at three grid refinements, plus the
/// Nystrom spectrum at the finest one.  Divergence across refinements is
/// reported, not thrown.
struct CompactnessReport {
  std::array<double, 3> trace_estimates{};
  std::array<double, 3> hs_estimates{};
  std::array<int, 3> grid_sizes{};
  double observed_order_trace = 0.0;
  bool trace_diverging = false;
  bool hs_diverging = false;
  Eigen::VectorXd spectrum;  // mean-zero Nystrom eigenvalues, descending
};

CompactnessReport compactness_diagnostics(const GaussianToy& toy);

/// Same machinery for any kernel density with known stationary density.
CompactnessReport compactness_diagnostics(
    const std::function<double(double, double)>& kernel_density,
    const std::function<double(double)>& stationary, double half_width, int points);

}  // namespace damc

#endif  // DAMC_SPECTRAL_HPP
