#include "damc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "damc/errors.hpp"

namespace damc {

namespace {

Eigen::VectorXd sorted_descending(Eigen::VectorXd v) {
  std::sort(v.data(), v.data() + v.size(), std::greater<double>());
  return v;
}

}  // namespace

SpectrumReport spectrum(const TransitionMatrix& kernel, const Eigen::VectorXd& pmf) {
  const Eigen::Index n = kernel.p.rows();
  if (pmf.size() != n) throw invalid_parameter("spectrum: pmf size mismatch");
  const Eigen::VectorXd root = pmf.cwiseSqrt();
  Eigen::MatrixXd s(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) s(i, j) = root(i) * kernel.p(i, j) / root(j);

  SpectrumReport report;
  report.reversible = ((s - s.transpose()).cwiseAbs().maxCoeff() <= 1e-10);

  Eigen::VectorXd all;
  if (report.reversible) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
    all = es.eigenvalues();
    // Drop the stationary direction: eigenvalue closest to 1.
    Eigen::Index drop = 0;
    (all.array() - 1.0).abs().minCoeff(&drop);
    Eigen::VectorXd rest(n - 1);
    for (Eigen::Index i = 0, k = 0; i < n; ++i)
      if (i != drop) rest(k++) = all(i);
    report.eigenvalues = sorted_descending(rest);
  } else {
    // Deflate the stationary pair and report singular values.
    const Eigen::MatrixXd deflated = s - root * root.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(deflated);
    report.eigenvalues = svd.singularValues().head(n - 1);
  }
  report.op_norm =
      report.eigenvalues.size() ? report.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  report.positive = (report.eigenvalues.array() >= -1e-12).all();
  report.multiplicity = 0;
  if (report.eigenvalues.size()) {
    const double top = report.eigenvalues(0);
    for (Eigen::Index i = 0; i < report.eigenvalues.size(); ++i)
      if (top - report.eigenvalues(i) <= 1e-10) ++report.multiplicity;
  }
  return report;
}

SvdTriplets svd_triplets(const DiscreteJoint& joint) {
  const Eigen::Index sx = joint.sx(), sy = joint.sy();
  const Eigen::VectorXd fx = joint.fx(), fy = joint.fy();
  const Eigen::VectorXd rx = fx.cwiseSqrt(), ry = fy.cwiseSqrt();
  Eigen::MatrixXd m(sx, sy);
  for (Eigen::Index i = 0; i < sx; ++i)
    for (Eigen::Index j = 0; j < sy; ++j) m(i, j) = joint.pmf(i, j) / (rx(i) * ry(j));

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index k = std::min(sx, sy) - 1;  // trivial triplet removed

  SvdTriplets out;
  out.beta.resize(k);
  out.g.resize(sx, k);
  out.h.resize(sy, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    out.beta(i) = svd.singularValues()(i + 1);
    out.g.col(i) = svd.matrixU().col(i + 1).cwiseQuotient(rx);
    out.h.col(i) = svd.matrixV().col(i + 1).cwiseQuotient(ry);
  }

  // P_Y g_i = beta_i h_i and P_X h_i = beta_i g_i, with
  // (P_Y g)(y) = sum_x g(x) f(x|y) and (P_X h)(x) = sum_y h(y) f(y|x).
  const Eigen::MatrixXd xgy = joint.x_given_y();
  const Eigen::MatrixXd ygx = joint.y_given_x();
  double err = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    err = std::max(err,
                   (xgy * out.g.col(i) - out.beta(i) * out.h.col(i)).cwiseAbs().maxCoeff());
    err = std::max(err,
                   (ygx * out.h.col(i) - out.beta(i) * out.g.col(i)).cwiseAbs().maxCoeff());
  }
  out.max_relation_error = err;
  return out;
}

DominanceReport verify_dominance(const DiscreteJoint& joint,
                                 const Eigen::MatrixXd& middle) {
  const Eigen::Index sy = joint.sy();
  if (middle.rows() != sy || middle.cols() != sy)
    throw invalid_parameter("verify_dominance: middle shape mismatch");
  if (((middle * middle) - middle).cwiseAbs().maxCoeff() > 1e-12)
    throw invalid_parameter("verify_dominance: middle kernel is not idempotent");
  const Eigen::VectorXd fy = joint.fy();
  const Eigen::MatrixXd flow = fy.asDiagonal() * middle;
  if ((flow - flow.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw invalid_parameter("verify_dominance: middle kernel not fy-reversible");

  const auto triplets = svd_triplets(joint);
  const auto da = spectrum(build_da_kernel(joint), joint.fx());
  const auto sa = spectrum(build_sandwich_kernel(joint, middle), joint.fx());

  DominanceReport report;
  report.da_eigenvalues = da.eigenvalues;
  report.sandwich_eigenvalues = sa.eigenvalues;
  report.da_norm = da.op_norm;
  report.sandwich_norm = sa.op_norm;
  report.norm_ok = (sa.op_norm <= da.op_norm + 1e-10);

  const Eigen::Index n = std::min(da.eigenvalues.size(), sa.eigenvalues.size());
  report.pointwise_ok = true;
  for (Eigen::Index i = 0; i < n; ++i)
    if (sa.eigenvalues(i) > da.eigenvalues(i) + 1e-10) report.pointwise_ok = false;

  // Equality at index i exactly when the middle kernel fixes h_i.
  report.equality_criterion_ok = true;
  for (Eigen::Index i = 0; i < triplets.beta.size() && i < n; ++i) {
    if (triplets.beta(i) <= 1e-8) continue;
    const bool equal =
        std::fabs(sa.eigenvalues(i) - triplets.beta(i) * triplets.beta(i)) <= 1e-8;
    const bool fixed =
        (middle * triplets.h.col(i) - triplets.h.col(i)).cwiseAbs().maxCoeff() <= 1e-8;
    // Skip indices inside an eigenvalue tie, where the sorted pairing
    // between h-functions and sandwich eigenvalues is not unique.
    const bool tied =
        (i > 0 && triplets.beta(i - 1) - triplets.beta(i) <= 1e-9) ||
        (i + 1 < triplets.beta.size() && triplets.beta(i) - triplets.beta(i + 1) <= 1e-9);
    if (!tied && equal != fixed) report.equality_criterion_ok = false;
  }
  return report;
}

HaarTrivialityReport haar_triviality_check(
    const DiscreteJoint& joint, const std::vector<std::vector<int>>& group_perms) {
  const Eigen::Index sy = joint.sy();
  const auto orbits = orbits_of_permutations(static_cast<int>(sy), group_perms);

  const Eigen::MatrixXd xgy = joint.x_given_y();
  HaarTrivialityReport report;
  report.invariant = true;
  for (const auto& perm : group_perms)
    for (Eigen::Index iy = 0; iy < sy; ++iy)
      if ((xgy.row(iy) - xgy.row(perm[iy])).cwiseAbs().maxCoeff() > 1e-12)
        report.invariant = false;

  const Eigen::MatrixXd middle = orbit_projection_middle(joint.fy(), orbits);
  const auto da_kernel = build_da_kernel(joint);
  const auto sa_kernel = build_sandwich_kernel(joint, middle);
  report.max_kernel_diff = (da_kernel.p - sa_kernel.p).cwiseAbs().maxCoeff();

  const auto da = spectrum(da_kernel, joint.fx());
  const auto sa = spectrum(sa_kernel, joint.fx());
  for (Eigen::Index i = 0; i < da.eigenvalues.size(); ++i)
    report.max_eigen_drop =
        std::max(report.max_eigen_drop, da.eigenvalues(i) - sa.eigenvalues(i));

  if (report.invariant && report.max_kernel_diff > 1e-12)
    throw std::logic_error("haar_triviality: invariant action but kernels differ");
  if (!report.invariant && report.max_eigen_drop < 1e-10)
    throw std::logic_error("haar_triviality: non-invariant action but no eigenvalue drop");
  return report;
}

CompactnessReport compactness_diagnostics(const GaussianToy& toy) {
  const double rho2 = toy.rho * toy.rho;
  const double var = 1.0 - rho2 * rho2;
  auto kernel = [rho2, var](double x, double xp) {
    const double d = xp - rho2 * x;
    return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * M_PI * var);
  };
  auto stationary = [](double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  };
  return compactness_diagnostics(kernel, stationary, toy.half_width, toy.points);
}

CompactnessReport compactness_diagnostics(
    const std::function<double(double, double)>& kernel_density,
    const std::function<double(double)>& stationary, double half_width, int points) {
  if (points < 3 || half_width <= 0.0)
    throw invalid_parameter("compactness: need points >= 3 and half_width > 0");

  CompactnessReport report;
  const std::array<int, 3> sizes{points / 4, points / 2, points};
  for (int level = 0; level < 3; ++level) {
    const int n = std::max(3, sizes[level]);
    report.grid_sizes[level] = n;
    const double step = 2.0 * half_width / n;
    double trace = 0.0, hs = 0.0;
    std::vector<double> grid(n), f(n);
    for (int i = 0; i < n; ++i) {
      grid[i] = -half_width + (i + 0.5) * step;
      f[i] = stationary(grid[i]);
      trace += kernel_density(grid[i], grid[i]) * step;
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double k = kernel_density(grid[i], grid[j]);
        hs += k * k * f[i] / f[j] * step * step;
      }
    report.trace_estimates[level] = trace;
    report.hs_estimates[level] = hs;

    if (level == 2) {
      Eigen::MatrixXd s(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          s(i, j) = std::sqrt(f[i]) * kernel_density(grid[i], grid[j]) * step /
                    std::sqrt(f[j]);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
      Eigen::VectorXd all = es.eigenvalues();
      Eigen::Index drop = 0;
      (all.array() - 1.0).abs().minCoeff(&drop);
      Eigen::VectorXd rest(n - 1);
      for (Eigen::Index i = 0, k = 0; i < n; ++i)
        if (i != drop) rest(k++) = all(i);
      report.spectrum = sorted_descending(rest);
    }
  }

  const double d1 = std::fabs(report.trace_estimates[1] - report.trace_estimates[0]);
  const double d2 = std::fabs(report.trace_estimates[2] - report.trace_estimates[1]);
  report.observed_order_trace = (d2 > 0.0 && d1 > 0.0) ? std::log2(d1 / d2) : 0.0;
  report.trace_diverging =
      report.trace_estimates[2] > 2.0 * report.trace_estimates[1] + 1.0;
  report.hs_diverging = report.hs_estimates[2] > 2.0 * report.hs_estimates[1] + 1.0;
  return report;
}

}  // namespace damc
