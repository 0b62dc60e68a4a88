#include "damc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "damc/adda.hpp"
#include "damc/discrete.hpp"
#include "damc/distributions.hpp"
#include "damc/errors.hpp"
#include "damc/spectral.hpp"

namespace damc {

std::string VerifyReport::to_json() const {
  nlohmann::json doc;
  doc["all_pass"] = all_pass();
  doc["notes"] = notes;
  doc["checks"] = nlohmann::json::array();
  for (const auto& c : checks)
    doc["checks"].push_back({{"name", c.name},
                             {"pass", c.pass},
                             {"value", c.value},
                             {"tolerance", c.tolerance},
                             {"detail", c.detail}});
  return doc.dump(2);
}

namespace {

void add(VerifyReport& report, const std::string& name, double value, double tol,
         const std::string& detail = "") {
  report.checks.push_back({name, value <= tol, value, tol, detail});
}

void add_flag(VerifyReport& report, const std::string& name, bool pass,
              const std::string& detail = "") {
  report.checks.push_back({name, pass, pass ? 0.0 : 1.0, 0.0, detail});
}

DiscreteJoint perturbed(const DiscreteJoint& joint, bool inject) {
  if (!inject) return joint;
  // Deliberately break the conditional/joint consistency: the da kernel
  // built from these conditionals can no longer be stationary for fx.
  Eigen::MatrixXd pmf = joint.pmf;
  pmf(0, 0) *= 1.03;
  return DiscreteJoint::make(joint.x_grid, joint.y_grid, pmf);
}

void suite_kernels(VerifyReport& report, std::uint64_t seed, bool inject) {
  RngStream rng(seed, 1);
  double worst_stat = 0.0, worst_dbal = 0.0, worst_row = 0.0, worst_svd = 0.0;
  double worst_eig = 0.0, max_norm = 0.0;
  bool beta_ok = true;
  for (int rep = 0; rep < 100; ++rep) {
    const int sx = 2 + static_cast<int>(rng.uniform() * 19);
    const int sy = 2 + static_cast<int>(rng.uniform() * 19);
    const auto joint = random_joint(sx, sy, rng);
    const auto k = build_da_kernel(perturbed(joint, inject));
    const Eigen::VectorXd fx = joint.fx();
    worst_stat = std::max(worst_stat, (k.p.transpose() * fx - fx).cwiseAbs().maxCoeff());
    worst_dbal = std::max(worst_dbal, check_detailed_balance(k, fx));
    for (int i = 0; i < sx; ++i)
      worst_row = std::max(worst_row, std::fabs(k.p.row(i).sum() - 1.0));
    const auto spec = spectrum(build_da_kernel(joint), fx);
    worst_eig = std::min(spec.eigenvalues.minCoeff(), -worst_eig) * -1.0;
    max_norm = std::max(max_norm, spec.op_norm);
    const auto triplets = svd_triplets(joint);
    worst_svd = std::max(worst_svd, triplets.max_relation_error);
    for (int i = 0; i < triplets.beta.size(); ++i) {
      if (triplets.beta(i) < -1e-14 || triplets.beta(i) > 1.0 + 1e-12) beta_ok = false;
      if (i > 0 && triplets.beta(i) > triplets.beta(i - 1) + 1e-14) beta_ok = false;
    }
  }
  add(report, "da-kernel stationarity (100 random joints)", worst_stat, 1e-12);
  add(report, "da-kernel detailed balance (100 random joints)", worst_dbal, 1e-12);
  add(report, "da-kernel row sums", worst_row, 1e-12);
  add(report, "da spectrum positivity", std::max(0.0, worst_eig), 1e-12);
  add_flag(report, "da spectrum norm < 1", max_norm < 1.0,
           "max operator norm " + std::to_string(max_norm));
  add(report, "singular-triplet relations", worst_svd, 1e-10);
  add_flag(report, "singular values decreasing in [0,1]", beta_ok);

  // sandwich stationarity / reversibility under random reversible middles
  double worst_sa_stat = 0.0, worst_sa_dbal = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto joint = random_joint(4, 6, rng);
    const auto mutant = perturbed(joint, inject);
    const auto sa =
        build_sandwich_kernel(mutant, metropolis_middle(mutant.fy(), rng));
    const Eigen::VectorXd fx = joint.fx();
    worst_sa_stat =
        std::max(worst_sa_stat, (sa.p.transpose() * fx - fx).cwiseAbs().maxCoeff());
    worst_sa_dbal = std::max(worst_sa_dbal, check_detailed_balance(sa, fx));
  }
  add(report, "sandwich stationarity (reversible middles)", worst_sa_stat, 1e-12);
  add(report, "sandwich reversibility (reversible middles)", worst_sa_dbal, 1e-12);

  // two-block: stationary but not reversible
  double worst_tb_stat = 0.0;
  double min_tb_asym = 1.0;
  for (int rep = 0; rep < 25; ++rep) {
    const auto joint = random_two_block_joint(3, 3, 3, rng);
    const auto k = build_two_block_kernel(joint);
    const Eigen::VectorXd fx = joint.fx();
    worst_tb_stat =
        std::max(worst_tb_stat, (k.p.transpose() * fx - fx).cwiseAbs().maxCoeff());
    min_tb_asym = std::min(min_tb_asym, check_detailed_balance(k, fx));
  }
  add(report, "two-block stationarity", worst_tb_stat, 1e-12);
  add_flag(report, "two-block reversibility fails generically", min_tb_asym > 1e-6,
           "smallest detailed-balance asymmetry " + std::to_string(min_tb_asym));

  // two-block sandwich variants stay stationary
  double worst_px = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const auto joint = random_two_block_joint(3, 3, 3, rng);
    const Eigen::VectorXd fx = joint.fx();
    for (int variant : {1, 2}) {
      const auto k = build_two_block_pxda_kernel(joint, {{0, 1, 2}, {2, 1, 0}}, variant);
      worst_px =
          std::max(worst_px, (k.p.transpose() * fx - fx).cwiseAbs().maxCoeff());
    }
  }
  add(report, "two-block sandwich stationarity (both variants)", worst_px, 1e-12);
}

void suite_theorems(VerifyReport& report, std::uint64_t seed) {
  RngStream rng(seed, 2);
  bool pointwise = true, norms = true, criterion = true;
  for (int rep = 0; rep < 100; ++rep) {
    const int sy = 4 + rep % 5;
    const auto joint = random_joint(3 + rep % 4, sy, rng);
    std::vector<std::vector<int>> orbits;
    std::vector<int> idx(sy);
    for (int i = 0; i < sy; ++i) idx[i] = i;
    for (int i = sy - 1; i > 0; --i)
      std::swap(idx[i], idx[static_cast<int>(rng.uniform() * (i + 1))]);
    for (int i = 0; i < sy;) {
      const int len = 1 + static_cast<int>(rng.uniform() * std::min(3, sy - i));
      orbits.emplace_back(idx.begin() + i, idx.begin() + std::min(sy, i + len));
      i += len;
    }
    const auto rep_out =
        verify_dominance(joint, orbit_projection_middle(joint.fy(), orbits));
    pointwise = pointwise && rep_out.pointwise_ok;
    norms = norms && rep_out.norm_ok;
    criterion = criterion && rep_out.equality_criterion_ok;
  }
  add_flag(report, "norm dominance over 100 idempotent middles", norms);
  add_flag(report, "pointwise eigenvalue dominance over 100 idempotent middles",
           pointwise);
  add_flag(report, "fixed-function equality criterion", criterion);

  // Constructed equality case: first singular pair constant on orbits.
  {
    Eigen::VectorXd g1(3), g2(3), h1(4), h2(4);
    g1 << std::sqrt(1.5), 0.0, -std::sqrt(1.5);
    g2 << 1.0 / std::sqrt(2.0), -2.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    h1 << 1.0, 1.0, -1.0, -1.0;
    h2 << std::sqrt(2.0), -std::sqrt(2.0), 0.0, 0.0;
    Eigen::MatrixXd pmf(3, 4);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j)
        pmf(i, j) = (1.0 + 0.35 * g1(i) * h1(j) + 0.15 * g2(i) * h2(j)) / 12.0;
    Eigen::VectorXd xg(3), yg(4);
    xg << 0, 1, 2;
    yg << 0, 1, 2, 3;
    const auto joint = DiscreteJoint::make(xg, yg, pmf);
    const auto dom =
        verify_dominance(joint, orbit_projection_middle(joint.fy(), {{0, 1}, {2, 3}}));
    add(report, "constructed equality case: top eigenvalue preserved",
        std::fabs(dom.sandwich_eigenvalues(0) - dom.da_eigenvalues(0)), 1e-10);
    add_flag(report, "constructed equality case: strict drop below",
             dom.sandwich_eigenvalues(1) < dom.da_eigenvalues(1) - 1e-10);
  }

  // Group-action triviality criterion, both directions.
  {
    Eigen::MatrixXd cond(4, 3);
    cond << 0.5, 0.3, 0.2, 0.5, 0.3, 0.2, 0.1, 0.2, 0.7, 0.1, 0.2, 0.7;
    Eigen::VectorXd fy(4);
    fy << 0.1, 0.3, 0.2, 0.4;
    Eigen::MatrixXd pmf = (fy.asDiagonal() * cond).transpose();
    Eigen::VectorXd xg(3), yg(4);
    xg << 0, 1, 2;
    yg << 0, 1, 2, 3;
    const auto invariant_joint = DiscreteJoint::make(xg, yg, pmf);
    const auto tri =
        haar_triviality_check(invariant_joint, {{0, 1, 2, 3}, {1, 0, 3, 2}});
    add_flag(report, "orbit-invariant conditional keeps kernels identical",
             tri.invariant && tri.max_kernel_diff <= 1e-12);
    const auto generic = random_joint(3, 4, rng);
    const auto tri2 = haar_triviality_check(generic, {{0, 1, 2, 3}, {1, 0, 3, 2}});
    add_flag(report, "generic joint gains a strict eigenvalue drop",
             !tri2.invariant && tri2.max_eigen_drop >= 1e-10);
  }

  // Gaussian toy: spectrum, trace integral, squared-kernel integral.
  {
    const auto comp = compactness_diagnostics(GaussianToy{0.5, 8.0, 400});
    add(report, "gaussian toy eigenvalue 1", std::fabs(comp.spectrum(0) - 0.25), 1e-3);
    add(report, "gaussian toy eigenvalue 2", std::fabs(comp.spectrum(1) - 0.0625),
        1e-3);
    add(report, "gaussian toy eigenvalue 3", std::fabs(comp.spectrum(2) - 0.015625),
        1e-3);
    add(report, "gaussian toy trace integral",
        std::fabs(comp.trace_estimates[2] - 4.0 / 3.0), 1e-3);
    add_flag(report, "gaussian toy integrals converge under refinement",
             !comp.trace_diverging && !comp.hs_diverging);
    double acc = 0.0;
    for (int i = 0; i < comp.spectrum.size(); ++i)
      acc += comp.spectrum(i) * comp.spectrum(i);
    add_flag(report, "squared-kernel integral dominates the summed squared spectrum",
             comp.hs_estimates[2] >= acc - 1e-6);
  }
}

void suite_adda(VerifyReport& report, std::uint64_t seed) {
  RngStream rng(seed, 3);
  double worst = 0.0;
  for (double eps : {0.0, 0.3, 1.0}) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto joint = random_blocked_joint(3, 3, 2, rng);
      Eigen::VectorXd c1(3);
      for (int i = 0; i < 3; ++i) c1(i) = rng.uniform();
      const auto k = adda_exact_kernel_discrete(joint, c1, eps);
      const Eigen::VectorXd pi = joint.joint_pmf();
      worst = std::max(worst, (k.p.transpose() * pi - pi).cwiseAbs().maxCoeff());
    }
  }
  add(report, "distributed kernel invariance (eps in {0, 0.3, 1})", worst, 1e-12);

  const auto joint = random_blocked_joint(3, 2, 2, rng);
  const auto k1 = adda_exact_kernel_discrete(joint, Eigen::VectorXd::Constant(3, 0.4),
                                             1.0);
  // eps = 1: independent reconstruction of the full joint update.
  double diff = 0.0;
  {
    const auto n = joint.sx() * joint.s1() * joint.s2();
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(n, n);
    for (int ix = 0; ix < joint.sx(); ++ix)
      for (int i1 = 0; i1 < joint.s1(); ++i1)
        for (int i2 = 0; i2 < joint.s2(); ++i2)
          for (int j1 = 0; j1 < joint.s1(); ++j1)
            for (int j2 = 0; j2 < joint.s2(); ++j2) {
              const auto px = joint.x_given_y(j1, j2);
              for (int jx = 0; jx < joint.sx(); ++jx)
                expect(joint.flat(ix, i1, i2), joint.flat(jx, j1, j2)) +=
                    joint.y1_given_x(ix, j1) * joint.y2_given_x(ix, j2) * px(jx);
            }
    diff = (k1.p - expect).cwiseAbs().maxCoeff();
  }
  add(report, "eps = 1 equals the joint da update", diff, 1e-14);

  // Reducibility detection when one block never refreshes.
  const auto k0 = adda_exact_kernel_discrete(joint, Eigen::VectorXd::Constant(3, 1.0),
                                             0.0);
  Eigen::EigenSolver<Eigen::MatrixXd> es(k0.p);
  int units = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i) - std::complex<double>(1.0, 0.0)) < 1e-9) ++units;
  add_flag(report, "one-sided selection leaves a second unit eigenvalue", units >= 2,
           std::to_string(units) + " unit eigenvalues");

  // Conditional-independence gate.
  bool rejected = false;
  try {
    std::vector<Eigen::MatrixXd> slabs(2);
    for (int ix = 0; ix < 2; ++ix) {
      slabs[ix].resize(2, 2);
      slabs[ix] << 0.4, 0.1, 0.1, 0.4;
    }
    Eigen::VectorXd g2(2);
    g2 << 0, 1;
    blocked_joint_from_general(g2, g2, g2, slabs);
  } catch (const invalid_parameter&) {
    rejected = true;
  }
  add_flag(report, "correlated latent blocks rejected by the factorization gate",
           rejected);
}

void suite_distributions(VerifyReport& report, std::uint64_t seed) {
  RngStream rng(seed, 4);
  // Moment spot checks at verify scale (the full 10^6-draw versions run in
  // the acceptance suite).
  auto mc_mean = [&](auto&& draw, int n) {
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = draw(rng);
      acc += d;
      acc2 += d * d;
    }
    const double mean = acc / n;
    return std::pair<double, double>(
        mean, std::sqrt((acc2 / n - mean * mean) / static_cast<double>(n)));
  };
  {
    const auto [mean, se] = mc_mean(
        [](RngStream& r) { return sample_polya_gamma({1.0, 0.0}, r); }, 200000);
    add(report, "pg(1,0) mean 1/4", std::fabs(mean - 0.25), 3.0 * se);
  }
  {
    const auto [mean, se] = mc_mean(
        [](RngStream& r) { return sample_inverse_gaussian({1.3, 2.0}, r); }, 200000);
    add(report, "inverse-gaussian mean kappa", std::fabs(mean - 1.3), 3.0 * se);
  }
  {
    const auto [mean, se] = mc_mean(
        [](RngStream& r) { return sample_truncated_normal(0.0, 1.0, 1, r); }, 200000);
    add(report, "half-normal mean sqrt(2/pi)",
        std::fabs(mean - std::sqrt(2.0 / M_PI)), 3.0 * se);
  }
  // Simpson quadrature of the density layer.
  auto simpson_mass = [](auto&& f, double lo, double hi, int n) {
    double acc = 0.0;
    const double h = (hi - lo) / n;
    for (int i = 0; i < n; ++i) {
      const double a = lo + i * h;
      acc += h / 6.0 * (f(a) + 4.0 * f(a + h / 2.0) + f(a + h));
    }
    return acc;
  };
  add(report, "pg density mass",
      std::fabs(simpson_mass(
                    [](double t) { return density_polya_gamma(t, {1.0, 1.0}); }, 1e-9,
                    30.0, 60000) -
                1.0),
      1e-6);
  add(report, "inverse-gaussian density mass",
      std::fabs(simpson_mass(
                    [](double u) {
                      return std::exp(log_density_inverse_gaussian(u, {2.0, 3.0}));
                    },
                    1e-9, 250.0, 8000) -
                1.0),
      1e-6);
  add(report, "asymmetric-laplace quantile",
      std::fabs(simpson_mass([](double e) { return density_asymmetric_laplace(e, 0.3); },
                             -60.0, 0.0, 8000) -
                0.3),
      1e-6);
}

}  // namespace

VerifyReport run_verify(const VerifyOptions& options) {
  VerifyReport report;
  const bool all = (options.suite == "all");
  if (!(all || options.suite == "kernels" || options.suite == "theorems" ||
        options.suite == "adda" || options.suite == "distributions"))
    throw invalid_parameter("verify: unknown suite '" + options.suite + "'");
  if (all || options.suite == "kernels")
    suite_kernels(report, options.seed, options.inject_kernel_bug);
  if (all || options.suite == "theorems") suite_theorems(report, options.seed);
  if (all || options.suite == "adda") suite_adda(report, options.seed);
  if (all || options.suite == "distributions") suite_distributions(report, options.seed);
  report.notes.push_back(
      "Norm-dominance checks verify the conclusion of the operator comparison "
      "theorems; the hypothesis that a sandwich chain is itself representable "
      "as a data-augmentation chain is not checkable in general.");
  report.notes.push_back(
      "Geometric ergodicity is certified only through the finite-state proxy "
      "of a mean-zero operator norm below one.");
  return report;
}

}  // namespace damc
