#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "damc/discrete.hpp"
#include "damc/errors.hpp"
#include "damc/spectral.hpp"

using namespace damc;

namespace {

DiscreteJoint two_state_toy() {
  Eigen::VectorXd xg(2), yg(2);
  xg << 0.0, 1.0;
  yg << 0.0, 1.0;
  Eigen::MatrixXd pmf(2, 2);
  pmf << 0.4, 0.1, 0.1, 0.4;
  return DiscreteJoint::make(xg, yg, pmf);
}

DiscreteJoint independence_joint(int sx, int sy, RngStream& rng) {
  Eigen::VectorXd fx(sx), fy(sy);
  for (int i = 0; i < sx; ++i) fx(i) = 0.2 + rng.uniform();
  for (int j = 0; j < sy; ++j) fy(j) = 0.2 + rng.uniform();
  fx /= fx.sum();
  fy /= fy.sum();
  Eigen::VectorXd xg(sx), yg(sy);
  for (int i = 0; i < sx; ++i) xg(i) = i;
  for (int j = 0; j < sy; ++j) yg(j) = j;
  return DiscreteJoint::make(xg, yg, fx * fy.transpose());
}

// Joint engineered so the first singular pair is constant on the orbits
// {0,1} and {2,3} of the y grid while the second is not: the orbit
// projection then keeps exactly the first pair.
DiscreteJoint engineered_orbit_joint() {
  Eigen::VectorXd g1(3), g2(3), h1(4), h2(4);
  g1 << std::sqrt(1.5), 0.0, -std::sqrt(1.5);
  g2 << 1.0 / std::sqrt(2.0), -2.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  h1 << 1.0, 1.0, -1.0, -1.0;
  h2 << std::sqrt(2.0), -std::sqrt(2.0), 0.0, 0.0;
  const double b1 = 0.35, b2 = 0.15;
  Eigen::MatrixXd pmf(3, 4);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j)
      pmf(i, j) = (1.0 + b1 * g1(i) * h1(j) + b2 * g2(i) * h2(j)) / 12.0;
  Eigen::VectorXd xg(3), yg(4);
  xg << 0, 1, 2;
  yg << 0, 1, 2, 3;
  return DiscreteJoint::make(xg, yg, pmf);
}

const std::vector<std::vector<int>> kSwapWithinPairs = {{0, 1, 2, 3}, {1, 0, 3, 2}};

}  // namespace

TEST_CASE("da kernel construction") {
  SUBCASE("independence joint gives rows equal to fx") {
    RngStream rng(100, 0);
    const auto joint = independence_joint(4, 5, rng);
    const auto k = build_da_kernel(joint);
    const Eigen::VectorXd fx = joint.fx();
    for (int i = 0; i < 4; ++i)
      CHECK((k.p.row(i).transpose() - fx).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("hand-enumerated 2x2 toy") {
    const auto k = build_da_kernel(two_state_toy());
    CHECK(k.p(0, 0) == doctest::Approx(0.68).epsilon(1e-14));
    CHECK(k.p(0, 1) == doctest::Approx(0.32).epsilon(1e-14));
    CHECK(k.p(1, 0) == doctest::Approx(0.32).epsilon(1e-14));
    CHECK(k.p(1, 1) == doctest::Approx(0.68).epsilon(1e-14));
  }
  SUBCASE("rows sum to one over random joints") {
    RngStream rng(101, 0);
    for (int rep = 0; rep < 100; ++rep) {
      const int sx = 2 + static_cast<int>(rng.uniform() * 7);
      const int sy = 2 + static_cast<int>(rng.uniform() * 7);
      const auto k = build_da_kernel(random_joint(sx, sy, rng));
      for (int i = 0; i < sx; ++i)
        CHECK(std::fabs(k.p.row(i).sum() - 1.0) <= 1e-14);
    }
  }
}

TEST_CASE("stationarity and reversibility of the exact da kernel") {
  RngStream rng(102, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const int sx = 2 + static_cast<int>(rng.uniform() * 19);
    const int sy = 2 + static_cast<int>(rng.uniform() * 19);
    const auto joint = random_joint(sx, sy, rng);
    const auto k = build_da_kernel(joint);
    const Eigen::VectorXd fx = joint.fx();
    CHECK((k.p.transpose() * fx - fx).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(check_detailed_balance(k, fx) <= 1e-12);
    CHECK((stationary_distribution(k) - fx).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("two-state stationary vector") {
    const auto k = build_da_kernel(two_state_toy());
    const auto pi = stationary_distribution(k);
    CHECK(pi(0) == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("doubly stochastic kernel is uniform") {
    Eigen::MatrixXd p(3, 3);
    p << 0.2, 0.3, 0.5, 0.5, 0.2, 0.3, 0.3, 0.5, 0.2;
    Eigen::VectorXd grid(3);
    grid << 0, 1, 2;
    const auto pi = stationary_distribution(TransitionMatrix::make(p, grid));
    CHECK((pi.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("reducible kernel rejected") {
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd grid(3);
    grid << 0, 1, 2;
    CHECK_THROWS_AS(stationary_distribution(TransitionMatrix::make(p, grid)),
                    invalid_parameter);
  }
}

TEST_CASE("sandwich kernel gate and stationarity") {
  const auto joint = two_state_toy();
  SUBCASE("identity middle reproduces the da kernel") {
    const auto da = build_da_kernel(joint);
    const auto sa = build_sandwich_kernel(joint, Eigen::MatrixXd::Identity(2, 2));
    CHECK((da.p - sa.p).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("reversible middle keeps the target stationary") {
    RngStream rng(103, 0);
    const auto middle = metropolis_middle(joint.fy(), rng);
    const auto sa = build_sandwich_kernel(joint, middle);
    const auto pi = stationary_distribution(sa);
    CHECK(pi(0) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(check_detailed_balance(sa, joint.fx()) <= 1e-12);
  }
  SUBCASE("non-invariant middle is rejected") {
    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 0.0, 0.6, 0.4;  // rows stochastic but fy^T r != fy^T
    CHECK_THROWS_AS(build_sandwich_kernel(joint, bad), invalid_parameter);
  }
  SUBCASE("sandwich stationarity for random reversible middles") {
    RngStream rng(104, 0);
    for (int rep = 0; rep < 50; ++rep) {
      const auto j = random_joint(4, 6, rng);
      const auto sa = build_sandwich_kernel(j, metropolis_middle(j.fy(), rng));
      const Eigen::VectorXd fx = j.fx();
      CHECK((sa.p.transpose() * fx - fx).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(check_detailed_balance(sa, fx) <= 1e-12);
    }
  }
}

TEST_CASE("spectrum of the symmetrized kernel") {
  SUBCASE("two-state toy: single mean-zero eigenvalue 0.36") {
    const auto joint = two_state_toy();
    const auto rep = spectrum(build_da_kernel(joint), joint.fx());
    REQUIRE(rep.eigenvalues.size() == 1);
    CHECK(rep.eigenvalues(0) == doctest::Approx(0.36).epsilon(1e-14));
    CHECK(rep.op_norm == doctest::Approx(0.36).epsilon(1e-14));
    CHECK(rep.multiplicity == 1);
    CHECK(rep.reversible);
    CHECK(rep.positive);
  }
  SUBCASE("da spectra are positive with norm below one") {
    RngStream rng(105, 0);
    for (int rep_i = 0; rep_i < 100; ++rep_i) {
      const auto j = random_joint(3 + rep_i % 6, 3 + (rep_i / 2) % 6, rng);
      const auto rep = spectrum(build_da_kernel(j), j.fx());
      CHECK(rep.positive);
      CHECK((rep.eigenvalues.array() >= -1e-12).all());
      CHECK(rep.op_norm < 1.0);
    }
  }
}

TEST_CASE("singular triplets of the joint") {
  SUBCASE("independence joint has no nontrivial correlation") {
    RngStream rng(106, 0);
    const auto triplets = svd_triplets(independence_joint(4, 4, rng));
    CHECK(triplets.beta.cwiseAbs().maxCoeff() < 1e-13);
  }
  SUBCASE("two-state toy: beta1 = 0.6 and beta1^2 matches the spectrum") {
    const auto joint = two_state_toy();
    const auto triplets = svd_triplets(joint);
    CHECK(triplets.beta(0) == doctest::Approx(0.6).epsilon(1e-13));
    const auto rep = spectrum(build_da_kernel(joint), joint.fx());
    CHECK(triplets.beta(0) * triplets.beta(0) ==
          doctest::Approx(rep.eigenvalues(0)).epsilon(1e-13));
    CHECK(triplets.max_relation_error <= 1e-10);
  }
  SUBCASE("beta values decrease within the unit interval") {
    RngStream rng(107, 0);
    for (int rep = 0; rep < 100; ++rep) {
      const auto t = svd_triplets(random_joint(5, 7, rng));
      CHECK(t.max_relation_error <= 1e-10);
      for (int i = 0; i < t.beta.size(); ++i) {
        CHECK(t.beta(i) >= -1e-14);
        CHECK(t.beta(i) <= 1.0 + 1e-12);
        if (i > 0) CHECK(t.beta(i) <= t.beta(i - 1) + 1e-14);
      }
    }
  }
}

TEST_CASE("sandwich spectrum dominance under idempotent middles") {
  SUBCASE("constructed equality case") {
    const auto joint = engineered_orbit_joint();
    const auto middle =
        orbit_projection_middle(joint.fy(), {{0, 1}, {2, 3}});
    const auto rep = verify_dominance(joint, middle);
    CHECK(rep.pointwise_ok);
    CHECK(rep.norm_ok);
    CHECK(rep.equality_criterion_ok);
    // Equality at the first index, strict collapse at the second.
    CHECK(rep.sandwich_eigenvalues(0) ==
          doctest::Approx(rep.da_eigenvalues(0)).epsilon(1e-10));
    CHECK(rep.sandwich_eigenvalues(1) < rep.da_eigenvalues(1) - 1e-3);
    CHECK(std::fabs(rep.sandwich_eigenvalues(1)) < 1e-12);
  }
  SUBCASE("projection onto constants kills the whole spectrum") {
    const auto joint = engineered_orbit_joint();
    const auto middle = orbit_projection_middle(joint.fy(), {{0, 1, 2, 3}});
    const auto rep = verify_dominance(joint, middle);
    CHECK(rep.pointwise_ok);
    CHECK(rep.sandwich_eigenvalues.cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("random group-induced middles never violate dominance") {
    RngStream rng(108, 0);
    for (int rep_i = 0; rep_i < 100; ++rep_i) {
      const int sy = 4 + rep_i % 5;
      const auto j = random_joint(3 + rep_i % 4, sy, rng);
      // Random partition into orbits.
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
      const auto rep = verify_dominance(j, orbit_projection_middle(j.fy(), orbits));
      CHECK(rep.pointwise_ok);
      CHECK(rep.norm_ok);
    }
  }
  SUBCASE("non-idempotent middles are refused") {
    const auto joint = two_state_toy();
    RngStream rng(109, 0);
    const auto middle = metropolis_middle(joint.fy(), rng);
    CHECK_THROWS_AS(verify_dominance(joint, middle), invalid_parameter);
  }
}

TEST_CASE("group-action triviality criterion") {
  SUBCASE("orbit-invariant conditional keeps the kernels identical") {
    // f(x|y) depends on y only through its orbit.
    Eigen::MatrixXd cond(4, 3);
    cond << 0.5, 0.3, 0.2, 0.5, 0.3, 0.2, 0.1, 0.2, 0.7, 0.1, 0.2, 0.7;
    Eigen::VectorXd fy(4);
    fy << 0.1, 0.3, 0.2, 0.4;
    Eigen::MatrixXd pmf = (fy.asDiagonal() * cond).transpose();
    Eigen::VectorXd xg(3), yg(4);
    xg << 0, 1, 2;
    yg << 0, 1, 2, 3;
    const auto joint = DiscreteJoint::make(xg, yg, pmf);
    const auto rep = haar_triviality_check(joint, kSwapWithinPairs);
    CHECK(rep.invariant);
    CHECK(rep.max_kernel_diff <= 1e-12);
  }
  SUBCASE("generic joint improves strictly somewhere") {
    RngStream rng(110, 0);
    const auto joint = random_joint(3, 4, rng);
    const auto rep = haar_triviality_check(joint, kSwapWithinPairs);
    CHECK_FALSE(rep.invariant);
    CHECK(rep.max_eigen_drop >= 1e-10);
  }
  SUBCASE("trivial group is vacuously invariant") {
    RngStream rng(111, 0);
    const auto joint = random_joint(3, 4, rng);
    const auto rep = haar_triviality_check(joint, {{0, 1, 2, 3}});
    CHECK(rep.invariant);
    CHECK(rep.max_kernel_diff <= 1e-12);
  }
}

TEST_CASE("gaussian toy compactness diagnostics") {
  SUBCASE("rho = 0.5 spectrum and trace") {
    const auto rep = compactness_diagnostics(GaussianToy{0.5, 8.0, 400});
    // Mean-zero eigenvalues of the autoregression: rho^2, rho^4, rho^6.
    CHECK(std::fabs(rep.spectrum(0) - 0.25) < 1e-3);
    CHECK(std::fabs(rep.spectrum(1) - 0.0625) < 1e-3);
    CHECK(std::fabs(rep.spectrum(2) - 0.015625) < 1e-3);
    // Trace integral: 1/(1 - rho^2) = 4/3 including the trivial eigenvalue.
    CHECK(std::fabs(rep.trace_estimates[2] - (1.0 / 3.0 + 1.0)) < 1e-3);
    CHECK_FALSE(rep.trace_diverging);
    CHECK_FALSE(rep.hs_diverging);
    // Refinements converge toward the limit (midpoint quadrature on a
    // Gaussian is spectrally accurate, so allow roundoff-level slack).
    CHECK(std::fabs(rep.trace_estimates[2] - 4.0 / 3.0) <=
          std::fabs(rep.trace_estimates[0] - 4.0 / 3.0) + 1e-8);
  }
  SUBCASE("rho = 0 collapses the mean-zero trace") {
    const auto rep = compactness_diagnostics(GaussianToy{0.0, 8.0, 200});
    CHECK(std::fabs(rep.trace_estimates[2] - 1.0) < 1e-6);  // trivial eigenvalue only
    CHECK(rep.spectrum.cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("hs estimate dominates the summed squared spectrum") {
    const auto rep = compactness_diagnostics(GaussianToy{0.5, 8.0, 400});
    double acc = 0.0;
    for (int i = 0; i < rep.spectrum.size(); ++i) acc += rep.spectrum(i) * rep.spectrum(i);
    CHECK(rep.hs_estimates[2] >= acc - 1e-6);
    // Exact limit 1/(1-rho^4) for the full kernel.
    CHECK(rep.hs_estimates[2] == doctest::Approx(1.0 / (1.0 - 0.0625)).epsilon(1e-3));
  }
}

TEST_CASE("two-block exact kernel") {
  RngStream rng(112, 0);
  const auto joint = random_two_block_joint(3, 3, 3, rng);
  const auto k = build_two_block_kernel(joint);
  const Eigen::VectorXd fx = joint.fx();
  SUBCASE("stationarity holds") {
    CHECK((k.p.transpose() * fx - fx).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("detailed balance fails generically") {
    CHECK(check_detailed_balance(k, fx) > 1e-6);
  }
  SUBCASE("independent joint factorizes the update") {
    // f(u,v,y) = fu fv fy: one step lands exactly in fu x fv.
    Eigen::VectorXd fu(2), fv(2), fy(2);
    fu << 0.3, 0.7;
    fv << 0.6, 0.4;
    fy << 0.5, 0.5;
    std::vector<Eigen::MatrixXd> pmf(2);
    for (int iy = 0; iy < 2; ++iy) pmf[iy] = fy(iy) * (fu * fv.transpose());
    Eigen::VectorXd g2(2);
    g2 << 0, 1;
    const auto ind = DiscreteTwoBlockJoint::make(g2, g2, g2, pmf);
    const auto kind = build_two_block_kernel(ind);
    const Eigen::VectorXd target = ind.fx();
    for (int row = 0; row < 4; ++row)
      CHECK((kind.p.row(row).transpose() - target).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("sandwich variants keep the target stationary") {
    const std::vector<std::vector<int>> flip = {{0, 1, 2}, {2, 1, 0}};
    for (int variant : {1, 2}) {
      const auto ks = build_two_block_pxda_kernel(joint, flip, variant);
      CHECK((ks.p.transpose() * fx - fx).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
  SUBCASE("trivial group reduces to the plain two-block kernel") {
    const auto ks = build_two_block_pxda_kernel(joint, {{0, 1, 2}}, 1);
    CHECK((ks.p - k.p).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("exact distributed kernel invariance") {
  RngStream rng(113, 0);
  SUBCASE("joint invariance for random selection probabilities") {
    for (double eps : {0.0, 0.3, 1.0}) {
      for (int rep = 0; rep < 20; ++rep) {
        const auto j = random_blocked_joint(3, 3, 2, rng);
        Eigen::VectorXd c1(3);
        for (int i = 0; i < 3; ++i) c1(i) = rng.uniform();
        const auto k = adda_exact_kernel_discrete(j, c1, eps);
        const Eigen::VectorXd pi = j.joint_pmf();
        CHECK((k.p.transpose() * pi - pi).cwiseAbs().maxCoeff() <= 1e-12);
      }
    }
  }
  SUBCASE("eps = 1 equals the joint da update") {
    const auto j = random_blocked_joint(3, 2, 2, rng);
    Eigen::VectorXd c1 = Eigen::VectorXd::Constant(3, 0.5);
    const auto k = adda_exact_kernel_discrete(j, c1, 1.0);
    // Independent construction of the joint-update kernel.
    const auto n = j.sx() * j.s1() * j.s2();
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(n, n);
    for (int ix = 0; ix < j.sx(); ++ix)
      for (int i1 = 0; i1 < j.s1(); ++i1)
        for (int i2 = 0; i2 < j.s2(); ++i2)
          for (int j1 = 0; j1 < j.s1(); ++j1)
            for (int j2 = 0; j2 < j.s2(); ++j2) {
              const auto px = j.x_given_y(j1, j2);
              for (int jx = 0; jx < j.sx(); ++jx)
                expect(j.flat(ix, i1, i2), j.flat(jx, j1, j2)) +=
                    j.y1_given_x(ix, j1) * j.y2_given_x(ix, j2) * px(jx);
            }
    CHECK((k.p - expect).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("one-sided selection leaves a reducible block") {
    const auto j = random_blocked_joint(2, 2, 2, rng);
    const auto k =
        adda_exact_kernel_discrete(j, Eigen::VectorXd::Constant(2, 1.0), 0.0);
    const Eigen::VectorXd pi = j.joint_pmf();
    CHECK((k.p.transpose() * pi - pi).cwiseAbs().maxCoeff() <= 1e-12);
    // Block 2 never refreshes: a second unit eigenvalue appears.
    Eigen::EigenSolver<Eigen::MatrixXd> es(k.p);
    int units = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      if (std::abs(es.eigenvalues()(i) - std::complex<double>(1.0, 0.0)) < 1e-9)
        ++units;
    CHECK(units >= 2);
  }
  SUBCASE("invalid selection probabilities rejected") {
    const auto j = random_blocked_joint(2, 2, 2, rng);
    Eigen::VectorXd bad = Eigen::VectorXd::Constant(2, 1.4);
    CHECK_THROWS_AS(adda_exact_kernel_discrete(j, bad, 0.5), invalid_parameter);
  }
}
