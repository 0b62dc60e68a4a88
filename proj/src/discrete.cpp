#include "damc/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "damc/errors.hpp"

namespace damc {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw invalid_parameter(msg);
}

Eigen::MatrixXd rows_normalized(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double s = out.row(i).sum();
    require(s > 0.0, "conditional row with zero mass");
    out.row(i) /= s;
  }
  return out;
}

}  // namespace

DiscreteJoint DiscreteJoint::make(Eigen::VectorXd x_grid, Eigen::VectorXd y_grid,
                                  Eigen::MatrixXd pmf) {
  require(pmf.rows() == x_grid.size() && pmf.cols() == y_grid.size(),
          "DiscreteJoint: pmf shape must match grids");
  require((pmf.array() >= 0.0).all(), "DiscreteJoint: negative mass");
  const double total = pmf.sum();
  require(total > 0.0, "DiscreteJoint: zero total mass");
  DiscreteJoint j;
  j.x_grid = std::move(x_grid);
  j.y_grid = std::move(y_grid);
  j.pmf = pmf / total;
  j.strictly_positive = (j.pmf.array() > 0.0).all();
  require(std::fabs(j.pmf.sum() - 1.0) <= 1e-14, "DiscreteJoint: mass != 1");
  require((j.fx().array() > 0.0).all() && (j.fy().array() > 0.0).all(),
          "DiscreteJoint: zero-mass marginal state");
  return j;
}

Eigen::MatrixXd DiscreteJoint::y_given_x() const { return rows_normalized(pmf); }

Eigen::MatrixXd DiscreteJoint::x_given_y() const {
  return rows_normalized(pmf.transpose());
}

TransitionMatrix TransitionMatrix::make(Eigen::MatrixXd p, Eigen::VectorXd grid) {
  require(p.rows() == p.cols(), "TransitionMatrix: must be square");
  require(p.rows() == grid.size(), "TransitionMatrix: grid size mismatch");
  require((p.array() >= 0.0).all(), "TransitionMatrix: negative entry");
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    require(std::fabs(p.row(i).sum() - 1.0) <= 1e-12,
            "TransitionMatrix: row must sum to 1 within 1e-12");
  return {std::move(p), std::move(grid)};
}

TransitionMatrix build_da_kernel(const DiscreteJoint& joint) {
  return TransitionMatrix::make(joint.y_given_x() * joint.x_given_y(), joint.x_grid);
}

TransitionMatrix build_sandwich_kernel(const DiscreteJoint& joint,
                                       const Eigen::MatrixXd& middle) {
  const Eigen::Index sy = joint.sy();
  require(middle.rows() == sy && middle.cols() == sy,
          "sandwich: middle kernel shape mismatch");
  require((middle.array() >= -1e-14).all(), "sandwich: middle kernel negative entry");
  for (Eigen::Index i = 0; i < sy; ++i)
    require(std::fabs(middle.row(i).sum() - 1.0) <= 1e-10,
            "sandwich: middle kernel rows must be stochastic");
  const Eigen::VectorXd fy = joint.fy();
  const double inv_err = (middle.transpose() * fy - fy).cwiseAbs().maxCoeff();
  if (inv_err > 1e-10)
    throw invalid_parameter(
        "sandwich: middle kernel does not leave the y-marginal invariant");
  return TransitionMatrix::make(joint.y_given_x() * middle * joint.x_given_y(),
                                joint.x_grid);
}

Eigen::VectorXd stationary_distribution(const TransitionMatrix& kernel) {
  const Eigen::MatrixXd pt = kernel.p.transpose();
  Eigen::EigenSolver<Eigen::MatrixXd> es(pt);
  int unit_count = 0;
  int unit_idx = -1;
  for (Eigen::Index i = 0; i < pt.rows(); ++i) {
    if (std::abs(es.eigenvalues()(i) - std::complex<double>(1.0, 0.0)) < 1e-8) {
      ++unit_count;
      unit_idx = static_cast<int>(i);
    }
  }
  if (unit_count != 1)
    throw invalid_parameter(
        "stationary_distribution: unit eigenvalue not simple (reducible or "
        "periodic kernel)");
  Eigen::VectorXd v = es.eigenvectors().col(unit_idx).real();
  if (v.sum() < 0.0) v = -v;
  v = v.cwiseMax(0.0);
  return v / v.sum();
}

double check_detailed_balance(const TransitionMatrix& kernel,
                              const Eigen::VectorXd& pmf) {
  const Eigen::MatrixXd flow = pmf.asDiagonal() * kernel.p;
  return (flow - flow.transpose()).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd metropolis_middle(const Eigen::VectorXd& fy, RngStream& rng) {
  const Eigen::Index n = fy.size();
  // Random symmetric sub-stochastic proposal, then Metropolis acceptance
  // toward fy; the row deficit stays on the diagonal.
  Eigen::MatrixXd q(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) q(i, j) = q(j, i) = 0.1 + rng.uniform();
  q /= 2.0 * q.rowwise().sum().maxCoeff();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double stay = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      r(i, j) = q(i, j) * std::min(1.0, fy(j) / fy(i));
      stay -= r(i, j);
    }
    r(i, i) = stay;
  }
  return r;
}

Eigen::MatrixXd orbit_projection_middle(const Eigen::VectorXd& fy,
                                        const std::vector<std::vector<int>>& orbits) {
  const Eigen::Index n = fy.size();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
  std::vector<bool> seen(n, false);
  for (const auto& orbit : orbits) {
    double mass = 0.0;
    for (int i : orbit) {
      require(i >= 0 && i < n && !seen[i], "orbit projection: invalid partition");
      seen[i] = true;
      mass += fy(i);
    }
    for (int i : orbit)
      for (int j : orbit) r(i, j) = fy(j) / mass;
  }
  require(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }),
          "orbit projection: partition must cover the grid");
  return r;
}

std::vector<std::vector<int>> orbits_of_permutations(
    int n, const std::vector<std::vector<int>>& perms) {
  for (const auto& p : perms) {
    require(static_cast<int>(p.size()) == n, "orbits: permutation length mismatch");
    std::vector<bool> hit(n, false);
    for (int v : p) {
      require(v >= 0 && v < n && !hit[v], "orbits: not a permutation of the grid");
      hit[v] = true;
    }
  }
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (const auto& p : perms)
    for (int i = 0; i < n; ++i) parent[find(i)] = find(p[i]);
  std::vector<std::vector<int>> orbits(n);
  for (int i = 0; i < n; ++i) orbits[find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  for (auto& o : orbits)
    if (!o.empty()) out.push_back(std::move(o));
  return out;
}

int grid_index(const Eigen::VectorXd& grid, double value) {
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    if (std::fabs(grid(i) - value) <= 1e-9 * (1.0 + std::fabs(grid(i)))) return static_cast<int>(i);
  throw invalid_parameter("grid_index: value not on grid");
}

int sample_index(const Eigen::VectorXd& pmf, RngStream& rng) {
  double pick = rng.uniform() * pmf.sum();
  for (Eigen::Index i = 0; i < pmf.size(); ++i) {
    pick -= pmf(i);
    if (pick <= 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(pmf.size() - 1);
}

AugmentedModel discrete_model(const DiscreteJoint& joint) {
  AugmentedModel m;
  m.state_dim = 1;
  m.aug_dim = 1;
  const Eigen::MatrixXd ygx = joint.y_given_x();
  const Eigen::MatrixXd xgy = joint.x_given_y();
  const Eigen::VectorXd xg = joint.x_grid, yg = joint.y_grid;
  const Eigen::MatrixXd pmf = joint.pmf;
  m.draw_y_given_x = [ygx, xg, yg](const State& x, RngStream& rng) -> State {
    const int ix = grid_index(xg, x(0));
    State y(1);
    y(0) = yg(sample_index(ygx.row(ix).transpose(), rng));
    return y;
  };
  m.draw_x_given_y = [xgy, xg, yg](const State& y, RngStream& rng) -> State {
    const int iy = grid_index(yg, y(0));
    State x(1);
    x(0) = xg(sample_index(xgy.row(iy).transpose(), rng));
    return x;
  };
  m.log_joint = [pmf, xg, yg](const State& x, const State& y) {
    return std::log(pmf(grid_index(xg, x(0)), grid_index(yg, y(0))));
  };
  return m;
}

MiddleKernel discrete_middle(const Eigen::MatrixXd& middle,
                             const Eigen::VectorXd& y_grid) {
  MiddleKernel k;
  k.draw = [middle, y_grid](const State& y, RngStream& rng) -> State {
    const int iy = grid_index(y_grid, y(0));
    State out(1);
    out(0) = y_grid(sample_index(middle.row(iy).transpose(), rng));
    return out;
  };
  return k;
}

DiscreteJoint random_joint(int sx, int sy, RngStream& rng, double min_mass) {
  Eigen::MatrixXd pmf(sx, sy);
  for (int i = 0; i < sx; ++i)
    for (int j = 0; j < sy; ++j) pmf(i, j) = min_mass + rng.exponential();
  Eigen::VectorXd xg(sx), yg(sy);
  for (int i = 0; i < sx; ++i) xg(i) = i;
  for (int j = 0; j < sy; ++j) yg(j) = j;
  return DiscreteJoint::make(xg, yg, pmf);
}

// ---------------------------------------------------------------------------
// Two-block joint
// ---------------------------------------------------------------------------

DiscreteTwoBlockJoint DiscreteTwoBlockJoint::make(Eigen::VectorXd u_grid,
                                                  Eigen::VectorXd v_grid,
                                                  Eigen::VectorXd y_grid,
                                                  std::vector<Eigen::MatrixXd> pmf) {
  require(static_cast<Eigen::Index>(pmf.size()) == y_grid.size(),
          "TwoBlockJoint: one slab per y value");
  double total = 0.0;
  for (const auto& slab : pmf) {
    require(slab.rows() == u_grid.size() && slab.cols() == v_grid.size(),
            "TwoBlockJoint: slab shape mismatch");
    require((slab.array() >= 0.0).all(), "TwoBlockJoint: negative mass");
    total += slab.sum();
  }
  require(total > 0.0, "TwoBlockJoint: zero mass");
  DiscreteTwoBlockJoint j;
  j.u_grid = std::move(u_grid);
  j.v_grid = std::move(v_grid);
  j.y_grid = std::move(y_grid);
  j.pmf = std::move(pmf);
  for (auto& slab : j.pmf) slab /= total;
  return j;
}

Eigen::VectorXd DiscreteTwoBlockJoint::fx() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(su() * sv());
  for (Eigen::Index iy = 0; iy < sy(); ++iy)
    for (Eigen::Index iu = 0; iu < su(); ++iu)
      for (Eigen::Index iv = 0; iv < sv(); ++iv)
        out(iu * sv() + iv) += pmf[iy](iu, iv);
  return out;
}

Eigen::VectorXd DiscreteTwoBlockJoint::fy() const {
  Eigen::VectorXd out(sy());
  for (Eigen::Index iy = 0; iy < sy(); ++iy) out(iy) = pmf[iy].sum();
  return out;
}

namespace {

// Conditionals used by both the exact kernels and the live samplers.
struct TwoBlockConditionals {
  // y_given_x(iu*sv+iv, iy)
  Eigen::MatrixXd y_given_x;
  // u_given_vy[iy](iv, iu), v_given_uy[iy](iu, iv)
  std::vector<Eigen::MatrixXd> u_given_vy;
  std::vector<Eigen::MatrixXd> v_given_uy;
};

TwoBlockConditionals two_block_conditionals(const DiscreteTwoBlockJoint& j) {
  const Eigen::Index su = j.su(), sv = j.sv(), sy = j.sy();
  TwoBlockConditionals c;
  c.y_given_x.resize(su * sv, sy);
  for (Eigen::Index iu = 0; iu < su; ++iu)
    for (Eigen::Index iv = 0; iv < sv; ++iv)
      for (Eigen::Index iy = 0; iy < sy; ++iy)
        c.y_given_x(iu * sv + iv, iy) = j.p(iu, iv, iy);
  c.y_given_x = rows_normalized(c.y_given_x);
  c.u_given_vy.resize(sy);
  c.v_given_uy.resize(sy);
  for (Eigen::Index iy = 0; iy < sy; ++iy) {
    c.u_given_vy[iy] = rows_normalized(j.pmf[iy].transpose());
    c.v_given_uy[iy] = rows_normalized(j.pmf[iy]);
  }
  return c;
}

}  // namespace

TransitionMatrix build_two_block_kernel(const DiscreteTwoBlockJoint& joint) {
  const Eigen::Index su = joint.su(), sv = joint.sv(), sy = joint.sy();
  const auto cond = two_block_conditionals(joint);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(su * sv, su * sv);
  for (Eigen::Index iu = 0; iu < su; ++iu)
    for (Eigen::Index iv = 0; iv < sv; ++iv) {
      const Eigen::Index from = iu * sv + iv;
      for (Eigen::Index iy = 0; iy < sy; ++iy) {
        const double py = cond.y_given_x(from, iy);
        for (Eigen::Index ju = 0; ju < su; ++ju) {
          const double pu = cond.u_given_vy[iy](iv, ju);
          for (Eigen::Index jv = 0; jv < sv; ++jv)
            k(from, ju * sv + jv) += py * pu * cond.v_given_uy[iy](ju, jv);
        }
      }
    }
  Eigen::VectorXd grid(su * sv);
  for (Eigen::Index i = 0; i < su * sv; ++i) grid(i) = static_cast<double>(i);
  return TransitionMatrix::make(std::move(k), std::move(grid));
}

TransitionMatrix build_two_block_pxda_kernel(
    const DiscreteTwoBlockJoint& joint,
    const std::vector<std::vector<int>>& group_perms, int variant) {
  require(variant == 1 || variant == 2, "two_block_pxda: variant must be 1 or 2");
  require(!group_perms.empty(), "two_block_pxda: empty group");
  const Eigen::Index su = joint.su(), sv = joint.sv(), sy = joint.sy();
  const auto cond = two_block_conditionals(joint);
  // f_{V,Y}(v, y) for variant 1 weights.
  Eigen::MatrixXd fvy = Eigen::MatrixXd::Zero(sv, sy);
  for (Eigen::Index iy = 0; iy < sy; ++iy)
    fvy.col(iy) = joint.pmf[iy].colwise().sum().transpose();

  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(su * sv, su * sv);
  for (Eigen::Index iu = 0; iu < su; ++iu)
    for (Eigen::Index iv = 0; iv < sv; ++iv) {
      const Eigen::Index from = iu * sv + iv;
      for (Eigen::Index iy = 0; iy < sy; ++iy) {
        const double py = cond.y_given_x(from, iy);
        if (py == 0.0) continue;
        // Group-element weights at (x, y).
        std::vector<double> w(group_perms.size());
        double total = 0.0;
        for (std::size_t ig = 0; ig < group_perms.size(); ++ig) {
          const int gy = group_perms[ig][iy];
          w[ig] = (variant == 1) ? fvy(iv, gy) : joint.p(iu, iv, gy);
          total += w[ig];
        }
        require(total > 0.0, "two_block_pxda: zero-mass g-density");
        for (std::size_t ig = 0; ig < group_perms.size(); ++ig) {
          if (w[ig] == 0.0) continue;
          const int gy = group_perms[ig][iy];
          const double pg = py * w[ig] / total;
          for (Eigen::Index ju = 0; ju < su; ++ju) {
            const double pu = cond.u_given_vy[gy](iv, ju);
            for (Eigen::Index jv = 0; jv < sv; ++jv)
              k(from, ju * sv + jv) += pg * pu * cond.v_given_uy[gy](ju, jv);
          }
        }
      }
    }
  Eigen::VectorXd grid(su * sv);
  for (Eigen::Index i = 0; i < su * sv; ++i) grid(i) = static_cast<double>(i);
  return TransitionMatrix::make(std::move(k), std::move(grid));
}

TwoBlockModel discrete_two_block_model(const DiscreteTwoBlockJoint& joint) {
  const auto cond = two_block_conditionals(joint);
  const Eigen::VectorXd ug = joint.u_grid, vg = joint.v_grid, yg = joint.y_grid;
  const Eigen::Index sv = joint.sv();
  TwoBlockModel m;
  m.u_dim = 1;
  m.v_dim = 1;
  m.aug_dim = 1;
  m.draw_y_given_x = [cond, ug, vg, yg, sv](const State& u, const State& v,
                                            RngStream& rng) -> State {
    const Eigen::Index from = grid_index(ug, u(0)) * sv + grid_index(vg, v(0));
    State y(1);
    y(0) = yg(sample_index(cond.y_given_x.row(from).transpose(), rng));
    return y;
  };
  m.draw_u_given_vy = [cond, ug, vg, yg](const State& v, const State& y,
                                         RngStream& rng) -> State {
    const int iy = grid_index(yg, y(0));
    State u(1);
    u(0) = ug(sample_index(cond.u_given_vy[iy].row(grid_index(vg, v(0))).transpose(), rng));
    return u;
  };
  m.draw_v_given_uy = [cond, ug, vg, yg](const State& u, const State& y,
                                         RngStream& rng) -> State {
    const int iy = grid_index(yg, y(0));
    State v(1);
    v(0) = vg(sample_index(cond.v_given_uy[iy].row(grid_index(ug, u(0))).transpose(), rng));
    return v;
  };
  return m;
}

DiscreteTwoBlockJoint random_two_block_joint(int su, int sv, int sy, RngStream& rng,
                                             double min_mass) {
  std::vector<Eigen::MatrixXd> pmf(sy);
  for (int iy = 0; iy < sy; ++iy) {
    pmf[iy].resize(su, sv);
    for (int iu = 0; iu < su; ++iu)
      for (int iv = 0; iv < sv; ++iv) pmf[iy](iu, iv) = min_mass + rng.exponential();
  }
  Eigen::VectorXd ug(su), vg(sv), yg(sy);
  for (int i = 0; i < su; ++i) ug(i) = i;
  for (int i = 0; i < sv; ++i) vg(i) = i;
  for (int i = 0; i < sy; ++i) yg(i) = i;
  return DiscreteTwoBlockJoint::make(ug, vg, yg, std::move(pmf));
}

// ---------------------------------------------------------------------------
// Blocked joint and the exact distributed kernel
// ---------------------------------------------------------------------------

DiscreteBlockedJoint DiscreteBlockedJoint::make(Eigen::VectorXd x_grid,
                                                Eigen::VectorXd y1_grid,
                                                Eigen::VectorXd y2_grid,
                                                Eigen::VectorXd fx,
                                                Eigen::MatrixXd y1_given_x,
                                                Eigen::MatrixXd y2_given_x) {
  require(fx.size() == x_grid.size(), "BlockedJoint: fx size mismatch");
  require((fx.array() > 0.0).all(), "BlockedJoint: fx must be positive");
  require(y1_given_x.rows() == x_grid.size() && y1_given_x.cols() == y1_grid.size(),
          "BlockedJoint: y1 conditional shape mismatch");
  require(y2_given_x.rows() == x_grid.size() && y2_given_x.cols() == y2_grid.size(),
          "BlockedJoint: y2 conditional shape mismatch");
  DiscreteBlockedJoint j;
  j.x_grid = std::move(x_grid);
  j.y1_grid = std::move(y1_grid);
  j.y2_grid = std::move(y2_grid);
  j.fx = fx / fx.sum();
  j.y1_given_x = rows_normalized(y1_given_x);
  j.y2_given_x = rows_normalized(y2_given_x);
  return j;
}

Eigen::VectorXd DiscreteBlockedJoint::joint_pmf() const {
  Eigen::VectorXd out(sx() * s1() * s2());
  for (Eigen::Index ix = 0; ix < sx(); ++ix)
    for (Eigen::Index i1 = 0; i1 < s1(); ++i1)
      for (Eigen::Index i2 = 0; i2 < s2(); ++i2)
        out(flat(static_cast<int>(ix), static_cast<int>(i1), static_cast<int>(i2))) =
            fx(ix) * y1_given_x(ix, i1) * y2_given_x(ix, i2);
  return out;
}

Eigen::VectorXd DiscreteBlockedJoint::x_given_y(int i1, int i2) const {
  Eigen::VectorXd out(sx());
  for (Eigen::Index ix = 0; ix < sx(); ++ix)
    out(ix) = fx(ix) * y1_given_x(ix, i1) * y2_given_x(ix, i2);
  const double s = out.sum();
  require(s > 0.0, "BlockedJoint: zero-mass y configuration");
  return out / s;
}

DiscreteBlockedJoint random_blocked_joint(int sx, int s1, int s2, RngStream& rng) {
  Eigen::VectorXd fx(sx);
  Eigen::MatrixXd c1(sx, s1), c2(sx, s2);
  for (int i = 0; i < sx; ++i) fx(i) = 0.05 + rng.exponential();
  for (int i = 0; i < sx; ++i)
    for (int j = 0; j < s1; ++j) c1(i, j) = 0.05 + rng.exponential();
  for (int i = 0; i < sx; ++i)
    for (int j = 0; j < s2; ++j) c2(i, j) = 0.05 + rng.exponential();
  Eigen::VectorXd xg(sx), g1(s1), g2(s2);
  for (int i = 0; i < sx; ++i) xg(i) = i;
  for (int i = 0; i < s1; ++i) g1(i) = i;
  for (int i = 0; i < s2; ++i) g2(i) = i;
  return DiscreteBlockedJoint::make(xg, g1, g2, fx, c1, c2);
}

TransitionMatrix adda_exact_kernel_discrete(const DiscreteBlockedJoint& joint,
                                            const Eigen::VectorXd& c1,
                                            double epsilon) {
  require(c1.size() == joint.sx(), "adda kernel: c1 size mismatch");
  require((c1.array() >= 0.0).all() && (c1.array() <= 1.0).all(),
          "adda kernel: selection probabilities must lie in [0,1]");
  require(epsilon >= 0.0 && epsilon <= 1.0, "adda kernel: epsilon must lie in [0,1]");
  const Eigen::Index sx = joint.sx(), s1 = joint.s1(), s2 = joint.s2();
  const Eigen::Index n = sx * s1 * s2;
  // Cache x_given_y rows.
  std::vector<Eigen::VectorXd> xgy(s1 * s2);
  for (Eigen::Index i1 = 0; i1 < s1; ++i1)
    for (Eigen::Index i2 = 0; i2 < s2; ++i2)
      xgy[i1 * s2 + i2] =
          joint.x_given_y(static_cast<int>(i1), static_cast<int>(i2));

  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index ix = 0; ix < sx; ++ix) {
    const double w_both = epsilon;
    const double w1 = (1.0 - epsilon) * c1(ix);
    const double w2 = (1.0 - epsilon) * (1.0 - c1(ix));
    for (Eigen::Index i1 = 0; i1 < s1; ++i1)
      for (Eigen::Index i2 = 0; i2 < s2; ++i2) {
        const Eigen::Index from =
            joint.flat(static_cast<int>(ix), static_cast<int>(i1), static_cast<int>(i2));
        for (Eigen::Index j1 = 0; j1 < s1; ++j1)
          for (Eigen::Index j2 = 0; j2 < s2; ++j2) {
            double py = w_both * joint.y1_given_x(ix, j1) * joint.y2_given_x(ix, j2);
            if (j2 == i2) py += w1 * joint.y1_given_x(ix, j1);
            if (j1 == i1) py += w2 * joint.y2_given_x(ix, j2);
            if (py == 0.0) continue;
            const Eigen::VectorXd& px = xgy[j1 * s2 + j2];
            for (Eigen::Index jx = 0; jx < sx; ++jx)
              k(from, joint.flat(static_cast<int>(jx), static_cast<int>(j1),
                                 static_cast<int>(j2))) += py * px(jx);
          }
      }
  }
  Eigen::VectorXd grid(n);
  for (Eigen::Index i = 0; i < n; ++i) grid(i) = static_cast<double>(i);
  return TransitionMatrix::make(std::move(k), std::move(grid));
}

}  // namespace damc
