#ifndef DAMC_TESTS_SUPPORT_HPP
#define DAMC_TESTS_SUPPORT_HPP

// Shared independent oracles for the test suites: adaptive quadrature,
// Monte Carlo moment summaries, and simple goodness-of-fit statistics.
// Everything here is deliberately kept apart from the library's own
// numerical paths so the tests check one implementation against another.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace testsupport {

inline double simpson(const std::function<double(double)>& f, double a, double b) {
  return (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                                   double b, double whole, double tol, int depth,
                                   int force) {
  const double mid = 0.5 * (a + b);
  const double left = simpson(f, a, mid);
  const double right = simpson(f, mid, b);
  // The forced levels guard against false convergence on integrands that
  // are sharply peaked somewhere inside a wide panel.
  if (force <= 0 && (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol))
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_rec(f, a, mid, left, tol / 2.0, depth - 1, force - 1) +
         adaptive_simpson_rec(f, mid, b, right, tol / 2.0, depth - 1, force - 1);
}

/// Adaptive Simpson quadrature over [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int depth = 60) {
  return adaptive_simpson_rec(f, a, b, simpson(f, a, b), tol, depth, 11);
}

/// 2-D quadrature by iterated 1-D integration.
inline double integrate2d(const std::function<double(double, double)>& f, double ax,
                          double bx, double ay, double by, double tol = 1e-8) {
  auto inner = [&](double x) {
    return integrate([&](double y) { return f(x, y); }, ay, by, tol);
  };
  return integrate(inner, ax, bx, tol);
}

struct MomentSummary {
  double mean = 0.0;
  double variance = 0.0;
  double se_mean = 0.0;  // sqrt(variance / n) for iid draws
  std::size_t n = 0;
};

inline MomentSummary summarize(const std::vector<double>& draws) {
  MomentSummary s;
  s.n = draws.size();
  for (double d : draws) s.mean += d;
  s.mean /= static_cast<double>(s.n);
  for (double d : draws) s.variance += (d - s.mean) * (d - s.mean);
  s.variance /= static_cast<double>(s.n - 1);
  s.se_mean = std::sqrt(s.variance / static_cast<double>(s.n));
  return s;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    const double fa = static_cast<double>(i) / a.size();
    const double fb = static_cast<double>(j) / b.size();
    d = std::max(d, std::fabs(fa - fb));
  }
  return d;
}

/// 1% critical value for the two-sample KS statistic.
inline double ks_critical_1pct(std::size_t n, std::size_t m) {
  return 1.628 * std::sqrt((n + m) / static_cast<double>(n * m));
}

/// Chi-square goodness-of-fit p-value for binned draws against bin
/// probabilities (expected counts pooled below 5).
double chi_square_gof_pvalue(const std::vector<double>& draws,
                             const std::vector<double>& edges,
                             const std::function<double(double)>& density,
                             double tail_lo, double tail_hi);

struct GridMoments {
  double mean_x = 0.0, var_x = 0.0;
  double mean_y = 0.0, var_y = 0.0;
};

/// Dense midpoint-grid moments of a 2-D density given by its log (up to a
/// constant).  With log_y the second axis is gridded in log space (the
/// Jacobian is folded in), which resolves sharply peaked scale coordinates
/// with heavy right tails.
inline GridMoments grid_moments_2d(const std::function<double(double, double)>& logf,
                                   double xlo, double xhi, double ylo, double yhi,
                                   int nx = 400, int ny = 400, bool log_y = false) {
  const double tlo = log_y ? std::log(ylo) : ylo;
  const double thi = log_y ? std::log(yhi) : yhi;
  const double dx = (xhi - xlo) / nx, dt = (thi - tlo) / ny;
  double lmax = -std::numeric_limits<double>::infinity();
  std::vector<double> vals(static_cast<std::size_t>(nx) * ny);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const double t = tlo + (j + 0.5) * dt;
      const double y = log_y ? std::exp(t) : t;
      double v = logf(xlo + (i + 0.5) * dx, y);
      if (log_y) v += t;  // dy = e^t dt
      vals[static_cast<std::size_t>(i) * ny + j] = v;
      lmax = std::max(lmax, v);
    }
  double mass = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const double x = xlo + (i + 0.5) * dx;
      const double t = tlo + (j + 0.5) * dt;
      const double y = log_y ? std::exp(t) : t;
      const double w = std::exp(vals[static_cast<std::size_t>(i) * ny + j] - lmax);
      mass += w;
      sx += w * x;
      sy += w * y;
      sxx += w * x * x;
      syy += w * y * y;
    }
  GridMoments m;
  m.mean_x = sx / mass;
  m.mean_y = sy / mass;
  m.var_x = sxx / mass - m.mean_x * m.mean_x;
  m.var_y = syy / mass - m.mean_y * m.mean_y;
  return m;
}

/// 1-D analogue.
inline GridMoments grid_moments_1d(const std::function<double(double)>& logf,
                                   double lo, double hi, int n = 4000) {
  auto two = grid_moments_2d([&](double x, double) { return logf(x); }, lo, hi, 0.0,
                             1.0, n, 1);
  return two;
}

}  // namespace testsupport

#endif  // DAMC_TESTS_SUPPORT_HPP
