#include "damc/logconcave.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "damc/errors.hpp"

namespace damc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Line {
  double slope = 0.0;
  double icept = 0.0;  // value at x = 0
  double at(double x) const { return icept + slope * x; }
};

Line through(double x1, double y1, double x2, double y2) {
  Line l;
  l.slope = (y2 - y1) / (x2 - x1);
  l.icept = y1 - l.slope * x1;
  return l;
}

struct Segment {
  double lo, hi;  // hi may be +inf, lo may be -inf
  Line line;
  double log_mass;
};

// log of integral of exp(line) over [lo, hi].
double segment_log_mass(const Segment& s) {
  const double m = s.line.slope;
  if (!std::isfinite(s.lo)) {
    if (m <= 0.0) return kNegInf;  // caller must not build this
    return s.line.at(s.hi) - std::log(m);
  }
  if (!std::isfinite(s.hi)) {
    if (m >= 0.0) return kNegInf;
    return s.line.at(s.lo) - std::log(-m);
  }
  const double len = s.hi - s.lo;
  if (std::fabs(m) * len < 1e-12) return s.line.at(s.lo) + std::log(len);
  if (m > 0.0)
    return s.line.at(s.hi) + std::log(-std::expm1(-m * len)) - std::log(m);
  return s.line.at(s.lo) + std::log(-std::expm1(m * len)) - std::log(-m);
}

// Inverse-CDF draw from density proportional to exp(slope * x) on the segment.
double segment_draw(const Segment& s, RngStream& rng) {
  const double m = s.line.slope;
  const double u = rng.uniform_pos();
  if (!std::isfinite(s.hi)) return s.lo + rng.exponential() / (-m);
  if (!std::isfinite(s.lo)) return s.hi - rng.exponential() / m;
  const double len = s.hi - s.lo;
  if (std::fabs(m) * len < 1e-12) return s.lo + u * len;
  if (m > 0.0) return s.hi + std::log(u + (1.0 - u) * std::exp(-m * len)) / m;
  return s.lo + std::log((1.0 - u) + u * std::exp(m * len)) / m;
}

}  // namespace

double sample_log_concave(const std::function<double(double)>& log_density,
                          double lo, double hi, double guess, RngStream& rng,
                          int max_attempts) {
  auto inside = [&](double x) { return x > lo && x < hi; };
  double x0 = guess;
  if (!inside(x0) || !std::isfinite(log_density(x0))) {
    // Probe for a finite starting point.
    const double base = std::isfinite(lo) ? lo : (std::isfinite(hi) ? hi - 1.0 : 0.0);
    for (int k = 0; k < 200 && (!inside(x0) || !std::isfinite(log_density(x0))); ++k)
      x0 = base + std::ldexp(1.0, k % 60 - 30);
    if (!inside(x0) || !std::isfinite(log_density(x0)))
      throw convergence_error("log_concave: no finite density point found");
  }

  // Bracket the mode by doubling steps outward.
  double step = std::max(1e-3, std::fabs(x0) * 0.1);
  double left = x0, right = x0;
  double f0 = log_density(x0);
  for (int k = 0; k < 400; ++k) {
    left = x0 - step;
    if (left <= lo) {
      left = std::isfinite(lo) ? lo + (x0 - lo) * 1e-12 : x0 - step;
      if (left <= lo) left = std::nextafter(lo, hi);
      break;
    }
    if (log_density(left) < f0) break;
    x0 = left;
    f0 = log_density(x0);
    step *= 2.0;
  }
  step = std::max(1e-3, std::fabs(x0) * 0.1);
  for (int k = 0; k < 400; ++k) {
    right = x0 + step;
    if (right >= hi) {
      right = std::isfinite(hi) ? hi - (hi - x0) * 1e-12 : x0 + step;
      if (right >= hi) right = std::nextafter(hi, lo);
      break;
    }
    if (log_density(right) < f0) break;
    x0 = right;
    f0 = log_density(x0);
    step *= 2.0;
  }
  if (left > x0) left = x0;
  if (right < x0) right = x0;

  // Golden-section refinement of the mode.
  const double gr = 0.61803398874989484820;
  double a = left, b = right;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = log_density(c), fd = log_density(d);
  for (int k = 0; k < 80 && (b - a) > 1e-10 * (1.0 + std::fabs(a) + std::fabs(b)); ++k) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = log_density(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = log_density(d);
    }
  }
  const double mode = 0.5 * (a + b);
  const double fmode = log_density(mode);

  // One curvature scale unit.
  const double delta = std::max(1e-6, std::fabs(mode) * 1e-4);
  double curv = kNegInf;
  if (inside(mode - delta) && inside(mode + delta)) {
    const double fp = log_density(mode + delta), fm = log_density(mode - delta);
    if (std::isfinite(fp) && std::isfinite(fm))
      curv = (fp + fm - 2.0 * fmode) / (delta * delta);
  }
  double scale = (std::isfinite(curv) && curv < -1e-300) ? 1.0 / std::sqrt(-curv)
                                                         : std::max(1.0, right - left);
  scale = std::min(scale, 1e6 * (1.0 + std::fabs(mode)));

  auto clamp_finite = [&](double x, double toward) {
    // Pull a support point toward the mode until the density is finite there.
    for (int k = 0; k < 200 && (!inside(x) || !std::isfinite(log_density(x))); ++k)
      x = 0.5 * (x + toward);
    return x;
  };
  double xm = clamp_finite(mode - scale, mode);
  double xp = clamp_finite(mode + scale, mode);

  // Unbounded tails need a decaying secant on that side.
  if (!std::isfinite(hi)) {
    for (int k = 0; k < 300 && log_density(xp) >= fmode; ++k)
      xp = mode + (xp - mode) * 2.0;
    if (log_density(xp) >= fmode)
      throw convergence_error("log_concave: density does not decay to the right");
  }
  if (!std::isfinite(lo)) {
    for (int k = 0; k < 300 && log_density(xm) >= fmode; ++k)
      xm = mode - (mode - xm) * 2.0;
    if (log_density(xm) >= fmode)
      throw convergence_error("log_concave: density does not decay to the left");
  }
  if (!(xm < mode && mode < xp))
    throw convergence_error("log_concave: degenerate support points");

  const double fxm = log_density(xm), fxp = log_density(xp);
  const Line la = through(xm, fxm, mode, fmode);   // valid above f on x <= xm, x >= mode
  const Line lb = through(mode, fmode, xp, fxp);   // valid above f on x <= mode, x >= xp

  std::vector<Segment> segs;
  if (lo < xm) segs.push_back({lo, xm, la, 0.0});
  segs.push_back({xm, mode, lb, 0.0});
  segs.push_back({mode, xp, la, 0.0});
  if (xp < hi) segs.push_back({xp, hi, lb, 0.0});

  double max_lm = kNegInf;
  for (auto& s : segs) {
    s.log_mass = segment_log_mass(s);
    max_lm = std::max(max_lm, s.log_mass);
  }
  if (!std::isfinite(max_lm))
    throw convergence_error("log_concave: envelope has no finite mass");
  double total = 0.0;
  for (auto& s : segs) total += std::exp(s.log_mass - max_lm);

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    double pick = rng.uniform() * total;
    const Segment* seg = &segs.back();
    for (const auto& s : segs) {
      pick -= std::exp(s.log_mass - max_lm);
      if (pick <= 0.0) {
        seg = &s;
        break;
      }
    }
    const double x = segment_draw(*seg, rng);
    if (!inside(x)) continue;
    const double fx = log_density(x);
    if (!std::isfinite(fx)) continue;
    if (std::log(rng.uniform_pos()) <= fx - seg->line.at(x)) return x;
  }
  throw rejection_cap_error("log_concave: attempt cap exceeded");
}

}  // namespace damc
