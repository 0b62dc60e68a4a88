#include "support.hpp"

#include <boost/math/distributions/chi_squared.hpp>

namespace testsupport {

double chi_square_gof_pvalue(const std::vector<double>& draws,
                             const std::vector<double>& edges,
                             const std::function<double(double)>& density,
                             double tail_lo, double tail_hi) {
  const std::size_t nbins = edges.size() + 1;
  std::vector<double> expected(nbins, 0.0);
  std::vector<double> observed(nbins, 0.0);

  double total = 0.0;
  std::vector<double> binp(nbins, 0.0);
  for (std::size_t b = 0; b < nbins; ++b) {
    const double lo = (b == 0) ? tail_lo : edges[b - 1];
    const double hi = (b == nbins - 1) ? tail_hi : edges[b];
    binp[b] = integrate(density, lo, hi, 1e-10);
    total += binp[b];
  }
  for (auto& p : binp) p /= total;

  for (double d : draws) {
    std::size_t b = 0;
    while (b < edges.size() && d > edges[b]) ++b;
    observed[b] += 1.0;
  }
  for (std::size_t b = 0; b < nbins; ++b)
    expected[b] = binp[b] * static_cast<double>(draws.size());

  // Pool sparse bins into their left neighbor.
  std::vector<double> obs_p, exp_p;
  for (std::size_t b = 0; b < nbins; ++b) {
    if (!exp_p.empty() && expected[b] < 5.0) {
      exp_p.back() += expected[b];
      obs_p.back() += observed[b];
    } else {
      exp_p.push_back(expected[b]);
      obs_p.push_back(observed[b]);
    }
  }
  while (exp_p.size() > 1 && exp_p.front() < 5.0) {
    exp_p[1] += exp_p[0];
    obs_p[1] += obs_p[0];
    exp_p.erase(exp_p.begin());
    obs_p.erase(obs_p.begin());
  }

  double stat = 0.0;
  for (std::size_t b = 0; b < exp_p.size(); ++b) {
    const double d = obs_p[b] - exp_p[b];
    stat += d * d / exp_p[b];
  }
  const double dof = static_cast<double>(exp_p.size()) - 1.0;
  if (dof < 1.0) return 1.0;
  boost::math::chi_squared chi(dof);
  return boost::math::cdf(boost::math::complement(chi, stat));
}

}  // namespace testsupport
