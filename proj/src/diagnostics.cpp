#include "damc/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "damc/errors.hpp"

namespace damc {

namespace {

double acf_at(const Eigen::VectorXd& centered, double denom, int lag) {
  const Eigen::Index n = centered.size();
  double acc = 0.0;
  for (Eigen::Index t = 0; t + lag < n; ++t) acc += centered(t) * centered(t + lag);
  return acc / denom;
}

}  // namespace

Eigen::VectorXd autocorrelation(const Eigen::VectorXd& trace,
                                const std::vector<int>& lags) {
  const Eigen::Index n = trace.size();
  for (int lag : lags)
    if (lag < 0 || lag >= n)
      throw invalid_parameter("autocorrelation: lag out of range");
  const Eigen::VectorXd centered = trace.array() - trace.mean();
  const double denom = centered.squaredNorm();
  if (denom <= 0.0) throw invalid_parameter("autocorrelation: constant trace");
  Eigen::VectorXd out(static_cast<Eigen::Index>(lags.size()));
  for (std::size_t i = 0; i < lags.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = acf_at(centered, denom, lags[i]);
  return out;
}

BatchMeans batch_means_se(const Eigen::VectorXd& trace, int batch_count) {
  const Eigen::Index n = trace.size();
  if (batch_count <= 0) batch_count = static_cast<int>(std::floor(std::sqrt(n)));
  if (batch_count < 2 || n < 2 * batch_count)
    throw invalid_parameter("batch_means: need n >= 2 * batch count");
  const Eigen::Index batch_len = n / batch_count;
  const Eigen::Index used = batch_len * batch_count;

  BatchMeans out;
  out.mean = trace.head(used).mean();
  double ssq = 0.0;
  for (int b = 0; b < batch_count; ++b) {
    const double bm = trace.segment(b * batch_len, batch_len).mean();
    ssq += (bm - out.mean) * (bm - out.mean);
  }
  const double var_bm = ssq / (batch_count - 1);
  out.se = std::sqrt(var_bm / batch_count);
  out.degenerate = (out.se == 0.0);
  return out;
}

double effective_sample_size(const Eigen::VectorXd& trace) {
  const Eigen::Index n = trace.size();
  if (n == 1) return 1.0;
  const Eigen::VectorXd centered = trace.array() - trace.mean();
  const double denom = centered.squaredNorm();
  if (denom <= 0.0) throw invalid_parameter("ess: constant trace");

  // Geyer's initial monotone sequence over pair sums rho(2k) + rho(2k+1).
  double iact = 1.0;  // 1 + 2 sum rho_k accumulated pairwise
  double prev_pair = std::numeric_limits<double>::infinity();
  for (int k = 0; 2 * k + 1 < n; ++k) {
    const double pair = acf_at(centered, denom, 2 * k) + acf_at(centered, denom, 2 * k + 1);
    if (pair <= 0.0) break;
    const double capped = std::min(pair, prev_pair);
    iact += 2.0 * capped - ((k == 0) ? 2.0 : 0.0);  // rho(0) contributes once
    prev_pair = capped;
  }
  iact = std::max(iact, 1e-12);
  return std::min(static_cast<double>(n), n / iact);
}

KernelComparison compare_kernels(const std::vector<std::string>& kernel_ids,
                                 const std::vector<Eigen::VectorXd>& traces) {
  if (kernel_ids.size() != traces.size())
    throw invalid_parameter("compare_kernels: ids/traces size mismatch");
  for (std::size_t i = 1; i < traces.size(); ++i)
    if (traces[i].size() != traces[0].size())
      throw invalid_parameter("compare_kernels: traces must have equal length");

  KernelComparison cmp;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    KernelSummary row;
    row.kernel_id = kernel_ids[i];
    const auto bm = batch_means_se(traces[i]);
    row.mean = bm.mean;
    row.se = bm.se;
    row.ess = effective_sample_size(traces[i]);
    row.lag1_acf = autocorrelation(traces[i], {1})(0);
    cmp.rows.push_back(row);
  }
  cmp.mean_disagreement.assign(traces.size(), std::vector<bool>(traces.size(), false));
  for (std::size_t i = 0; i < traces.size(); ++i)
    for (std::size_t j = 0; j < traces.size(); ++j) {
      const double se = std::sqrt(cmp.rows[i].se * cmp.rows[i].se +
                                  cmp.rows[j].se * cmp.rows[j].se);
      cmp.mean_disagreement[i][j] =
          std::fabs(cmp.rows[i].mean - cmp.rows[j].mean) > 3.0 * se;
    }
  return cmp;
}

}  // namespace damc
