#ifndef DAMC_DIAGNOSTICS_HPP
#define DAMC_DIAGNOSTICS_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace damc {

/// Standard biased-normalization autocorrelation estimates at the given
/// lags.  Throws on constant traces (undefined ACF) and lags >= n.
Eigen::VectorXd autocorrelation(const Eigen::VectorXd& trace,
                                const std::vector<int>& lags);

struct BatchMeans {
  double mean = 0.0;
  double se = 0.0;
  bool degenerate = false;  // constant trace
};

/// Nonoverlapping batch-means estimate of the Monte Carlo standard error
/// of the trace mean.  Batch count defaults to floor(sqrt(n)).
BatchMeans batch_means_se(const Eigen::VectorXd& trace, int batch_count = 0);

/// n / (1 + 2 sum rho_k) with the ACF sum truncated by the initial
/// monotone sequence rule on lag-pair sums (Geyer 1992).
double effective_sample_size(const Eigen::VectorXd& trace);

struct KernelSummary {
  std::string kernel_id;
  double mean = 0.0;
  double se = 0.0;
  double ess = 0.0;
  double lag1_acf = 0.0;
};

struct KernelComparison {
  std::vector<KernelSummary> rows;
  /// For each pair (i, j), true when row i's mean and row j's differ by
  /// more than 3 combined standard errors.
  std::vector<std::vector<bool>> mean_disagreement;
};

/// Per-kernel mean/SE/ESS/lag-1 ACF table for equal-length traces of the
/// same functional.
KernelComparison compare_kernels(const std::vector<std::string>& kernel_ids,
                                 const std::vector<Eigen::VectorXd>& traces);

}  // namespace damc

#endif  // DAMC_DIAGNOSTICS_HPP
