#ifndef DAMC_IO_HPP
#define DAMC_IO_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "damc/adda.hpp"
#include "damc/da_core.hpp"

namespace damc {

/// Numeric CSV with a header row.
struct CsvTable {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;

  int column_index(const std::string& name) const;  // -1 when absent
  Eigen::VectorXd column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table,
               const std::vector<std::string>& meta_lines = {});

/// Round-trippable fixed formatting used for every numeric artifact, so
/// identical runs produce byte-identical files.
std::string format_double(double v);

/// FNV-1a hash of canonical config text, recorded in every artifact.
std::uint64_t fnv1a(const std::string& text);

/// Parsed, schema-validated run configuration.  Unknown keys anywhere in
/// the document are rejected; the kernel/model compatibility matrix is
/// enforced at parse time.
struct RunConfig {
  std::string model_tag;   // lasso | elastic-net | logistic | probit-glmm |
                           // robit | quantreg
  std::string kernel_tag;  // da | haar-pxda | two-block | two-block-pxda:1 |
                           // two-block-pxda:2 | adda
  int iterations = 1000;
  int burn_in = 0;
  std::uint64_t seed = 0;
  std::string data_path;
  std::string response_column;
  std::string out_path = "trace.csv";
  std::uint64_t config_hash = 0;

  // Family-specific parameters (filled per model_tag).
  double lambda = 1.0, lambda1 = 1.0, lambda2 = 0.0;
  double prior_shape = 0.0, prior_rate = 0.0;  // shrinkage variance prior
  ColumnPrep prep = ColumnPrep::Center;
  std::string trials_column;  // logistic; empty = all ones
  Eigen::VectorXd prior_mean;
  Eigen::MatrixXd prior_precision;  // logistic / robit
  bool assert_propriety = false;
  double nu = 4.0;  // robit
  Eigen::VectorXd glmm_beta;
  std::vector<std::string> w_columns, v_columns;
  std::vector<ProbitBlockSpec> glmm_blocks;
  double quantile = 0.5;  // quantreg
  Eigen::MatrixXd prior_cov;
  double n0 = 1.0, t0 = 1.0;

  // Distributed-engine settings.
  AddaConfig adda;
  std::optional<LatencyModel> latency;
  std::string schedule_path;
  std::vector<std::pair<double, double>> report_configs;  // adda-report rows
};

RunConfig parse_run_config(const std::string& path);

CompletionSchedule read_schedule(const std::string& path);

/// Assembled pieces of a configured run.
struct PreparedRun {
  KernelFn kernel;
  State init;
  std::vector<std::string> state_columns;
  std::string model_id;
  // Distributed runs go through the blocked model instead of the kernel.
  std::optional<BlockedModel> blocked;
  Eigen::VectorXd blocked_y0;
};

PreparedRun prepare_run(const RunConfig& config);

/// Writes a trace with `#`-prefixed metadata lines (seed, config hash,
/// software version, model, kernel, burn-in).
void write_trace(const std::string& path, const ChainTrace& trace,
                 const std::vector<std::string>& columns, std::uint64_t config_hash);

constexpr const char* kSoftwareVersion = "0.1.0";

}  // namespace damc

#endif  // DAMC_IO_HPP
