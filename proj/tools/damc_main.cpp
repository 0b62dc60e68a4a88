// Command-line front end: config-driven chain runs, trace diagnostics, the
// oracle verification suite, and the distributed mixing/cost report.

#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "damc/adda.hpp"
#include "damc/diagnostics.hpp"
#include "damc/errors.hpp"
#include "damc/io.hpp"
#include "damc/verify.hpp"

namespace {

using namespace damc;

int cmd_run(const std::string& config_path, std::uint64_t seed_override,
            bool has_seed, const std::string& out_override) {
  RunConfig cfg = parse_run_config(config_path);
  if (has_seed) cfg.seed = seed_override;
  if (!out_override.empty()) cfg.out_path = out_override;

  const PreparedRun prepared = prepare_run(cfg);
  ChainTrace trace;
  std::vector<std::string> columns = prepared.state_columns;

  if (prepared.blocked) {
    CompletionSchedule schedule;
    const CompletionSchedule* sched = nullptr;
    if (!cfg.schedule_path.empty()) {
      schedule = read_schedule(cfg.schedule_path);
      sched = &schedule;
    }
    LatencyModel latency = cfg.latency.value_or(LatencyModel{});
    // The command line always drives the deterministic simulator so a
    // fixed (config, seed) pair reproduces the trace byte for byte.
    auto result =
        adda_run_sim(*prepared.blocked, cfg.adda, cfg.iterations + cfg.burn_in,
                     prepared.init, prepared.blocked_y0, cfg.seed, sched, &latency);
    trace = std::move(result.trace);
    trace.burn_in = cfg.burn_in;
    if (cfg.burn_in > 0)
      trace.draws = trace.draws.bottomRows(cfg.iterations).eval();
    for (int i = 0; i < prepared.blocked->aug_dim(); ++i)
      columns.push_back("y_" + std::to_string(i));
  } else {
    RngStream rng(cfg.seed, 0);
    trace = run_chain(prepared.kernel, prepared.init, cfg.iterations, cfg.burn_in, rng,
                      cfg.kernel_tag, prepared.model_id);
  }
  write_trace(cfg.out_path, trace, columns, cfg.config_hash);
  std::printf("wrote %lld draws to %s\n",
              static_cast<long long>(trace.draws.rows()), cfg.out_path.c_str());
  return 0;
}

int cmd_diagnose(const std::string& trace_path, std::vector<int> lags, int batches,
                 const std::string& out_path, const std::string& format) {
  const CsvTable trace = read_csv(trace_path);
  if (lags.empty()) lags = {1, 5, 10};

  nlohmann::json jout;
  CsvTable table;
  table.columns = {"column", "mean", "se", "ess"};
  for (int lag : lags) table.columns.push_back("acf_" + std::to_string(lag));
  std::vector<std::vector<double>> rows;

  for (std::size_t c = 0; c < trace.columns.size(); ++c) {
    const Eigen::VectorXd col = trace.values.col(static_cast<Eigen::Index>(c));
    const auto bm = batch_means_se(col, batches);
    nlohmann::json entry;
    entry["column"] = trace.columns[c];
    entry["mean"] = bm.mean;
    entry["se"] = bm.se;
    entry["degenerate"] = bm.degenerate;
    std::vector<double> row{static_cast<double>(c), bm.mean, bm.se, 0.0};
    if (!bm.degenerate) {
      entry["ess"] = effective_sample_size(col);
      row[3] = entry["ess"].get<double>();
      const auto acf = autocorrelation(col, lags);
      for (Eigen::Index i = 0; i < acf.size(); ++i) {
        entry["acf"][std::to_string(lags[static_cast<std::size_t>(i)])] = acf(i);
        row.push_back(acf(i));
      }
    } else {
      for (std::size_t i = 0; i < lags.size(); ++i) row.push_back(0.0);
    }
    jout["columns"].push_back(entry);
    rows.push_back(row);
  }

  if (format == "json") {
    if (out_path.empty()) {
      std::cout << jout.dump(2) << "\n";
    } else {
      std::ofstream out(out_path);
      out << jout.dump(2) << "\n";
    }
  } else {
    table.values.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(table.columns.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < rows[i].size(); ++j)
        table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            rows[i][j];
    write_csv(out_path.empty() ? "diagnostics.csv" : out_path, table);
  }
  return 0;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, bool inject,
               const std::string& out_path) {
  VerifyOptions opt;
  opt.suite = suite;
  opt.seed = seed;
  opt.inject_kernel_bug = inject;
  const VerifyReport report = run_verify(opt);
  const std::string json = report.to_json();
  if (out_path.empty()) {
    std::cout << json << "\n";
  } else {
    std::ofstream out(out_path);
    out << json << "\n";
  }
  for (const auto& c : report.checks)
    std::fprintf(stderr, "%s  %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str());
  return report.all_pass() ? 0 : 1;
}

int cmd_adda_report(const std::string& config_path, const std::string& out_path,
                    std::uint64_t seed_override, bool has_seed) {
  RunConfig cfg = parse_run_config(config_path);
  if (has_seed) cfg.seed = seed_override;
  if (cfg.kernel_tag != "adda")
    throw invalid_parameter("adda-report: config must use the adda kernel");
  if (cfg.report_configs.empty())
    throw invalid_parameter("adda-report: config needs an adda.report list");
  const PreparedRun prepared = prepare_run(cfg);
  const LatencyModel latency = cfg.latency.value_or(LatencyModel{});
  const auto rows =
      adda_wall_clock_report(*prepared.blocked, cfg.report_configs, latency,
                             cfg.iterations, prepared.init, prepared.blocked_y0,
                             cfg.seed);
  CsvTable table;
  table.columns = {"r",            "epsilon",      "iterations", "sim_seconds",
                   "sec_per_iter", "ess",          "ess_per_sec"};
  table.values.resize(static_cast<Eigen::Index>(rows.size()), 7);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    table.values.row(static_cast<Eigen::Index>(i)) << r.r, r.epsilon,
        static_cast<double>(r.iterations), r.sim_seconds, r.sec_per_iter, r.ess,
        r.ess_per_sec;
  }
  write_csv(out_path.empty() ? "adda_report.csv" : out_path, table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"data-augmentation mcmc engine"};
  app.require_subcommand(1);

  int threads = 0;

  std::string run_config, run_out;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "run a configured chain and write its trace");
  run->add_option("--config", run_config, "json run configuration")->required();
  auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out", run_out, "override the output path");
  run->add_option("--threads", threads, "linear-algebra thread cap")
      ->envname("DAMC_THREADS");

  std::string diag_trace, diag_out, diag_format = "csv";
  std::vector<int> diag_lags;
  int diag_batches = 0;
  auto* diag = app.add_subcommand("diagnose", "summarize a trace file");
  diag->add_option("--trace", diag_trace, "trace csv")->required();
  diag->add_option("--lags", diag_lags, "autocorrelation lags");
  diag->add_option("--batches", diag_batches, "batch count (default sqrt(n))");
  diag->add_option("--out", diag_out, "output path");
  diag->add_option("--format", diag_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  std::string verify_suite = "all", verify_out;
  std::uint64_t verify_seed = 20240501;
  bool inject = false;
  auto* verify = app.add_subcommand("verify", "run the oracle suite, emit json");
  verify->add_option("--suite", verify_suite, "all|kernels|theorems|adda|distributions");
  verify->add_option("--seed", verify_seed, "sweep seed");
  verify->add_option("--out", verify_out, "report path (stdout if omitted)");
  verify->add_flag("--inject-kernel-bug", inject,
                   "testing aid: perturb a conditional so checks must fail");

  std::string report_config, report_out;
  std::uint64_t report_seed = 0;
  auto* report = app.add_subcommand(
      "adda-report", "mixing/cost tradeoff table for the distributed engine");
  report->add_option("--config", report_config, "json run configuration")->required();
  report->add_option("--out", report_out, "output csv");
  auto* report_seed_opt = report->add_option("--seed", report_seed, "override seed");
  report->add_option("--threads", threads, "linear-algebra thread cap")
      ->envname("DAMC_THREADS");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) Eigen::setNbThreads(threads);

  try {
    if (run->parsed())
      return cmd_run(run_config, seed, seed_opt->count() > 0, run_out);
    if (diag->parsed())
      return cmd_diagnose(diag_trace, diag_lags, diag_batches, diag_out, diag_format);
    if (verify->parsed())
      return cmd_verify(verify_suite, verify_seed, inject, verify_out);
    if (report->parsed())
      return cmd_adda_report(report_config, report_out, report_seed,
                             report_seed_opt->count() > 0);
  } catch (const invalid_parameter& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return 2;
  }
  return 1;
}
