#include "damc/io.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "damc/errors.hpp"
#include "damc/models.hpp"

namespace damc {

using nlohmann::json;

int CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

Eigen::VectorXd CsvTable::column(const std::string& name) const {
  const int idx = column_index(name);
  if (idx < 0) throw invalid_parameter("csv: no column named '" + name + "'");
  return values.col(idx);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_parameter("csv: cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  std::vector<std::vector<double>> rows;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    if (!header_done) {
      while (std::getline(ss, cell, ',')) table.columns.push_back(cell);
      header_done = true;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (...) {
        throw invalid_parameter("csv: non-numeric cell '" + cell + "' in " + path);
      }
    }
    if (row.size() != table.columns.size())
      throw invalid_parameter("csv: ragged row in " + path);
    rows.push_back(std::move(row));
  }
  if (!header_done) throw invalid_parameter("csv: empty file " + path);
  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  return table;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const CsvTable& table,
               const std::vector<std::string>& meta_lines) {
  std::ofstream out(path);
  if (!out) throw invalid_parameter("csv: cannot write '" + path + "'");
  for (const auto& m : meta_lines) out << "# " << m << "\n";
  for (std::size_t j = 0; j < table.columns.size(); ++j)
    out << table.columns[j] << (j + 1 < table.columns.size() ? "," : "\n");
  for (Eigen::Index i = 0; i < table.values.rows(); ++i)
    for (Eigen::Index j = 0; j < table.values.cols(); ++j)
      out << format_double(table.values(i, j))
          << (j + 1 < table.values.cols() ? "," : "\n");
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key))
      throw invalid_parameter("config: unknown key '" + key + "' in " + context);
}

Eigen::VectorXd parse_vector(const json& j, const std::string& context) {
  if (!j.is_array()) throw invalid_parameter("config: " + context + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Eigen::MatrixXd parse_matrix(const json& j, const std::string& context) {
  if (j.is_number()) return Eigen::MatrixXd::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw invalid_parameter("config: " + context + " must be a matrix or scalar");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols)
      throw invalid_parameter("config: ragged matrix in " + context);
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

const std::map<std::string, std::set<std::string>> kCompatible = {
    {"lasso", {"da", "adda"}},
    {"elastic-net", {"da"}},
    {"logistic", {"da", "adda"}},
    {"probit-glmm", {"da", "haar-pxda"}},
    {"robit", {"da"}},
    {"quantreg", {"two-block", "two-block-pxda:1", "two-block-pxda:2"}},
};

/// Expands a 1x1 precision/covariance shorthand to c * I_p.
Eigen::MatrixXd sized(const Eigen::MatrixXd& m, Eigen::Index p) {
  if (m.rows() == 1 && m.cols() == 1 && p > 1)
    return m(0, 0) * Eigen::MatrixXd::Identity(p, p);
  return m;
}

}  // namespace

RunConfig parse_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_parameter("config: cannot open '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw invalid_parameter(std::string("config: parse error: ") + e.what());
  }

  check_keys(doc,
             {"model", "kernel", "iterations", "burn_in", "seed", "data", "response",
              "out", "lasso", "elastic_net", "logistic", "probit_glmm", "robit",
              "quantreg", "adda"},
             "top level");

  RunConfig cfg;
  cfg.config_hash = fnv1a(doc.dump());
  cfg.model_tag = doc.at("model").get<std::string>();
  cfg.kernel_tag = doc.at("kernel").get<std::string>();
  const auto compat = kCompatible.find(cfg.model_tag);
  if (compat == kCompatible.end())
    throw invalid_parameter("config: unknown model '" + cfg.model_tag + "'");
  if (!compat->second.count(cfg.kernel_tag))
    throw invalid_parameter("config: kernel '" + cfg.kernel_tag +
                            "' is not valid for model '" + cfg.model_tag + "'");
  cfg.iterations = doc.value("iterations", 1000);
  cfg.burn_in = doc.value("burn_in", 0);
  cfg.seed = doc.value("seed", 0ULL);
  cfg.data_path = doc.at("data").get<std::string>();
  cfg.response_column = doc.value("response", "z");
  cfg.out_path = doc.value("out", "trace.csv");
  if (cfg.iterations <= 0) throw invalid_parameter("config: iterations must be > 0");
  if (cfg.burn_in < 0) throw invalid_parameter("config: burn_in must be >= 0");

  auto parse_prep = [](const json& j) {
    const std::string s = j.get<std::string>();
    if (s == "none") return ColumnPrep::Validate;
    if (s == "center") return ColumnPrep::Center;
    if (s == "center-scale") return ColumnPrep::CenterScale;
    throw invalid_parameter("config: columns must be none|center|center-scale");
  };

  if (doc.contains("lasso")) {
    const auto& m = doc["lasso"];
    check_keys(m, {"lambda", "alpha", "xi", "columns"}, "lasso");
    cfg.lambda = m.value("lambda", 1.0);
    cfg.prior_shape = m.value("alpha", 0.0);
    cfg.prior_rate = m.value("xi", 0.0);
    if (m.contains("columns")) cfg.prep = parse_prep(m["columns"]);
  }
  if (doc.contains("elastic_net")) {
    const auto& m = doc["elastic_net"];
    check_keys(m, {"lambda1", "lambda2", "alpha", "xi", "columns"}, "elastic_net");
    cfg.lambda1 = m.value("lambda1", 1.0);
    cfg.lambda2 = m.value("lambda2", 0.0);
    cfg.prior_shape = m.value("alpha", 0.0);
    cfg.prior_rate = m.value("xi", 0.0);
    if (m.contains("columns")) cfg.prep = parse_prep(m["columns"]);
  }
  if (doc.contains("logistic")) {
    const auto& m = doc["logistic"];
    check_keys(m, {"prior_mean", "prior_precision", "trials", "assert_propriety"},
               "logistic");
    if (m.contains("prior_mean")) cfg.prior_mean = parse_vector(m["prior_mean"], "prior_mean");
    if (m.contains("prior_precision"))
      cfg.prior_precision = parse_matrix(m["prior_precision"], "prior_precision");
    cfg.trials_column = m.value("trials", "");
    cfg.assert_propriety = m.value("assert_propriety", false);
  }
  if (doc.contains("probit_glmm")) {
    const auto& m = doc["probit_glmm"];
    check_keys(m, {"beta", "w_columns", "v_columns", "blocks"}, "probit_glmm");
    cfg.glmm_beta = parse_vector(m.at("beta"), "beta");
    if (m.contains("w_columns"))
      cfg.w_columns = m["w_columns"].get<std::vector<std::string>>();
    cfg.v_columns = m.at("v_columns").get<std::vector<std::string>>();
    for (const auto& b : m.at("blocks")) {
      check_keys(b, {"lambda", "r"}, "probit_glmm.blocks");
      ProbitBlockSpec spec;
      spec.lambda = parse_matrix(b.at("lambda"), "blocks.lambda");
      spec.r = parse_matrix(b.at("r"), "blocks.r");
      cfg.glmm_blocks.push_back(std::move(spec));
    }
  }
  if (doc.contains("robit")) {
    const auto& m = doc["robit"];
    check_keys(m, {"nu", "prior_mean", "prior_precision"}, "robit");
    cfg.nu = m.value("nu", 4.0);
    if (m.contains("prior_mean")) cfg.prior_mean = parse_vector(m["prior_mean"], "prior_mean");
    if (m.contains("prior_precision"))
      cfg.prior_precision = parse_matrix(m["prior_precision"], "prior_precision");
  }
  if (doc.contains("quantreg")) {
    const auto& m = doc["quantreg"];
    check_keys(m, {"alpha", "prior_mean", "prior_cov", "n0", "t0"}, "quantreg");
    cfg.quantile = m.value("alpha", 0.5);
    if (m.contains("prior_mean")) cfg.prior_mean = parse_vector(m["prior_mean"], "prior_mean");
    if (m.contains("prior_cov")) cfg.prior_cov = parse_matrix(m["prior_cov"], "prior_cov");
    cfg.n0 = m.value("n0", 1.0);
    cfg.t0 = m.value("t0", 1.0);
  }
  if (doc.contains("adda")) {
    const auto& m = doc["adda"];
    check_keys(m, {"k", "r", "epsilon", "schedule", "latency", "report"}, "adda");
    cfg.adda.k = m.value("k", 2);
    cfg.adda.r = m.value("r", 1.0);
    cfg.adda.epsilon = m.value("epsilon", 1.0);
    cfg.schedule_path = m.value("schedule", "");
    if (m.contains("latency")) {
      const auto& lat = m["latency"];
      check_keys(lat, {"item_cost", "manager_cost", "jitter", "worker_speed"},
                 "adda.latency");
      LatencyModel lm;
      lm.item_cost = lat.value("item_cost", 1.0);
      lm.manager_cost = lat.value("manager_cost", 0.5);
      lm.jitter = lat.value("jitter", 0.25);
      if (lat.contains("worker_speed"))
        lm.worker_speed = lat["worker_speed"].get<std::vector<double>>();
      cfg.latency = lm;
    }
    if (m.contains("report"))
      for (const auto& row : m["report"]) {
        check_keys(row, {"r", "epsilon"}, "adda.report");
        cfg.report_configs.emplace_back(row.at("r").get<double>(),
                                        row.at("epsilon").get<double>());
      }
  }
  if (cfg.kernel_tag == "adda") cfg.adda.validate();
  return cfg;
}

CompletionSchedule read_schedule(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_parameter("schedule: cannot open '" + path + "'");
  json doc;
  in >> doc;
  check_keys(doc, {"epochs"}, "schedule");
  CompletionSchedule s;
  for (const auto& e : doc.at("epochs")) {
    check_keys(e, {"completion_order", "preempted_items", "wait_all"},
               "schedule.epochs");
    EpochSchedule ep;
    ep.completion_order = e.at("completion_order").get<std::vector<int>>();
    if (e.contains("preempted_items"))
      for (const auto& [key, value] : e["preempted_items"].items())
        ep.preempted_items[std::stoi(key)] = value.get<int>();
    if (e.contains("wait_all")) ep.wait_all = e["wait_all"].get<bool>();
    s.epochs.push_back(std::move(ep));
  }
  if (s.epochs.empty()) throw invalid_parameter("schedule: no epochs");
  return s;
}

namespace {

Eigen::MatrixXd design_without(const CsvTable& data,
                               const std::vector<std::string>& drop) {
  std::vector<int> keep;
  for (std::size_t j = 0; j < data.columns.size(); ++j) {
    bool dropped = false;
    for (const auto& d : drop) dropped = dropped || (data.columns[j] == d);
    if (!dropped) keep.push_back(static_cast<int>(j));
  }
  Eigen::MatrixXd w(data.values.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    w.col(static_cast<Eigen::Index>(j)) = data.values.col(keep[j]);
  return w;
}

Eigen::MatrixXd columns_by_name(const CsvTable& data,
                                const std::vector<std::string>& names) {
  Eigen::MatrixXd m(data.values.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j)
    m.col(static_cast<Eigen::Index>(j)) = data.column(names[j]);
  return m;
}

Eigen::VectorXi to_binary(const Eigen::VectorXd& z) {
  Eigen::VectorXi out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z(i) != 0.0 && z(i) != 1.0)
      throw invalid_parameter("data: responses must be binary 0/1");
    out(i) = static_cast<int>(z(i));
  }
  return out;
}

std::vector<std::string> numbered(const std::string& prefix, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(prefix + "_" + std::to_string(i));
  return out;
}

}  // namespace

PreparedRun prepare_run(const RunConfig& cfg) {
  const CsvTable data = read_csv(cfg.data_path);
  const Eigen::VectorXd z = data.column(cfg.response_column);
  PreparedRun run;
  run.model_id = cfg.model_tag;

  if (cfg.model_tag == "lasso") {
    const Eigen::MatrixXd w = design_without(data, {cfg.response_column});
    const auto model = LassoModel::make(w, z, cfg.lambda, cfg.prior_shape,
                                        cfg.prior_rate, cfg.prep);
    run.state_columns = numbered("beta", static_cast<int>(w.cols()));
    run.state_columns.push_back("sigma2");
    run.init = State::Zero(w.cols() + 1);
    run.init(w.cols()) = 1.0;
    if (cfg.kernel_tag == "adda") {
      run.blocked = blocked_lasso(model, cfg.adda.k);
      run.blocked_y0 = Eigen::VectorXd::Ones(run.blocked->aug_dim());
    } else {
      run.kernel = [model](const State& s, RngStream& r) {
        return lasso_da_step(model, s, r);
      };
    }
  } else if (cfg.model_tag == "elastic-net") {
    const Eigen::MatrixXd w = design_without(data, {cfg.response_column});
    const auto model = ElasticNetModel::make(w, z, cfg.lambda1, cfg.lambda2,
                                             cfg.prior_shape, cfg.prior_rate, cfg.prep);
    run.state_columns = numbered("beta", static_cast<int>(w.cols()));
    run.state_columns.push_back("sigma2");
    run.init = State::Zero(w.cols() + 1);
    run.init(w.cols()) = 1.0;
    run.kernel = [model](const State& s, RngStream& r) {
      return elastic_net_da_step(model, s, r);
    };
  } else if (cfg.model_tag == "logistic") {
    std::vector<std::string> drop = {cfg.response_column};
    Eigen::VectorXd trials;
    if (!cfg.trials_column.empty()) {
      trials = data.column(cfg.trials_column);
      drop.push_back(cfg.trials_column);
    } else {
      trials = Eigen::VectorXd::Ones(z.size());
    }
    const Eigen::MatrixXd w = design_without(data, drop);
    const Eigen::Index p = w.cols();
    const Eigen::VectorXd mu0 =
        cfg.prior_mean.size() ? cfg.prior_mean : Eigen::VectorXd::Zero(p);
    const Eigen::MatrixXd q = cfg.prior_precision.size()
                                  ? sized(cfg.prior_precision, p)
                                  : Eigen::MatrixXd::Identity(p, p);
    const auto model = LogisticModel::make(w, z, trials, mu0, q, cfg.assert_propriety);
    run.state_columns = numbered("beta", static_cast<int>(p));
    run.init = State::Zero(p);
    if (cfg.kernel_tag == "adda") {
      run.blocked = blocked_logistic(model, cfg.adda.k);
      run.blocked_y0 = Eigen::VectorXd::Constant(run.blocked->aug_dim(), 0.25);
    } else {
      run.kernel = [model](const State& s, RngStream& r) {
        return pg_logistic_da_step(model, s, r);
      };
    }
  } else if (cfg.model_tag == "probit-glmm") {
    const Eigen::MatrixXd v = columns_by_name(data, cfg.v_columns);
    const Eigen::MatrixXd w =
        cfg.w_columns.empty() ? Eigen::MatrixXd::Zero(v.rows(), cfg.glmm_beta.size())
                              : columns_by_name(data, cfg.w_columns);
    const auto model =
        ProbitGlmmModel::make(w, v, cfg.glmm_beta, to_binary(z), cfg.glmm_blocks);
    run.state_columns = numbered("u", static_cast<int>(v.cols()));
    run.init = State::Zero(v.cols());
    if (cfg.kernel_tag == "haar-pxda") {
      run.kernel = [model](const State& s, RngStream& r) {
        return probit_haar_pxda_step(model, s, r);
      };
    } else {
      run.kernel = [model](const State& s, RngStream& r) {
        return probit_glmm_da_step(model, s, r);
      };
    }
  } else if (cfg.model_tag == "robit") {
    const Eigen::MatrixXd w = design_without(data, {cfg.response_column});
    const Eigen::Index p = w.cols();
    const Eigen::VectorXd mean =
        cfg.prior_mean.size() ? cfg.prior_mean : Eigen::VectorXd::Zero(p);
    const Eigen::MatrixXd prec = cfg.prior_precision.size()
                                     ? sized(cfg.prior_precision, p)
                                     : Eigen::MatrixXd::Identity(p, p);
    const auto model = RobitModel::make(w, to_binary(z), cfg.nu, mean, prec);
    run.state_columns = numbered("beta", static_cast<int>(p));
    run.init = State::Zero(p);
    run.kernel = [model](const State& s, RngStream& r) {
      return robit_da_step(model, s, r);
    };
  } else if (cfg.model_tag == "quantreg") {
    const Eigen::MatrixXd w = design_without(data, {cfg.response_column});
    const Eigen::Index p = w.cols(), n = w.rows();
    const Eigen::VectorXd mean =
        cfg.prior_mean.size() ? cfg.prior_mean : Eigen::VectorXd::Zero(p);
    const Eigen::MatrixXd cov = cfg.prior_cov.size()
                                    ? sized(cfg.prior_cov, p)
                                    : Eigen::MatrixXd::Identity(p, p);
    const auto model =
        QuantRegModel::make(w, z, cfg.quantile, mean, cov, cfg.n0, cfg.t0);
    run.state_columns = numbered("beta", static_cast<int>(p));
    const auto rcols = numbered("r", static_cast<int>(n));
    run.state_columns.insert(run.state_columns.end(), rcols.begin(), rcols.end());
    run.state_columns.push_back("sigma");
    QuantRegState init{Eigen::VectorXd::Zero(p), Eigen::VectorXd::Ones(n), 1.0};
    run.init = quantreg_pack(init);
    int variant = 0;
    if (cfg.kernel_tag == "two-block-pxda:1") variant = 1;
    if (cfg.kernel_tag == "two-block-pxda:2") variant = 2;
    run.kernel = [model, variant](const State& s, RngStream& r) {
      const auto st = quantreg_unpack(model, s);
      const auto next = (variant == 0) ? quantreg_two_block_step(model, st, r)
                                       : quantreg_two_block_pxda_step(model, variant, st, r);
      return quantreg_pack(next);
    };
  } else {
    throw invalid_parameter("config: unknown model '" + cfg.model_tag + "'");
  }
  return run;
}

void write_trace(const std::string& path, const ChainTrace& trace,
                 const std::vector<std::string>& columns, std::uint64_t config_hash) {
  CsvTable table;
  table.columns = columns;
  table.values = trace.draws;
  std::vector<std::string> meta;
  meta.push_back("damc version " + std::string(kSoftwareVersion));
  meta.push_back("model " + trace.model_id);
  meta.push_back("kernel " + trace.kernel_id);
  meta.push_back("seed " + std::to_string(trace.seed));
  {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_hash));
    meta.push_back(std::string("config_hash ") + buf);
  }
  meta.push_back("burn_in " + std::to_string(trace.burn_in));
  meta.push_back("iterations " + std::to_string(trace.draws.rows()));
  write_csv(path, table, meta);
}

}  // namespace damc
