#include "damc/adda.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "damc/diagnostics.hpp"
#include "damc/errors.hpp"

namespace damc {

int BlockedModel::aug_dim() const {
  return std::accumulate(block_items.begin(), block_items.end(), 0);
}

int BlockedModel::block_offset(int block) const {
  return std::accumulate(block_items.begin(), block_items.begin() + block, 0);
}

int AddaConfig::wait_count() const {
  const int c = static_cast<int>(std::ceil(static_cast<double>(k) * r - 1e-9));
  return std::clamp(c, 1, k);
}

void AddaConfig::validate() const {
  if (k < 1) throw invalid_parameter("adda: k must be >= 1");
  if (!(r > 0.0) || r > 1.0) throw invalid_parameter("adda: r must lie in (0, 1]");
  if (!(epsilon > 0.0) || epsilon > 1.0)
    throw invalid_parameter("adda: epsilon must lie in (0, 1]");
}

void CompletionSchedule::validate(int k) const {
  for (const auto& e : epochs) {
    std::vector<bool> seen(k, false);
    for (int j : e.completion_order) {
      if (j < 0 || j >= k || seen[j])
        throw invalid_parameter("schedule: each worker at most once per epoch");
      seen[j] = true;
    }
    for (const auto& [j, items] : e.preempted_items) {
      if (j < 0 || j >= k || seen[j])
        throw invalid_parameter("schedule: each worker at most once per epoch");
      seen[j] = true;
      if (items < 0) throw invalid_parameter("schedule: negative item count");
    }
  }
}

namespace {

// Stream discipline shared by the engines and the reference chain.
RngStream worker_stream(std::uint64_t seed, int j) {
  return RngStream(seed, 0).split(100 + static_cast<std::uint64_t>(j));
}
RngStream manager_stream(std::uint64_t seed) { return RngStream(seed, 0).split(1); }
RngStream coin_stream(std::uint64_t seed) { return RngStream(seed, 0).split(2); }
RngStream latency_stream(std::uint64_t seed) { return RngStream(seed, 0).split(3); }

void require_checked(const BlockedModel& model) {
  if (!model.ci_verified_or_waived)
    throw invalid_parameter(
        "adda: blocked model must pass the conditional-independence checks "
        "or carry an explicit waiver");
}

std::string state_dump(int epoch, const ManagerEpoch& m) {
  std::ostringstream os;
  os << "epoch " << epoch << ", fresh " << m.fresh_count << "/" << m.need
     << ", blocks [";
  for (std::size_t i = 0; i < m.fresh.size(); ++i) os << (m.fresh[i] ? '1' : '0');
  os << "]";
  return os.str();
}

}  // namespace

bool ManagerEpoch::on_update(const BlockedModel& model, const BlockUpdate& upd) {
  if (upd.epoch > epoch + 1) {
    std::ostringstream dump;
    dump << "adda: update from future epoch " << upd.epoch << " while at " << epoch
         << " (block " << upd.block << ")";
    throw protocol_error(dump.str());
  }
  if (upd.epoch <= epoch) {
    ++stale_discarded;
    return false;
  }
  if (upd.block < 0 || upd.block >= model.n_blocks())
    throw protocol_error("adda: update for unknown block");
  if (fresh[upd.block])
    throw protocol_error("adda: duplicate fresh update for block " +
                         std::to_string(upd.block));
  if (upd.y.size() != model.block_items[upd.block])
    throw protocol_error("adda: block update with wrong item count");
  fresh[upd.block] = true;
  ++fresh_count;
  y.segment(model.block_offset(upd.block), model.block_items[upd.block]) = upd.y;
  return true;
}

void WorkerGuard::on_broadcast(const ParamBroadcast& pb) {
  if (pb.epoch <= last_epoch)
    throw protocol_error("adda: non-monotone parameter broadcast (epoch " +
                         std::to_string(pb.epoch) + " after " +
                         std::to_string(last_epoch) + ")");
  last_epoch = pb.epoch;
}

ChainTrace blocked_reference_chain(const BlockedModel& model, int n, const State& x0,
                                   const Eigen::VectorXd& y0, std::uint64_t seed) {
  require_checked(model);
  const int k = model.n_blocks();
  std::vector<RngStream> wstream;
  for (int j = 0; j < k; ++j) wstream.push_back(worker_stream(seed, j));
  RngStream mstream = manager_stream(seed);

  ChainTrace trace;
  trace.seed = seed;
  trace.kernel_id = "blocked-da";
  trace.model_id = model.id;
  trace.draws.resize(n, model.x_dim + model.aug_dim());

  State x = x0;
  Eigen::VectorXd y = y0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int t = 0; t < n; ++t) {
    for (int j = 0; j < k; ++j) {
      const int off = model.block_offset(j);
      for (int i = 0; i < model.block_items[j]; ++i)
        y(off + i) = model.draw_item(j, i, x, wstream[j]);
    }
    x = model.draw_x_given_y(y, mstream);
    trace.draws.row(t) << x.transpose(), y.transpose();
  }
  const auto t1 = std::chrono::steady_clock::now();
  trace.total_seconds = std::chrono::duration<double>(t1 - t0).count();
  trace.seconds_per_iter = trace.total_seconds / std::max(1, n);
  return trace;
}

AddaRunResult adda_run_sim(const BlockedModel& model, const AddaConfig& config, int n,
                           const State& x0, const Eigen::VectorXd& y0,
                           std::uint64_t seed, const CompletionSchedule* schedule,
                           const LatencyModel* latency,
                           long message_budget_per_epoch) {
  require_checked(model);
  config.validate();
  const int k = config.k;
  if (model.n_blocks() != k)
    throw invalid_parameter("adda: config k must match the model's block count");
  if (schedule) schedule->validate(k);
  LatencyModel default_latency;
  const LatencyModel& lat = latency ? *latency : default_latency;
  if (!lat.worker_speed.empty() && static_cast<int>(lat.worker_speed.size()) != k)
    throw invalid_parameter("adda: latency worker_speed size mismatch");

  std::vector<RngStream> wstream;
  for (int j = 0; j < k; ++j) wstream.push_back(worker_stream(seed, j));
  RngStream mstream = manager_stream(seed);
  RngStream cstream = coin_stream(seed);
  RngStream lstream = latency_stream(seed);

  AddaRunResult result;
  result.trace.seed = seed;
  result.trace.kernel_id = "adda";
  result.trace.model_id = model.id;
  result.trace.draws.resize(n, model.x_dim + model.aug_dim());

  State x = x0;
  Eigen::VectorXd y = y0;
  double clock = 0.0;
  // Simulated time at which each worker becomes free to notice a new
  // broadcast (end of the item in flight when it was preempted).
  std::vector<double> free_at(k, 0.0);

  for (int t = 0; t < n; ++t) {
    ManagerEpoch mgr;
    mgr.epoch = t;
    mgr.y = y;
    mgr.fresh.assign(k, false);
    // The coin is consumed from its own stream regardless of scripting so
    // draw streams stay aligned with the reference chain.
    const bool coin = (cstream.uniform() < config.epsilon);
    bool wait_all = coin;
    if (schedule) {
      const auto& scripted = schedule->epochs[t % schedule->epochs.size()].wait_all;
      if (scripted.has_value()) wait_all = *scripted;
    }
    mgr.need = wait_all ? k : config.wait_count();

    long messages = 0;
    if (schedule) {
      const auto& ep = schedule->epochs[t % schedule->epochs.size()];
      std::vector<bool> listed(k, false);
      for (int j : ep.completion_order) listed[j] = true;
      int processed = 0;
      for (int j : ep.completion_order) {
        // Each completion consumes the full block from the worker stream.
        Eigen::VectorXd block(model.block_items[j]);
        for (int i = 0; i < model.block_items[j]; ++i)
          block(i) = model.draw_item(j, i, x, wstream[j]);
        ++messages;
        if (mgr.ready()) {
          // Completed after the quorum: arrives one epoch behind.
          ++result.stale_updates_discarded;
        } else {
          mgr.on_update(model, BlockUpdate{j, t + 1, block});
        }
        ++processed;
        if (messages > message_budget_per_epoch)
          throw protocol_error("adda: message budget exceeded; " +
                               state_dump(t, mgr));
      }
      if (!mgr.ready())
        throw protocol_error("adda: scheduled epoch cannot reach quorum; " +
                             state_dump(t, mgr));
      for (int j = 0; j < k; ++j) {
        if (listed[j]) continue;
        // Preempted mid-draw: the consumed items are discarded.
        const auto it = ep.preempted_items.find(j);
        const int consumed = (it == ep.preempted_items.end()) ? 0 : it->second;
        for (int i = 0; i < std::min(consumed, model.block_items[j]); ++i)
          (void)model.draw_item(j, i, x, wstream[j]);
        ++result.preemptions;
      }
      clock += 1.0;
      result.messages += messages + k;  // plus the broadcast fan-out
    } else {
      // Latency-driven epoch: compute per-worker start, item boundaries
      // and completion times; the manager counts the first `need` fresh
      // completions.
      std::vector<double> start(k), completion(k);
      std::vector<std::vector<double>> ends(k);
      for (int j = 0; j < k; ++j) {
        start[j] = std::max(clock, free_at[j]);
        double at = start[j];
        ends[j].resize(model.block_items[j]);
        const double speed = lat.worker_speed.empty() ? 1.0 : lat.worker_speed[j];
        for (int i = 0; i < model.block_items[j]; ++i) {
          const double d =
              lat.item_cost * speed * std::exp(lat.jitter * lstream.normal());
          at += d;
          ends[j][i] = at;
        }
        completion[j] = at;
      }
      std::vector<int> order(k);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        return completion[a] < completion[b] || (completion[a] == completion[b] && a < b);
      });
      const double quorum_time = completion[order[mgr.need - 1]];
      const double next_clock = quorum_time + lat.manager_cost;

      for (int idx = 0; idx < k; ++idx) {
        const int j = order[idx];
        if (idx < mgr.need) {
          // Counted: full block drawn and spliced.
          Eigen::VectorXd block(model.block_items[j]);
          for (int i = 0; i < model.block_items[j]; ++i)
            block(i) = model.draw_item(j, i, x, wstream[j]);
          mgr.on_update(model, BlockUpdate{j, t + 1, block});
          free_at[j] = completion[j];
          ++result.messages;
        } else if (completion[j] <= next_clock) {
          // Completed before the next broadcast: sent and discarded.
          for (int i = 0; i < model.block_items[j]; ++i)
            (void)model.draw_item(j, i, x, wstream[j]);
          ++result.stale_updates_discarded;
          free_at[j] = completion[j];
          ++result.messages;
        } else {
          // Items started before the broadcast still run to their end.
          int consumed = 0;
          double boundary = start[j];
          for (int i = 0; i < model.block_items[j]; ++i) {
            const double item_start = (i == 0) ? start[j] : ends[j][i - 1];
            if (item_start >= next_clock) break;
            (void)model.draw_item(j, i, x, wstream[j]);
            ++consumed;
            boundary = ends[j][i];
          }
          free_at[j] = std::max(boundary, next_clock);
          if (start[j] >= next_clock) free_at[j] = start[j];
          if (consumed == model.block_items[j]) {
            // Every item had begun before the broadcast: the block draw
            // completes, gets sent, and arrives one epoch late.
            ++result.stale_updates_discarded;
            ++result.messages;
          } else {
            ++result.preemptions;
          }
        }
        if (result.messages > message_budget_per_epoch * static_cast<long>(t + 1))
          throw protocol_error("adda: message budget exceeded; " + state_dump(t, mgr));
      }
      clock = next_clock;
      result.messages += k;  // broadcast fan-out
    }

    y = mgr.y;
    x = model.draw_x_given_y(y, mstream);
    result.trace.draws.row(t) << x.transpose(), y.transpose();
    result.stale_updates_discarded += mgr.stale_discarded;
  }
  result.sim_seconds = clock;
  result.trace.total_seconds = clock;
  result.trace.seconds_per_iter = clock / std::max(1, n);
  return result;
}

// ---------------------------------------------------------------------------
// Threaded engine
// ---------------------------------------------------------------------------

namespace {

template <typename M>
class Channel {
 public:
  void push(M m) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      q_.push_back(std::move(m));
    }
    cv_.notify_one();
  }
  std::optional<M> try_pop() {
    std::lock_guard<std::mutex> lock(mu_);
    if (q_.empty()) return std::nullopt;
    M m = std::move(q_.front());
    q_.pop_front();
    return m;
  }
  std::optional<M> pop_wait(double timeout_s) {
    std::unique_lock<std::mutex> lock(mu_);
    if (!cv_.wait_for(lock, std::chrono::duration<double>(timeout_s),
                      [&] { return !q_.empty(); }))
      return std::nullopt;
    M m = std::move(q_.front());
    q_.pop_front();
    return m;
  }

 private:
  std::deque<M> q_;
  std::mutex mu_;
  std::condition_variable cv_;
};

struct WorkerMsg {
  bool stop = false;
  ParamBroadcast pb;
};

}  // namespace

AddaRunResult adda_run_threaded(const BlockedModel& model, const AddaConfig& config,
                                int n, const State& x0, const Eigen::VectorXd& y0,
                                std::uint64_t seed, double deadlock_timeout_s) {
  require_checked(model);
  config.validate();
  const int k = config.k;
  if (model.n_blocks() != k)
    throw invalid_parameter("adda: config k must match the model's block count");

  std::vector<Channel<WorkerMsg>> inbox(k);
  Channel<BlockUpdate> updates;
  std::vector<std::thread> threads;
  std::exception_ptr worker_failure = nullptr;
  std::mutex failure_mu;

  for (int j = 0; j < k; ++j) {
    threads.emplace_back([&, j] {
      try {
        RngStream rng = worker_stream(seed, j);
        WorkerGuard guard;
        std::optional<ParamBroadcast> current;
        for (;;) {
          if (!current) {
            auto msg = inbox[j].pop_wait(deadlock_timeout_s);
            if (!msg) throw protocol_error("adda worker: no broadcast before timeout");
            if (msg->stop) return;
            guard.on_broadcast(msg->pb);
            current = msg->pb;
          }
          Eigen::VectorXd block(model.block_items[j]);
          bool preempted = false;
          for (int i = 0; i < model.block_items[j]; ++i) {
            block(i) = model.draw_item(j, i, current->x, rng);
            // Poll for fresher parameters between item draws.
            if (auto msg = inbox[j].try_pop()) {
              if (msg->stop) return;
              guard.on_broadcast(msg->pb);
              current = msg->pb;
              preempted = true;
              break;
            }
          }
          if (preempted) continue;  // abandon the stale block draw
          updates.push(BlockUpdate{j, current->epoch + 1, block});
          current.reset();
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        worker_failure = std::current_exception();
      }
    });
  }

  auto shutdown = [&] {
    for (int j = 0; j < k; ++j) inbox[j].push(WorkerMsg{true, {}});
    for (auto& th : threads) th.join();
  };

  AddaRunResult result;
  result.trace.seed = seed;
  result.trace.kernel_id = "adda-threaded";
  result.trace.model_id = model.id;
  result.trace.draws.resize(n, model.x_dim + model.aug_dim());

  try {
    RngStream mstream = manager_stream(seed);
    RngStream cstream = coin_stream(seed);
    State x = x0;
    Eigen::VectorXd y = y0;
    for (int j = 0; j < k; ++j) inbox[j].push(WorkerMsg{false, {0, x}});
    result.messages += k;

    const auto t0 = std::chrono::steady_clock::now();
    for (int t = 0; t < n; ++t) {
      ManagerEpoch mgr;
      mgr.epoch = t;
      mgr.y = y;
      mgr.fresh.assign(k, false);
      mgr.need = (cstream.uniform() < config.epsilon) ? k : config.wait_count();
      while (!mgr.ready()) {
        {
          std::lock_guard<std::mutex> lock(failure_mu);
          if (worker_failure) std::rethrow_exception(worker_failure);
        }
        auto upd = updates.pop_wait(deadlock_timeout_s);
        if (!upd)
          throw protocol_error("adda: no progress before timeout; " +
                               state_dump(t, mgr));
        ++result.messages;
        mgr.on_update(model, *upd);
      }
      y = mgr.y;
      x = model.draw_x_given_y(y, mstream);
      result.trace.draws.row(t) << x.transpose(), y.transpose();
      result.stale_updates_discarded += mgr.stale_discarded;
      if (t + 1 < n) {
        for (int j = 0; j < k; ++j) inbox[j].push(WorkerMsg{false, {t + 1, x}});
        result.messages += k;
      }
    }
    const auto t1 = std::chrono::steady_clock::now();
    result.trace.total_seconds = std::chrono::duration<double>(t1 - t0).count();
    result.trace.seconds_per_iter = result.trace.total_seconds / std::max(1, n);
  } catch (...) {
    shutdown();
    throw;
  }
  shutdown();
  {
    std::lock_guard<std::mutex> lock(failure_mu);
    if (worker_failure) std::rethrow_exception(worker_failure);
  }
  return result;
}

std::vector<WallClockRow> adda_wall_clock_report(
    const BlockedModel& model, const std::vector<std::pair<double, double>>& configs,
    const LatencyModel& latency, int n, const State& x0, const Eigen::VectorXd& y0,
    std::uint64_t seed) {
  std::vector<WallClockRow> rows;
  for (const auto& [r, eps] : configs) {
    AddaConfig cfg{model.n_blocks(), r, eps};
    const auto run = adda_run_sim(model, cfg, n, x0, y0, seed, nullptr, &latency);
    WallClockRow row;
    row.r = r;
    row.epsilon = eps;
    row.iterations = n;
    row.sim_seconds = run.sim_seconds;
    row.sec_per_iter = run.sim_seconds / std::max(1, n);
    row.ess = effective_sample_size(run.trace.draws.col(0));
    row.ess_per_sec = row.ess / std::max(run.sim_seconds, 1e-12);
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Concrete blocked models
// ---------------------------------------------------------------------------

namespace {

std::vector<int> contiguous_blocks(int total, int k) {
  if (k < 1 || k > total)
    throw invalid_parameter("blocked model: need 1 <= k <= latent item count");
  std::vector<int> sizes(k, total / k);
  for (int j = 0; j < total % k; ++j) ++sizes[j];
  return sizes;
}

}  // namespace

BlockedModel blocked_lasso(const LassoModel& model, int k) {
  BlockedModel b;
  b.id = "lasso";
  b.x_dim = static_cast<int>(model.w.cols()) + 1;
  b.block_items = contiguous_blocks(static_cast<int>(model.w.cols()), k);
  std::vector<int> offsets(k);
  int at = 0;
  for (int j = 0; j < k; ++j) {
    offsets[j] = at;
    at += b.block_items[j];
  }
  b.draw_item = [model, offsets](int block, int item, const State& x, RngStream& rng) {
    return lasso_draw_latent_item(model, offsets[block] + item, x, rng);
  };
  b.draw_x_given_y = [model](const State& y, RngStream& rng) {
    return lasso_draw_state(model, y, rng);
  };
  // The latent conditionals involve no observed data and factor across
  // coordinates by construction; the discrete analogue of this check is
  // exercised in the oracle suite.
  b.ci_verified_or_waived = true;
  return b;
}

BlockedModel blocked_logistic(const LogisticModel& model, int k) {
  BlockedModel b;
  b.id = "logistic";
  b.x_dim = static_cast<int>(model.w.cols());
  b.block_items = contiguous_blocks(static_cast<int>(model.w.rows()), k);
  std::vector<int> offsets(k);
  int at = 0;
  for (int j = 0; j < k; ++j) {
    offsets[j] = at;
    at += b.block_items[j];
  }
  b.draw_item = [model, offsets](int block, int item, const State& x, RngStream& rng) {
    return logistic_draw_latent_item(model, offsets[block] + item, x, rng);
  };
  b.draw_x_given_y = [model](const State& y, RngStream& rng) {
    return logistic_draw_state(model, y, rng);
  };
  b.ci_verified_or_waived = true;
  return b;
}

BlockedModel blocked_discrete(const DiscreteBlockedJoint& joint) {
  BlockedModel b;
  b.id = "discrete";
  b.x_dim = 1;
  b.block_items = {1, 1};
  b.draw_item = [joint](int block, int, const State& x, RngStream& rng) {
    const int ix = grid_index(joint.x_grid, x(0));
    if (block == 0)
      return joint.y1_grid(sample_index(joint.y1_given_x.row(ix).transpose(), rng));
    return joint.y2_grid(sample_index(joint.y2_given_x.row(ix).transpose(), rng));
  };
  b.draw_x_given_y = [joint](const State& y, RngStream& rng) -> State {
    const int i1 = grid_index(joint.y1_grid, y(0));
    const int i2 = grid_index(joint.y2_grid, y(1));
    State x(1);
    x(0) = joint.x_grid(sample_index(joint.x_given_y(i1, i2), rng));
    return x;
  };
  b.ci_verified_or_waived = true;  // exact by construction
  return b;
}

DiscreteBlockedJoint blocked_joint_from_general(
    const Eigen::VectorXd& x_grid, const Eigen::VectorXd& y1_grid,
    const Eigen::VectorXd& y2_grid, const std::vector<Eigen::MatrixXd>& pmf_by_x) {
  const Eigen::Index sx = x_grid.size(), s1 = y1_grid.size(), s2 = y2_grid.size();
  if (static_cast<Eigen::Index>(pmf_by_x.size()) != sx)
    throw invalid_parameter("blocked joint: one slab per x value");
  Eigen::VectorXd fx(sx);
  Eigen::MatrixXd c1(sx, s1), c2(sx, s2);
  for (Eigen::Index ix = 0; ix < sx; ++ix) {
    const auto& slab = pmf_by_x[ix];
    if (slab.rows() != s1 || slab.cols() != s2)
      throw invalid_parameter("blocked joint: slab shape mismatch");
    fx(ix) = slab.sum();
    if (!(fx(ix) > 0.0)) throw invalid_parameter("blocked joint: zero-mass x state");
    c1.row(ix) = slab.rowwise().sum().transpose() / fx(ix);
    c2.row(ix) = slab.colwise().sum() / fx(ix);
    // Exact factorization gate: conditional independence of the blocks.
    for (Eigen::Index i1 = 0; i1 < s1; ++i1)
      for (Eigen::Index i2 = 0; i2 < s2; ++i2)
        if (std::fabs(slab(i1, i2) / fx(ix) - c1(ix, i1) * c2(ix, i2)) > 1e-12)
          throw invalid_parameter(
              "blocked joint: latent blocks are not conditionally independent");
  }
  return DiscreteBlockedJoint::make(x_grid, y1_grid, y2_grid, fx, c1, c2);
}

}  // namespace damc
