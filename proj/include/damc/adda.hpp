#ifndef DAMC_ADDA_HPP
#define DAMC_ADDA_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "damc/da_core.hpp"
#include "damc/discrete.hpp"
#include "damc/models.hpp"
#include "damc/rng.hpp"

namespace damc {

/// Augmented model whose latent vector splits into conditionally
/// independent blocks of scalar items; item draws are the preemption
/// granularity of the distributed engine.
struct BlockedModel {
  std::string id;
  int x_dim = 0;
  std::vector<int> block_items;  // items per block
  std::function<double(int block, int item, const State& x, RngStream&)> draw_item;
  std::function<State(const State& y, RngStream&)> draw_x_given_y;
  /// Set by constructors whose conditional-independence and data-subset
  /// invariants have been checked (exactly, for discrete instances) or
  /// explicitly waived for continuous models.
  bool ci_verified_or_waived = false;

  int n_blocks() const { return static_cast<int>(block_items.size()); }
  int aug_dim() const;
  int block_offset(int block) const;
};

struct AddaConfig {
  int k = 1;          // block / worker count
  double r = 1.0;     // wait fraction, in (0, 1]
  double epsilon = 1.0;  // probability of waiting for all workers, in (0, 1]

  int wait_count() const;
  void validate() const;
};

/// Typed protocol messages: the manager broadcasts parameters, workers
/// return block updates.  Epochs are nonnegative and nondecreasing per
/// sender; the receiving side asserts this.
struct ParamBroadcast {
  int epoch = 0;
  State x;
};
struct BlockUpdate {
  int block = 0;
  int epoch = 0;
  Eigen::VectorXd y;
};

/// Deterministic script of one epoch: the order in which workers complete
/// their block draws, plus, for workers that get preempted mid-draw, how
/// many items they consumed first.  Workers that completed beyond the
/// manager's wait count become stale senders whose updates are discarded.
/// wait_all scripts the epsilon coin; when unset the coin comes from the
/// seeded coin stream.
struct EpochSchedule {
  std::vector<int> completion_order;
  std::map<int, int> preempted_items;
  std::optional<bool> wait_all;
};

struct CompletionSchedule {
  std::vector<EpochSchedule> epochs;  // cycled when shorter than the run
  void validate(int k) const;         // each worker at most once per epoch
};

/// Simulated latency: per-item lognormal work times plus a fixed manager
/// cost, all driven by a dedicated stream so draw streams stay aligned
/// with the synchronous reference chain.
struct LatencyModel {
  double item_cost = 1.0;
  double manager_cost = 0.5;
  double jitter = 0.25;
  /// Per-worker speed multipliers (empty = all ones).
  std::vector<double> worker_speed;
};

struct AddaRunResult {
  ChainTrace trace;  // one row per epoch: x then the spliced y
  double sim_seconds = 0.0;
  long messages = 0;
  long stale_updates_discarded = 0;
  long preemptions = 0;
};

/// Deterministic event simulation of the manager/worker protocol.  With a
/// CompletionSchedule all nondeterminism is scripted; otherwise completion
/// order emerges from the latency model.  Identical seeds give identical
/// results.  A message budget (default 10000 per epoch) guards against
/// deadlock; exceeding it raises protocol_error with a state dump.
AddaRunResult adda_run_sim(const BlockedModel& model, const AddaConfig& config, int n,
                           const State& x0, const Eigen::VectorXd& y0,
                           std::uint64_t seed,
                           const CompletionSchedule* schedule = nullptr,
                           const LatencyModel* latency = nullptr,
                           long message_budget_per_epoch = 10000);

/// Live engine: one manager plus k worker threads exchanging messages over
/// reliable FIFO channels; workers poll for fresher parameters between
/// item draws and abandon stale work.  Statistically equivalent to the
/// simulator; arrival order (and hence the trace for r < 1) depends on
/// real scheduling.
AddaRunResult adda_run_threaded(const BlockedModel& model, const AddaConfig& config,
                                int n, const State& x0, const Eigen::VectorXd& y0,
                                std::uint64_t seed, double deadlock_timeout_s = 30.0);

/// Synchronous reference chain using the identical stream discipline
/// (worker j's items from stream split(100 + j), the parameter draw from
/// split(1)); the distributed engines reproduce it draw for draw whenever
/// epsilon = 1 or r = 1.
ChainTrace blocked_reference_chain(const BlockedModel& model, int n, const State& x0,
                                   const Eigen::VectorXd& y0, std::uint64_t seed);

/// Per-epoch manager bookkeeping.  This struct plus the current parameter
/// draw is the protocol's entire state: the next joint state depends only
/// on the current one and fresh randomness, never on older epochs.  Fields:
/// the epoch counter, the spliced latent vector, the per-block fresh flags
/// with their count, the quorum for this epoch, and a discard counter.
struct ManagerEpoch {
  int epoch = 0;
  Eigen::VectorXd y;
  std::vector<bool> fresh;
  int fresh_count = 0;
  int need = 0;
  long stale_discarded = 0;

  /// Splices a counted update and returns true; silently discards stale
  /// epochs; throws protocol_error on duplicated fresh updates, updates
  /// from future epochs, unknown blocks, or wrong item counts.
  bool on_update(const BlockedModel& model, const BlockUpdate& upd);
  bool ready() const { return fresh_count >= need; }
};

/// Worker-side epoch monotonicity guard: broadcasts must arrive with
/// strictly increasing epochs (per-sender FIFO without duplication).
struct WorkerGuard {
  int last_epoch = -1;
  void on_broadcast(const ParamBroadcast& pb);
};

struct WallClockRow {
  double r = 1.0;
  double epsilon = 1.0;
  int iterations = 0;
  double sim_seconds = 0.0;
  double sec_per_iter = 0.0;
  double ess = 0.0;
  double ess_per_sec = 0.0;
};

/// Mixing-versus-cost table over (r, epsilon) configurations under the
/// simulated latency model, identical seeds per stream across rows.
std::vector<WallClockRow> adda_wall_clock_report(
    const BlockedModel& model, const std::vector<std::pair<double, double>>& configs,
    const LatencyModel& latency, int n, const State& x0, const Eigen::VectorXd& y0,
    std::uint64_t seed);

// Concrete blocked models -----------------------------------------------

/// Lasso latents split into k contiguous coordinate blocks; their
/// conditionals involve no observed data, so the data-subset requirement
/// holds trivially.
BlockedModel blocked_lasso(const LassoModel& model, int k);

/// Logistic latents split into k contiguous observation blocks; item i
/// depends only on observation i's row.
BlockedModel blocked_logistic(const LogisticModel& model, int k);

/// Two-block discrete instance; conditional independence holds exactly by
/// construction.
BlockedModel blocked_discrete(const DiscreteBlockedJoint& joint);

/// Exact conditional-independence check of a general pmf over
/// (x, y1, y2): factorizes iff it equals fx * f(y1|x) * f(y2|x).
/// Returns the blocked form; throws when factorization fails.
DiscreteBlockedJoint blocked_joint_from_general(
    const Eigen::VectorXd& x_grid, const Eigen::VectorXd& y1_grid,
    const Eigen::VectorXd& y2_grid,
    const std::vector<Eigen::MatrixXd>& pmf_by_x /* per x: s1 x s2 */);

}  // namespace damc

#endif  // DAMC_ADDA_HPP
