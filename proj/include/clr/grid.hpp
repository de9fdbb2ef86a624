#ifndef CLR_GRID_HPP
#define CLR_GRID_HPP

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "clr/block.hpp"
#include "clr/memory_model.hpp"
#include "clr/scheduler.hpp"
#include "clr/trace.hpp"

namespace clr {

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Keyed in-flight deliveries for one rank, with consumer reference counts;
/// replicated panel bytes stay charged to the rank until the last consumer
/// releases them.
class Mailbox {
 public:
  void deposit(std::uint64_t key, BlockPtr block, int claims);
  BlockPtr fetch(std::uint64_t key) const;
  /// Returns the payload size if this claim was the last one (slot removed).
  std::size_t consume(std::uint64_t key);
  std::size_t size() const;

 private:
  struct Slot {
    BlockPtr block;
    int claims = 0;
  };
  mutable std::mutex mutex_;
  std::unordered_map<std::uint64_t, Slot> slots_;
};

/// Simulated transport with an optional fixed per-message latency. Delayed
/// deliveries run on a timer thread so latency costs wall time, not workers.
class Network {
 public:
  Network(Scheduler& sched, std::chrono::microseconds delay);
  ~Network();

  void deliver(std::function<void()> action);
  std::chrono::microseconds delay() const { return delay_; }

 private:
  void pump();

  Scheduler& sched_;
  std::chrono::microseconds delay_;
  std::mutex mutex_;
  std::condition_variable cv_;
  bool stop_ = false;
  using Item = std::pair<std::chrono::steady_clock::time_point,
                         std::function<void()>>;
  std::multimap<std::chrono::steady_clock::time_point, std::function<void()>>
      queue_;
  std::thread thread_;
};

struct GridOptions {
  std::size_t workers_per_rank = 1;
  std::uint64_t seed = 0;
  double net_delay_ms = 0.0;
  bool enable_trace = false;
  /// 0 = take the cap from CLR_WORKERS (default hardware parallelism).
  std::size_t worker_cap = 0;
};

/// Simulated Pr x Pc process grid: every rank is an isolated state domain
/// with a mailbox; tiles move between ranks only through broadcast tasks.
/// A shared worker pool (capped by CLR_WORKERS) stands in for the ranks'
/// cores; rank identity travels with each task.
class ProcessGrid {
 public:
  ProcessGrid(std::size_t pr, std::size_t pc, const GridOptions& opt = {});

  std::size_t pr() const { return pr_; }
  std::size_t pc() const { return pc_; }
  std::size_t n_ranks() const { return pr_ * pc_; }

  int rank_at(std::size_t row, std::size_t col) const {
    return static_cast<int>(row * pc_ + col);
  }
  std::size_t row_of(int rank) const { return static_cast<std::size_t>(rank) / pc_; }
  std::size_t col_of(int rank) const { return static_cast<std::size_t>(rank) % pc_; }

  std::vector<int> row_group(std::size_t row) const;
  std::vector<int> col_group(std::size_t col) const;

  /// Default schedule depth for this grid: max(2, min(Pr, Pc)).
  std::size_t default_issue_depth() const;

  Scheduler& scheduler() { return *sched_; }
  MemoryLedger& ledger() { return ledger_; }
  Network& network() { return *net_; }
  TraceLog& trace() { return trace_; }
  Mailbox& mailbox(int rank) { return mailboxes_[rank]; }

  bool mailboxes_empty() const;

  /// Epoch scopes namespace broadcast tags per multiply; reusing a tag
  /// within one scope is a protocol error.
  std::uint64_t open_scope();
  void register_epoch(std::uint64_t scope, std::uint64_t tag);
  void close_scope(std::uint64_t scope);

  struct BroadcastItem {
    std::uint64_t key = 0;
    BlockPtr block;
  };
  /// Claim count for a (destination, key) pair; 0 skips the send entirely.
  using ClaimFn = std::function<int(int dest, std::uint64_t key)>;

  /// One send task per (tile, destination); each future resolves when its
  /// tile lands in the destination mailbox. The root's own futures resolve
  /// immediately from local data. Result is indexed [dest position in
  /// group][item position]; skipped sends yield invalid futures.
  std::vector<std::vector<Future<BlockPtr>>> broadcast_tiles(
      std::span<const int> group, int root,
      std::span<const BroadcastItem> items, std::uint64_t scope,
      std::uint64_t epoch_tag, const ClaimFn& claims = {},
      CompletionGroup* cg = nullptr, int iteration = -1);

  /// Consumer-side release of one claim on a delivered tile.
  void consume(int dest, std::uint64_t key);

 private:
  Future<BlockPtr> send_tile(int root, int dest, std::uint64_t key,
                             BlockPtr block, int claims, CompletionGroup* cg,
                             int iteration);

  std::size_t pr_, pc_;
  TraceLog trace_;
  MemoryLedger ledger_;
  std::unique_ptr<Scheduler> sched_;
  std::unique_ptr<Network> net_;
  std::vector<Mailbox> mailboxes_;

  std::mutex epoch_mutex_;
  std::uint64_t next_scope_ = 1;
  std::map<std::uint64_t, std::set<std::uint64_t>> epochs_;
};

using GridPtr = std::shared_ptr<ProcessGrid>;

GridPtr spawn_grid(std::size_t pr, std::size_t pc,
                   std::size_t workers_per_rank = 1);
GridPtr spawn_grid(std::size_t pr, std::size_t pc, const GridOptions& opt);

}  // namespace clr

#endif  // CLR_GRID_HPP
