#include "clr/grid.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace clr {

// ---------------------------------------------------------------- Mailbox

void Mailbox::deposit(std::uint64_t key, BlockPtr block, int claims) {
  std::lock_guard<std::mutex> lk(mutex_);
  Slot& slot = slots_[key];
  if (slot.block) throw ProtocolError("mailbox: duplicate delivery key");
  slot.block = std::move(block);
  slot.claims = claims;
}

BlockPtr Mailbox::fetch(std::uint64_t key) const {
  std::lock_guard<std::mutex> lk(mutex_);
  auto it = slots_.find(key);
  return it == slots_.end() ? nullptr : it->second.block;
}

std::size_t Mailbox::consume(std::uint64_t key) {
  std::lock_guard<std::mutex> lk(mutex_);
  auto it = slots_.find(key);
  if (it == slots_.end()) throw ProtocolError("mailbox: consume of absent key");
  if (--it->second.claims == 0) {
    const std::size_t bytes = it->second.block->stored_bytes();
    slots_.erase(it);
    return bytes;
  }
  return 0;
}

std::size_t Mailbox::size() const {
  std::lock_guard<std::mutex> lk(mutex_);
  return slots_.size();
}

// ---------------------------------------------------------------- Network

Network::Network(Scheduler& sched, std::chrono::microseconds delay)
    : sched_(sched), delay_(delay) {
  if (delay_.count() > 0) thread_ = std::thread([this] { pump(); });
}

Network::~Network() {
  if (thread_.joinable()) {
    {
      std::lock_guard<std::mutex> lk(mutex_);
      stop_ = true;
    }
    cv_.notify_all();
    thread_.join();
  }
}

void Network::deliver(std::function<void()> action) {
  if (delay_.count() == 0) {
    action();
    return;
  }
  sched_.external_begin();
  {
    std::lock_guard<std::mutex> lk(mutex_);
    queue_.emplace(std::chrono::steady_clock::now() + delay_,
                   std::move(action));
  }
  cv_.notify_one();
}

void Network::pump() {
  std::unique_lock<std::mutex> lk(mutex_);
  for (;;) {
    if (stop_) return;
    if (queue_.empty()) {
      cv_.wait(lk);
      continue;
    }
    const auto due = queue_.begin()->first;
    if (cv_.wait_until(lk, due) == std::cv_status::timeout ||
        std::chrono::steady_clock::now() >= due) {
      while (!queue_.empty() &&
             queue_.begin()->first <= std::chrono::steady_clock::now()) {
        auto action = std::move(queue_.begin()->second);
        queue_.erase(queue_.begin());
        lk.unlock();
        action();
        sched_.external_end();
        lk.lock();
      }
    }
  }
}

// ------------------------------------------------------------ ProcessGrid

namespace {

std::size_t worker_cap_from_env() {
  if (const char* env = std::getenv("CLR_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace

ProcessGrid::ProcessGrid(std::size_t pr, std::size_t pc,
                         const GridOptions& opt)
    : pr_(pr), pc_(pc), ledger_(pr * pc), mailboxes_(pr * pc) {
  if (pr == 0 || pc == 0 || opt.workers_per_rank == 0)
    throw std::invalid_argument("ProcessGrid: all counts must be >= 1");
  trace_.set_enabled(opt.enable_trace);
  const std::size_t cap =
      opt.worker_cap ? opt.worker_cap : worker_cap_from_env();
  const std::size_t workers =
      std::clamp<std::size_t>(pr * pc * opt.workers_per_rank, 1, cap);
  sched_ = std::make_unique<Scheduler>(workers, opt.seed, &trace_);
  net_ = std::make_unique<Network>(
      *sched_, std::chrono::microseconds(
                   static_cast<std::int64_t>(opt.net_delay_ms * 1000.0)));
}

std::vector<int> ProcessGrid::row_group(std::size_t row) const {
  std::vector<int> g(pc_);
  for (std::size_t c = 0; c < pc_; ++c) g[c] = rank_at(row, c);
  return g;
}

std::vector<int> ProcessGrid::col_group(std::size_t col) const {
  std::vector<int> g(pr_);
  for (std::size_t r = 0; r < pr_; ++r) g[r] = rank_at(r, col);
  return g;
}

std::size_t ProcessGrid::default_issue_depth() const {
  return std::max<std::size_t>(2, std::min(pr_, pc_));
}

bool ProcessGrid::mailboxes_empty() const {
  for (const Mailbox& mb : mailboxes_)
    if (mb.size() != 0) return false;
  return true;
}

std::uint64_t ProcessGrid::open_scope() {
  std::lock_guard<std::mutex> lk(epoch_mutex_);
  const std::uint64_t scope = next_scope_++;
  epochs_[scope];
  return scope;
}

void ProcessGrid::register_epoch(std::uint64_t scope, std::uint64_t tag) {
  std::lock_guard<std::mutex> lk(epoch_mutex_);
  auto it = epochs_.find(scope);
  if (it == epochs_.end())
    throw ProtocolError("broadcast epoch used outside an open scope");
  if (!it->second.insert(tag).second)
    throw ProtocolError("broadcast epoch tag reused within a multiply");
}

void ProcessGrid::close_scope(std::uint64_t scope) {
  std::lock_guard<std::mutex> lk(epoch_mutex_);
  epochs_.erase(scope);
}

Future<BlockPtr> ProcessGrid::send_tile(int root, int dest, std::uint64_t key,
                                        BlockPtr block, int claims,
                                        CompletionGroup* cg, int iteration) {
  Future<BlockPtr> fut = sched_->make_future<BlockPtr>();
  const std::size_t bytes = block->stored_bytes();
  TaskInfo info;
  info.priority = prio::comm;
  info.rank = root;
  info.iteration = iteration;
  info.kind = "send";
  info.group = cg;
  sched_->submit(info, [this, dest, key, block = std::move(block), claims,
                        bytes, fut, iteration]() mutable {
    const std::int64_t sent_us = trace_.enabled() ? trace_.now_us() : 0;
    net_->deliver([this, dest, key, block = std::move(block), claims, bytes,
                   fut, iteration, sent_us]() mutable {
      mailboxes_[dest].deposit(key, block, claims);
      ledger_.charge(dest, bytes);
      if (trace_.enabled()) {
        TraceEvent ev;
        ev.task_id = 0;
        ev.rank = dest;
        ev.priority = prio::comm;
        ev.iteration = iteration;
        ev.kind = "deliver";
        ev.start_us = sent_us;
        ev.end_us = trace_.now_us();
        trace_.record(ev);
      }
      fut.set(std::move(block));
    });
  });
  return fut;
}

std::vector<std::vector<Future<BlockPtr>>> ProcessGrid::broadcast_tiles(
    std::span<const int> group, int root,
    std::span<const BroadcastItem> items, std::uint64_t scope,
    std::uint64_t epoch_tag, const ClaimFn& claims, CompletionGroup* cg,
    int iteration) {
  register_epoch(scope, epoch_tag);
  std::vector<std::vector<Future<BlockPtr>>> futures(group.size());
  for (std::size_t d = 0; d < group.size(); ++d) {
    const int dest = group[d];
    futures[d].resize(items.size());
    for (std::size_t t = 0; t < items.size(); ++t) {
      if (dest == root) {
        futures[d][t] = sched_->ready_future<BlockPtr>(items[t].block);
        continue;
      }
      const int n
          = claims ? claims(dest, items[t].key) : 1;
      if (n <= 0) continue;  // destination needs nothing from this tile
      futures[d][t] =
          send_tile(root, dest, items[t].key, items[t].block, n, cg, iteration);
    }
  }
  return futures;
}

void ProcessGrid::consume(int dest, std::uint64_t key) {
  const std::size_t released = mailboxes_[dest].consume(key);
  if (released) ledger_.release(dest, released);
}

GridPtr spawn_grid(std::size_t pr, std::size_t pc,
                   std::size_t workers_per_rank) {
  GridOptions opt;
  opt.workers_per_rank = workers_per_rank;
  return std::make_shared<ProcessGrid>(pr, pc, opt);
}

GridPtr spawn_grid(std::size_t pr, std::size_t pc, const GridOptions& opt) {
  return std::make_shared<ProcessGrid>(pr, pc, opt);
}

}  // namespace clr
