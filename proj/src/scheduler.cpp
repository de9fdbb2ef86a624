#include "clr/scheduler.hpp"

#include <chrono>

namespace clr {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

Scheduler::Scheduler(std::size_t workers, std::uint64_t seed, TraceLog* trace)
    : seed_(seed), trace_(trace) {
  if (workers == 0) workers = 1;
  threads_.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i)
    threads_.emplace_back([this] { worker_loop(); });
}

Scheduler::~Scheduler() {
  {
    std::lock_guard<std::mutex> lk(mutex_);
    stop_ = true;
  }
  ready_cv_.notify_all();
  for (auto& t : threads_) t.join();
  // Error paths can abandon tasks; reclaim whatever is left.
  for (detail::TaskNode* n : live_nodes_) delete n;
}

std::uint64_t Scheduler::submit(const TaskInfo& info, std::function<void()> fn,
                                const DepList& deps) {
  auto* node = new detail::TaskNode;
  node->id = next_id_.fetch_add(1);
  const std::uint64_t seq = next_seq_.fetch_add(1);
  node->key = seed_ == 0 ? seq : mix64(seq ^ seed_);
  node->info = info;
  node->fn = std::move(fn);
  node->waits.store(1);

  if (info.group) ++info.group->pending_;
  ++total_pending_;
  {
    std::lock_guard<std::mutex> lk(mutex_);
    live_nodes_.insert(node);
  }

  for (const auto& dep : deps) {
    if (!dep) continue;
    std::lock_guard<std::mutex> lk(dep->m);
    if (!dep->ready) {
      node->waits.fetch_add(1);
      dep->waiters.push_back(node);
    }
  }
  if (node->waits.fetch_sub(1) == 1) push_ready(node);
  return node->id;
}

void Scheduler::push_ready(detail::TaskNode* node) {
  {
    std::lock_guard<std::mutex> lk(mutex_);
    ready_.push(ReadyEntry{node->info.priority, node->key, node});
  }
  ready_cv_.notify_one();
}

void Scheduler::deps_resolved(std::vector<detail::TaskNode*>& nodes) {
  for (detail::TaskNode* node : nodes)
    if (node->waits.fetch_sub(1) == 1) push_ready(node);
}

// Group and pending counters must drop before running_ does: wait() treats
// "nothing running, nothing ready, no progress" as a stall, so a task may not
// look finished to the queue before its group knows.
void Scheduler::finish(detail::TaskNode* node) {
  CompletionGroup* group = node->info.group;
  if (group) --group->pending_;
  --total_pending_;
  ++completed_;
  {
    std::lock_guard<std::mutex> lk(mutex_);
    live_nodes_.erase(node);
    --running_;
    ++progress_;
  }
  delete node;
  progress_cv_.notify_all();
}

void Scheduler::worker_loop() {
  for (;;) {
    detail::TaskNode* node = nullptr;
    {
      std::unique_lock<std::mutex> lk(mutex_);
      ready_cv_.wait(lk, [&] { return stop_ || !ready_.empty(); });
      if (ready_.empty()) return;  // stop requested and drained
      node = ready_.top().node;
      ready_.pop();
      ++running_;
    }
    if (trace_ && trace_->enabled()) {
      TraceEvent ev;
      ev.task_id = node->id;
      ev.rank = node->info.rank;
      ev.priority = node->info.priority;
      ev.iteration = node->info.iteration;
      ev.kind = node->info.kind;
      ev.start_us = trace_->now_us();
      node->fn();
      ev.end_us = trace_->now_us();
      trace_->record(ev);
    } else {
      node->fn();
    }
    finish(node);
  }
}

bool Scheduler::quiet_locked() const {
  return ready_.empty() && running_ == 0 && external_.load() == 0;
}

void Scheduler::wait(CompletionGroup& group) {
  std::uint64_t last_progress = progress_.load();
  int quiet_rounds = 0;
  std::unique_lock<std::mutex> lk(mutex_);
  while (group.pending_.load() != 0) {
    progress_cv_.wait_for(lk, std::chrono::milliseconds(100));
    if (group.pending_.load() == 0) break;
    const std::uint64_t now = progress_.load();
    if (now != last_progress || !quiet_locked()) {
      last_progress = now;
      quiet_rounds = 0;
      continue;
    }
    if (++quiet_rounds >= 2)
      throw SchedulerStalled(
          "scheduler quiet with tasks pending (dependency cycle?)");
  }
}

void Scheduler::wait_idle() {
  std::uint64_t last_progress = progress_.load();
  int quiet_rounds = 0;
  std::unique_lock<std::mutex> lk(mutex_);
  while (total_pending_.load() != 0 || external_.load() != 0) {
    progress_cv_.wait_for(lk, std::chrono::milliseconds(100));
    if (total_pending_.load() == 0 && external_.load() == 0) break;
    const std::uint64_t now = progress_.load();
    if (now != last_progress || !quiet_locked()) {
      last_progress = now;
      quiet_rounds = 0;
      continue;
    }
    if (++quiet_rounds >= 2)
      throw SchedulerStalled(
          "scheduler quiet with tasks pending (dependency cycle?)");
  }
}

void Scheduler::external_end() {
  --external_;
  ++progress_;
  progress_cv_.notify_all();
}

}  // namespace clr
