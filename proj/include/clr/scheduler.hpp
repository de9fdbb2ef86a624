#ifndef CLR_SCHEDULER_HPP
#define CLR_SCHEDULER_HPP

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <queue>
#include <stdexcept>
#include <thread>
#include <unordered_set>
#include <vector>

#include "clr/trace.hpp"

namespace clr {

/// Fixed priority levels: tasks that free resources run before compute,
/// compute before broadcast initiation.
namespace prio {
inline constexpr int comm = 0;
inline constexpr int compute = 1;
inline constexpr int reduce = 2;
}  // namespace prio

class Scheduler;

namespace detail {

struct TaskNode;

struct FutureStateBase {
  std::mutex m;
  bool ready = false;
  std::vector<TaskNode*> waiters;
  Scheduler* sched = nullptr;
  virtual ~FutureStateBase() = default;
};

template <class T>
struct FutureState : FutureStateBase {
  T value{};
};

}  // namespace detail

/// Counts unfinished tasks registered against it; a multiply iteration (or a
/// whole phase) completes when its group drains to zero.
class CompletionGroup {
 public:
  std::size_t pending() const { return pending_.load(); }

 private:
  friend class Scheduler;
  std::atomic<std::size_t> pending_{0};
};

struct TaskInfo {
  int priority = prio::compute;
  int rank = 0;
  int iteration = -1;
  const char* kind = "task";
  CompletionGroup* group = nullptr;
};

struct SchedulerStalled : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Value-carrying single-assignment future. Dependents submitted against it
/// become ready when it resolves.
template <class T>
class Future {
 public:
  Future() = default;

  bool valid() const { return st_ != nullptr; }
  bool is_ready() const {
    std::lock_guard<std::mutex> lk(st_->m);
    return st_->ready;
  }
  /// Only valid once resolved (callers reach it through task dependencies).
  const T& value() const { return st_->value; }

  std::shared_ptr<detail::FutureStateBase> state() const { return st_; }

  void set(T v);

 private:
  friend class Scheduler;
  explicit Future(std::shared_ptr<detail::FutureState<T>> st) : st_(st) {}
  std::shared_ptr<detail::FutureState<T>> st_;
};

using DepList = std::vector<std::shared_ptr<detail::FutureStateBase>>;

/// Dependency-counted task scheduler shared by all ranks of a grid. Tasks
/// run exactly once, after every declared input has resolved; among ready
/// tasks higher priority wins, ties broken FIFO or by seeded shuffle.
class Scheduler {
 public:
  explicit Scheduler(std::size_t workers, std::uint64_t seed = 0,
                     TraceLog* trace = nullptr);
  ~Scheduler();

  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  std::size_t worker_count() const { return threads_.size(); }
  std::uint64_t seed() const { return seed_; }

  template <class T>
  Future<T> make_future() {
    auto st = std::make_shared<detail::FutureState<T>>();
    st->sched = this;
    return Future<T>(st);
  }

  template <class T>
  Future<T> ready_future(T v) {
    Future<T> f = make_future<T>();
    f.set(std::move(v));
    return f;
  }

  /// Submits a task; it becomes ready once all `deps` have resolved.
  std::uint64_t submit(const TaskInfo& info, std::function<void()> fn,
                       const DepList& deps = {});

  /// Blocks until the group drains. Throws SchedulerStalled if the system
  /// goes quiet with tasks still pending (dependency cycle or lost message).
  void wait(CompletionGroup& group);

  /// Blocks until no task is pending anywhere.
  void wait_idle();

  std::size_t tasks_pending() const { return total_pending_.load(); }
  std::uint64_t tasks_completed() const { return completed_.load(); }

  /// In-flight work owned by an external agent (the network thread); keeps
  /// stall detection honest while messages are in the air.
  void external_begin() { ++external_; }
  void external_end();

  TraceLog* trace() const { return trace_; }

 private:
  friend struct detail::FutureStateBase;
  template <class T>
  friend class Future;

  struct ReadyEntry {
    int priority;
    std::uint64_t key;
    detail::TaskNode* node;
    bool operator<(const ReadyEntry& o) const {
      if (priority != o.priority) return priority < o.priority;
      return key > o.key;  // smaller key first
    }
  };

  void push_ready(detail::TaskNode* node);
  void deps_resolved(std::vector<detail::TaskNode*>& nodes);
  void finish(detail::TaskNode* node);
  void worker_loop();
  bool quiet_locked() const;

  std::uint64_t seed_;
  TraceLog* trace_;

  mutable std::mutex mutex_;
  std::condition_variable ready_cv_;
  std::condition_variable progress_cv_;
  std::priority_queue<ReadyEntry> ready_;
  std::unordered_set<detail::TaskNode*> live_nodes_;
  bool stop_ = false;
  std::size_t running_ = 0;

  std::atomic<std::uint64_t> next_id_{1};
  std::atomic<std::uint64_t> next_seq_{1};
  std::atomic<std::uint64_t> completed_{0};
  std::atomic<std::uint64_t> progress_{0};
  std::atomic<std::size_t> total_pending_{0};
  std::atomic<std::size_t> external_{0};

  std::vector<std::thread> threads_;

  template <class T>
  void resolve(detail::FutureState<T>& st, T&& v);
};

namespace detail {

struct TaskNode {
  std::uint64_t id = 0;
  std::uint64_t key = 0;
  TaskInfo info;
  std::function<void()> fn;
  std::atomic<int> waits{1};
};

}  // namespace detail

template <class T>
void Scheduler::resolve(detail::FutureState<T>& st, T&& v) {
  std::vector<detail::TaskNode*> woken;
  {
    std::lock_guard<std::mutex> lk(st.m);
    st.value = std::move(v);
    st.ready = true;
    woken.swap(st.waiters);
  }
  ++progress_;
  deps_resolved(woken);
  progress_cv_.notify_all();
}

template <class T>
void Future<T>::set(T v) {
  st_->sched->resolve(*st_, std::move(v));
}

}  // namespace clr

#endif  // CLR_SCHEDULER_HPP
