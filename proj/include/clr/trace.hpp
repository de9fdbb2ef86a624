#ifndef CLR_TRACE_HPP
#define CLR_TRACE_HPP

#include <chrono>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

namespace clr {

struct TraceEvent {
  std::uint64_t task_id = 0;
  int rank = 0;
  int priority = 0;
  int iteration = -1;
  const char* kind = "";
  std::int64_t start_us = 0;
  std::int64_t end_us = 0;
};

/// Thread-safe execution trace; one event per task (or message delivery).
/// Serializes to JSON lines for the CLI's overlap analysis.
class TraceLog {
 public:
  TraceLog() : t0_(std::chrono::steady_clock::now()) {}

  void set_enabled(bool on) { enabled_ = on; }
  bool enabled() const { return enabled_; }

  std::int64_t now_us() const {
    return std::chrono::duration_cast<std::chrono::microseconds>(
               std::chrono::steady_clock::now() - t0_)
        .count();
  }

  void record(const TraceEvent& ev) {
    if (!enabled_) return;
    std::lock_guard<std::mutex> lock(mutex_);
    events_.push_back(ev);
  }

  std::vector<TraceEvent> events() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return events_;
  }

  void clear() {
    std::lock_guard<std::mutex> lock(mutex_);
    events_.clear();
  }

  /// One JSON object per line: {"id":..,"rank":..,"prio":..,"iter":..,
  /// "kind":..,"start_us":..,"end_us":..}
  void write_jsonl(const std::string& path) const;

 private:
  std::chrono::steady_clock::time_point t0_;
  bool enabled_ = false;
  mutable std::mutex mutex_;
  std::vector<TraceEvent> events_;
};

}  // namespace clr

#endif  // CLR_TRACE_HPP
