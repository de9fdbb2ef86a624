#include "clr/trace.hpp"

#include <fstream>
#include <stdexcept>

namespace clr {

void TraceLog::write_jsonl(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("TraceLog: cannot open " + path);
  std::lock_guard<std::mutex> lock(mutex_);
  for (const TraceEvent& ev : events_) {
    out << "{\"id\":" << ev.task_id << ",\"rank\":" << ev.rank
        << ",\"prio\":" << ev.priority << ",\"iter\":" << ev.iteration
        << ",\"kind\":\"" << ev.kind << "\",\"start_us\":" << ev.start_us
        << ",\"end_us\":" << ev.end_us << "}\n";
  }
}

}  // namespace clr
