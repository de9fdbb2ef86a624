#ifndef CLR_MEMORY_MODEL_HPP
#define CLR_MEMORY_MODEL_HPP

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace clr {

/// Per-rank live-byte accounting for stored tiles, in-flight panel replicas,
/// and reduction temporaries.
class MemoryLedger {
 public:
  explicit MemoryLedger(std::size_t n_ranks)
      : current_(n_ranks), peak_(n_ranks) {
    for (auto& c : current_) c.store(0);
    for (auto& p : peak_) p.store(0);
  }

  void charge(int rank, std::size_t bytes) {
    const std::int64_t now =
        current_[rank].fetch_add(static_cast<std::int64_t>(bytes)) +
        static_cast<std::int64_t>(bytes);
    std::int64_t prev = peak_[rank].load();
    while (now > prev && !peak_[rank].compare_exchange_weak(prev, now)) {
    }
  }

  void release(int rank, std::size_t bytes) {
    current_[rank].fetch_sub(static_cast<std::int64_t>(bytes));
  }

  std::int64_t current(int rank) const { return current_[rank].load(); }
  std::int64_t peak(int rank) const { return peak_[rank].load(); }
  std::size_t n_ranks() const { return current_.size(); }

  std::int64_t total_current() const {
    std::int64_t s = 0;
    for (const auto& c : current_) s += c.load();
    return s;
  }

  void reset_peaks() {
    for (std::size_t r = 0; r < peak_.size(); ++r)
      peak_[r].store(current_[r].load());
  }

 private:
  std::vector<std::atomic<std::int64_t>> current_;
  std::vector<std::atomic<std::int64_t>> peak_;
};

/// Peak element count per process for a dense multiple-issue SUMMA run with
/// issue depth I: I*(M*k/Pr + N*k/Pc) + (M*N + M*K + K*N)/(Pr*Pc).
/// Reduces to the bulk-synchronous footprint at I = 1. Block rows/cols of the
/// operands other than k do not enter the model.
double predict_peak_dense(double M, double N, double K, double m, double n,
                          double k, double pr, double pc, double issue_depth);

/// Block-sparse variant: each term scaled by the nonzero fraction of the
/// corresponding matrix, and the replicated-panel terms additionally by the
/// average number of active grid rows/columns per iteration.
/// z_* is the fraction of zero elements of the matrix (1 - z = fill).
double predict_peak_sparse(double M, double N, double K, double k, double pr,
                           double pc, double issue_depth, double z_a,
                           double z_b, double z_c, double avg_pr,
                           double avg_pc);

}  // namespace clr

#endif  // CLR_MEMORY_MODEL_HPP
