#ifndef CLR_SUMMA_HPP
#define CLR_SUMMA_HPP

#include <cstddef>

#include "clr/tiled_matrix.hpp"

namespace clr {

struct MultiplyOptions {
  /// Screening threshold for the result shape (tile kept only if its norm
  /// bound exceeds eps_sp * area).
  double eps_sp = 0.0;
  /// Iterations scheduled concurrently; 0 resolves to max(2, min(Pr, Pc)).
  std::size_t issue_depth = 0;
  /// Baseline mode: iteration k+1's broadcasts wait on iteration k's updates.
  bool single_issue = false;
};

struct MultiplyStats {
  std::size_t k_iterations = 0;     // inner tile-columns
  std::size_t iterations_run = 0;   // after the skipped-iteration rule
  std::size_t issue_depth = 0;      // resolved I
  std::size_t tasks_send = 0;
  std::size_t tasks_fused = 0;      // in-place rank-k updates
  std::size_t tasks_multiply = 0;   // split-mode multiply tasks
  std::size_t tasks_reduce = 0;     // split-mode reductions
  std::size_t recompress_count = 0;
  std::size_t tiles_screened = 0;   // result tiles zeroed up front
  double screened_area = 0.0;       // sum of their areas
  std::size_t tiles_dropped_final = 0;
};

/// C = A * B with stationary C over the operands' grid. Panels travel as
/// per-tile broadcast tasks, at most `issue_depth` iterations are in flight,
/// and contributions merge through a fused update when a tile has a single
/// pending contributor, else through split multiply-plus-reduce tasks.
TiledMatrix multiply(const TiledMatrix& a, const TiledMatrix& b,
                     const MultiplyOptions& opt = {},
                     MultiplyStats* stats = nullptr);

/// Bulk-synchronous baseline: identical results, sequence dependencies
/// between iterations reinstated.
TiledMatrix multiply_single_issue(const TiledMatrix& a, const TiledMatrix& b,
                                  double eps_sp = 0.0,
                                  MultiplyStats* stats = nullptr);

}  // namespace clr

#endif  // CLR_SUMMA_HPP
