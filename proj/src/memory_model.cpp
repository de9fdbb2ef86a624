#include "clr/memory_model.hpp"

namespace clr {

double predict_peak_dense(double M, double N, double K, double m, double n,
                          double k, double pr, double pc, double issue_depth) {
  (void)m;
  (void)n;
  return issue_depth * (M * k / pr + N * k / pc) +
         (M * N + M * K + K * N) / (pr * pc);
}

double predict_peak_sparse(double M, double N, double K, double k, double pr,
                           double pc, double issue_depth, double z_a,
                           double z_b, double z_c, double avg_pr,
                           double avg_pc) {
  const double fill_a = 1.0 - z_a;
  const double fill_b = 1.0 - z_b;
  const double fill_c = 1.0 - z_c;
  return issue_depth * (fill_a * (avg_pc / pc) * (M * k / pr) +
                        fill_b * (avg_pr / pr) * (N * k / pc)) +
         (fill_c * M * N + fill_a * M * K + fill_b * K * N) / (pr * pc);
}

}  // namespace clr
