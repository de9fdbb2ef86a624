#ifndef CLR_KERNELS_HPP
#define CLR_KERNELS_HPP

#include <cstdint>
#include <vector>

#include "clr/dense_matrix.hpp"

namespace clr {

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// c = alpha * a * b
DenseMatrix gemm(const DenseMatrix& a, const DenseMatrix& b,
                 double alpha = 1.0);

/// c += alpha * a * b; c must already have shape a.rows x b.cols.
void gemm_accumulate(DenseMatrix& c, const DenseMatrix& a,
                     const DenseMatrix& b, double alpha = 1.0);

DenseMatrix transpose(const DenseMatrix& m);

double frobenius_norm(const DenseMatrix& m);

/// Column-pivoted Householder QR truncated at the first step where the
/// Frobenius norm of the trailing block drops to tol or below.
///
/// On return, ||m*P - q*r||_F <= tol with q (rows x rank) orthonormal and
/// r (rank x cols) upper-trapezoidal in pivoted column order;
/// perm[j] is the source column of pivoted column j. rank == 0 (empty
/// factors) for matrices whose norm is already <= tol.
struct CpqrResult {
  DenseMatrix q;
  DenseMatrix r;
  std::vector<std::size_t> perm;
  std::size_t rank = 0;
};
CpqrResult cpqr(const DenseMatrix& m, double tol);

/// Unpivoted thin Householder QR: m (rows x cols) = q (rows x k) * r (k x cols)
/// with k = min(rows, cols).
struct QrResult {
  DenseMatrix q;
  DenseMatrix r;
};
QrResult qr_thin(const DenseMatrix& m);

/// Power-iteration estimate of the largest-magnitude eigenvalue of a square
/// symmetric matrix. Deterministic for a given seed.
double two_norm_estimate(const DenseMatrix& m, std::size_t iters = 100,
                         std::uint64_t seed = 0);

}  // namespace clr

#endif  // CLR_KERNELS_HPP
