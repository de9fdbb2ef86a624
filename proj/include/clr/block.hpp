#ifndef CLR_BLOCK_HPP
#define CLR_BLOCK_HPP

#include <cstddef>
#include <memory>

#include "clr/dense_matrix.hpp"

namespace clr {

enum class BlockKind : unsigned char { empty = 0, dense = 1, low_rank = 2 };

/// One tile of a clustered low-rank matrix: exactly zero (empty), a dense
/// payload, or a thin factor pair approximating the tile as x * w^T.
/// Blocks are immutable values; every operation returns a new block.
class Block {
 public:
  Block() = default;

  static Block empty(std::size_t rows, std::size_t cols);
  static Block dense(DenseMatrix m);
  /// x: rows x r, w: cols x r. norm_bound defaults to the exact Frobenius
  /// norm of x * w^T (computed via the r x r Gram matrices).
  static Block low_rank(DenseMatrix x, DenseMatrix w);

  BlockKind kind() const { return kind_; }
  bool is_empty() const { return kind_ == BlockKind::empty; }
  bool is_dense() const { return kind_ == BlockKind::dense; }
  bool is_low_rank() const { return kind_ == BlockKind::low_rank; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  /// 0 for empty, factor count for low-rank, min(rows, cols) for dense.
  std::size_t rank() const;

  /// Upper bound on the Frobenius norm of the represented tile.
  double norm_bound() const { return norm_bound_; }
  Block with_norm_bound(double bound) const;

  /// Stored payload size in doubles (0 / rows*cols / (rows+cols)*r).
  std::size_t stored_elements() const;
  std::size_t stored_bytes() const { return stored_elements() * sizeof(double); }

  const DenseMatrix& dense_data() const { return dense_; }
  const DenseMatrix& x() const { return x_; }
  const DenseMatrix& w() const { return w_; }

 private:
  BlockKind kind_ = BlockKind::empty;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  double norm_bound_ = 0.0;
  DenseMatrix dense_;
  DenseMatrix x_, w_;
};

using BlockPtr = std::shared_ptr<const Block>;

/// Frobenius norm of x * w^T without forming the product.
double low_rank_norm(const DenseMatrix& x, const DenseMatrix& w);

/// RRQR compression of a dense tile: empty when the numerical rank at eps_lr
/// is zero, dense when it exceeds half of min(rows, cols), low-rank otherwise
/// with reconstruction error at most eps_lr in Frobenius norm.
Block compress(const DenseMatrix& m, double eps_lr);

/// Exact product representation; output rank is min(r_a, r_b) when both
/// operands are low-rank.
Block block_multiply(const Block& a, const Block& b);

/// Exact sum; low-rank operands concatenate factors (rank r_a + r_b), any
/// dense operand produces a dense sum, empty is the additive identity.
Block block_add(const Block& a, const Block& b);

/// Re-compresses a low-rank block through QR of both factors and RRQR of the
/// small core; applies the half-rank dense fallback. Dense and empty blocks
/// pass through unchanged.
Block recompress(const Block& b, double eps_lr);

Block scale(const Block& b, double factor);

DenseMatrix to_dense(const Block& b);

}  // namespace clr

#endif  // CLR_BLOCK_HPP
