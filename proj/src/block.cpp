#include "clr/block.hpp"

#include <cmath>
#include <stdexcept>

#include "clr/kernels.hpp"

namespace clr {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw DimensionError(msg);
}

bool fits_low_rank(std::size_t rank, std::size_t rows, std::size_t cols) {
  return 2 * rank <= std::min(rows, cols);
}

}  // namespace

Block Block::empty(std::size_t rows, std::size_t cols) {
  Block b;
  b.kind_ = BlockKind::empty;
  b.rows_ = rows;
  b.cols_ = cols;
  b.norm_bound_ = 0.0;
  return b;
}

Block Block::dense(DenseMatrix m) {
  Block b;
  b.kind_ = BlockKind::dense;
  b.rows_ = m.rows();
  b.cols_ = m.cols();
  b.norm_bound_ = frobenius_norm(m);
  b.dense_ = std::move(m);
  return b;
}

Block Block::low_rank(DenseMatrix x, DenseMatrix w) {
  require(x.cols() == w.cols() && x.cols() >= 1,
          "Block::low_rank: factor rank mismatch");
  Block b;
  b.kind_ = BlockKind::low_rank;
  b.rows_ = x.rows();
  b.cols_ = w.rows();
  b.norm_bound_ = low_rank_norm(x, w);
  b.x_ = std::move(x);
  b.w_ = std::move(w);
  return b;
}

Block Block::with_norm_bound(double bound) const {
  Block b = *this;
  b.norm_bound_ = bound;
  return b;
}

std::size_t Block::rank() const {
  switch (kind_) {
    case BlockKind::empty:
      return 0;
    case BlockKind::dense:
      return std::min(rows_, cols_);
    case BlockKind::low_rank:
      return x_.cols();
  }
  return 0;
}

std::size_t Block::stored_elements() const {
  switch (kind_) {
    case BlockKind::empty:
      return 0;
    case BlockKind::dense:
      return rows_ * cols_;
    case BlockKind::low_rank:
      return (rows_ + cols_) * x_.cols();
  }
  return 0;
}

double low_rank_norm(const DenseMatrix& x, const DenseMatrix& w) {
  // ||x w^T||_F^2 = <x^T x, w^T w>_F
  const DenseMatrix gx = gemm(transpose(x), x);
  const DenseMatrix gw = gemm(transpose(w), w);
  double s = 0.0;
  for (std::size_t i = 0; i < gx.size(); ++i) s += gx.data()[i] * gw.data()[i];
  return std::sqrt(std::max(0.0, s));
}

Block compress(const DenseMatrix& m, double eps_lr) {
  const CpqrResult f = cpqr(m, eps_lr);
  if (f.rank == 0) return Block::empty(m.rows(), m.cols());
  if (!fits_low_rank(f.rank, m.rows(), m.cols())) return Block::dense(m);
  // x = Q_r, w = (R_r P^T)^T: row perm[j] of w is column j of R_r.
  DenseMatrix w(m.cols(), f.rank);
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t t = 0; t < f.rank; ++t) w(f.perm[j], t) = f.r(t, j);
  return Block::low_rank(f.q, std::move(w));
}

Block block_multiply(const Block& a, const Block& b) {
  require(a.cols() == b.rows(), "block_multiply: inner dimensions differ");
  const std::size_t rows = a.rows(), cols = b.cols();
  const double bound = a.norm_bound() * b.norm_bound();

  if (a.is_empty() || b.is_empty()) return Block::empty(rows, cols);

  if (a.is_dense() && b.is_dense())
    return Block::dense(gemm(a.dense_data(), b.dense_data()))
        .with_norm_bound(bound);

  if (a.is_dense()) {  // dense * low_rank keeps rank r_b
    return Block::low_rank(gemm(a.dense_data(), b.x()), b.w())
        .with_norm_bound(bound);
  }
  if (b.is_dense()) {  // low_rank * dense keeps rank r_a
    return Block::low_rank(a.x(), gemm(transpose(b.dense_data()), a.w()))
        .with_norm_bound(bound);
  }

  // low_rank * low_rank: z = (w_a)^T x_b is r_a x r_b; fold z into the side
  // that minimizes the output rank, toward x on ties.
  const DenseMatrix z = gemm(transpose(a.w()), b.x());
  if (b.rank() <= a.rank()) {
    return Block::low_rank(gemm(a.x(), z), b.w()).with_norm_bound(bound);
  }
  return Block::low_rank(a.x(), gemm(b.w(), transpose(z)))
      .with_norm_bound(bound);
}

Block block_add(const Block& a, const Block& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          "block_add: shape mismatch");
  const double bound = a.norm_bound() + b.norm_bound();

  if (a.is_empty()) return b;
  if (b.is_empty()) return a;

  if (a.is_low_rank() && b.is_low_rank()) {
    const std::size_t ra = a.rank(), rb = b.rank();
    DenseMatrix x(a.rows(), ra + rb), w(a.cols(), ra + rb);
    for (std::size_t t = 0; t < ra; ++t) {
      for (std::size_t i = 0; i < a.rows(); ++i) x(i, t) = a.x()(i, t);
      for (std::size_t i = 0; i < a.cols(); ++i) w(i, t) = a.w()(i, t);
    }
    for (std::size_t t = 0; t < rb; ++t) {
      for (std::size_t i = 0; i < b.rows(); ++i) x(i, ra + t) = b.x()(i, t);
      for (std::size_t i = 0; i < b.cols(); ++i) w(i, ra + t) = b.w()(i, t);
    }
    return Block::low_rank(std::move(x), std::move(w)).with_norm_bound(bound);
  }

  DenseMatrix sum = to_dense(a);
  const DenseMatrix db = to_dense(b);
  for (std::size_t i = 0; i < sum.size(); ++i) sum.data()[i] += db.data()[i];
  return Block::dense(std::move(sum)).with_norm_bound(bound);
}

Block recompress(const Block& b, double eps_lr) {
  if (!b.is_low_rank()) return b;

  const QrResult fx = qr_thin(b.x());
  const QrResult fw = qr_thin(b.w());
  const DenseMatrix core = gemm(fx.r, transpose(fw.r));
  const CpqrResult fc = cpqr(core, eps_lr);
  if (fc.rank == 0) return Block::empty(b.rows(), b.cols());

  DenseMatrix wm(core.cols(), fc.rank);
  for (std::size_t j = 0; j < core.cols(); ++j)
    for (std::size_t t = 0; t < fc.rank; ++t) wm(fc.perm[j], t) = fc.r(t, j);

  DenseMatrix x = gemm(fx.q, fc.q);
  DenseMatrix w = gemm(fw.q, wm);
  if (!fits_low_rank(fc.rank, b.rows(), b.cols()))
    return Block::dense(gemm(x, transpose(w)));
  return Block::low_rank(std::move(x), std::move(w));
}

Block scale(const Block& b, double factor) {
  switch (b.kind()) {
    case BlockKind::empty:
      return b;
    case BlockKind::dense: {
      DenseMatrix m = b.dense_data();
      for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] *= factor;
      return Block::dense(std::move(m))
          .with_norm_bound(b.norm_bound() * std::abs(factor));
    }
    case BlockKind::low_rank: {
      DenseMatrix x = b.x();
      for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] *= factor;
      return Block::low_rank(std::move(x), b.w())
          .with_norm_bound(b.norm_bound() * std::abs(factor));
    }
  }
  return b;
}

DenseMatrix to_dense(const Block& b) {
  switch (b.kind()) {
    case BlockKind::empty:
      return DenseMatrix::zeros(b.rows(), b.cols());
    case BlockKind::dense:
      return b.dense_data();
    case BlockKind::low_rank:
      return gemm(b.x(), transpose(b.w()));
  }
  return DenseMatrix();
}

}  // namespace clr
