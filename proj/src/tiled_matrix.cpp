#include "clr/tiled_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "clr/kernels.hpp"

namespace clr {

Tiling::Tiling(std::vector<std::size_t> boundaries)
    : bounds_(std::move(boundaries)) {
  if (bounds_.size() < 2 || bounds_.front() != 0)
    throw std::invalid_argument("Tiling: boundaries must start at 0");
  for (std::size_t t = 1; t < bounds_.size(); ++t)
    if (bounds_[t] <= bounds_[t - 1])
      throw std::invalid_argument("Tiling: boundaries must strictly increase");
}

Tiling Tiling::uniform(std::size_t extent, std::size_t tile) {
  if (extent == 0 || tile == 0)
    throw std::invalid_argument("Tiling: extent and tile must be positive");
  std::vector<std::size_t> b{0};
  while (b.back() + tile < extent) b.push_back(b.back() + tile);
  b.push_back(extent);
  return Tiling(std::move(b));
}

Shape::Shape(const Tiling& rows, const Tiling& cols, double eps_sp)
    : eps_sp_(eps_sp) {
  row_sizes_.resize(rows.n_tiles());
  for (std::size_t t = 0; t < rows.n_tiles(); ++t) row_sizes_[t] = rows.size(t);
  col_sizes_.resize(cols.n_tiles());
  for (std::size_t t = 0; t < cols.n_tiles(); ++t) col_sizes_[t] = cols.size(t);
  bounds_.assign(row_sizes_.size() * col_sizes_.size(), 0.0);
}

std::size_t Shape::n_kept() const {
  std::size_t n = 0;
  for (double b : bounds_) n += b > 0.0;
  return n;
}

Shape product_shape(const Shape& a, const Shape& b, double eps_sp) {
  if (a.n_col_tiles() != b.n_row_tiles())
    throw DimensionError("product_shape: inner tile grids differ");
  Shape c;
  c.row_sizes_ = a.row_sizes_;
  c.col_sizes_ = b.col_sizes_;
  c.eps_sp_ = eps_sp;
  c.bounds_.assign(c.row_sizes_.size() * c.col_sizes_.size(), 0.0);
  const std::size_t inner = a.n_col_tiles();
  for (std::size_t i = 0; i < c.n_row_tiles(); ++i) {
    for (std::size_t j = 0; j < c.n_col_tiles(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < inner; ++k)
        s += a.bound(i, k) * b.bound(k, j);
      c.set_bound(i, j, s <= eps_sp * c.area(i, j) ? 0.0 : s);
    }
  }
  return c;
}

double avg_active_grid_rows(const Shape& a, std::size_t pr) {
  if (a.n_col_tiles() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < a.n_col_tiles(); ++k) {
    std::set<std::size_t> rows;
    for (std::size_t i = 0; i < a.n_row_tiles(); ++i)
      if (a.kept(i, k)) rows.insert(i % pr);
    total += static_cast<double>(rows.size());
  }
  return total / static_cast<double>(a.n_col_tiles());
}

double avg_active_grid_cols(const Shape& b, std::size_t pc) {
  if (b.n_row_tiles() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < b.n_row_tiles(); ++k) {
    std::set<std::size_t> cols;
    for (std::size_t j = 0; j < b.n_col_tiles(); ++j)
      if (b.kept(k, j)) cols.insert(j % pc);
    total += static_cast<double>(cols.size());
  }
  return total / static_cast<double>(b.n_row_tiles());
}

TiledMatrix::TiledMatrix(Tiling rows, Tiling cols, GridPtr grid, double eps_lr,
                         double eps_sp)
    : rows_(std::move(rows)),
      cols_(std::move(cols)),
      shape_(rows_, cols_, eps_sp),
      grid_(std::move(grid)),
      eps_lr_(eps_lr) {
  if (!grid_) throw std::invalid_argument("TiledMatrix: null grid");
}

TiledMatrix::~TiledMatrix() { release_all(); }

TiledMatrix::TiledMatrix(TiledMatrix&& o) noexcept
    : rows_(std::move(o.rows_)),
      cols_(std::move(o.cols_)),
      shape_(std::move(o.shape_)),
      grid_(std::move(o.grid_)),
      eps_lr_(o.eps_lr_),
      tiles_(std::move(o.tiles_)) {
  o.tiles_.clear();
}

TiledMatrix& TiledMatrix::operator=(TiledMatrix&& o) noexcept {
  if (this != &o) {
    release_all();
    rows_ = std::move(o.rows_);
    cols_ = std::move(o.cols_);
    shape_ = std::move(o.shape_);
    grid_ = std::move(o.grid_);
    eps_lr_ = o.eps_lr_;
    tiles_ = std::move(o.tiles_);
    o.tiles_.clear();
  }
  return *this;
}

void TiledMatrix::release_all() {
  if (!grid_) return;
  for (const auto& [key, block] : tiles_) {
    const std::size_t i = key / cols_.n_tiles(), j = key % cols_.n_tiles();
    grid_->ledger().release(owner(i, j), block->stored_bytes());
  }
  tiles_.clear();
}

BlockPtr TiledMatrix::tile(std::size_t i, std::size_t j) const {
  auto it = tiles_.find(tile_key(i, j));
  return it == tiles_.end() ? nullptr : it->second;
}

void TiledMatrix::set_tile(std::size_t i, std::size_t j, Block b) {
  set_tile(i, j, std::make_shared<const Block>(std::move(b)));
}

void TiledMatrix::set_tile(std::size_t i, std::size_t j, BlockPtr b) {
  if (b && !b->is_empty()) grid_->ledger().charge(owner(i, j), b->stored_bytes());
  adopt_tile(i, j, std::move(b));
}

void TiledMatrix::adopt_tile(std::size_t i, std::size_t j, BlockPtr b) {
  if (b && (b->rows() != rows_.size(i) || b->cols() != cols_.size(j)))
    throw DimensionError("set_tile: block shape does not match tile extents");
  const std::uint64_t key = tile_key(i, j);
  auto it = tiles_.find(key);
  if (it != tiles_.end()) {
    grid_->ledger().release(owner(i, j), it->second->stored_bytes());
    tiles_.erase(it);
  }
  if (!b || b->is_empty()) {
    shape_.set_bound(i, j, 0.0);
    return;
  }
  shape_.set_bound(i, j, b->norm_bound());
  tiles_.emplace(key, std::move(b));
}

std::size_t TiledMatrix::stored_elements() const {
  std::size_t n = 0;
  for (const auto& [key, block] : tiles_) n += block->stored_elements();
  return n;
}

double TiledMatrix::fill_fraction() const {
  double covered = 0.0;
  for (const auto& [key, block] : tiles_)
    covered += static_cast<double>(block->rows() * block->cols());
  const double total = static_cast<double>(rows()) * static_cast<double>(cols());
  return total == 0.0 ? 0.0 : covered / total;
}

TiledMatrix from_dense(const DenseMatrix& m, const Tiling& rt,
                       const Tiling& ct, double eps_lr, double eps_sp,
                       GridPtr grid) {
  if (rt.extent() != m.rows() || ct.extent() != m.cols())
    throw DimensionError("from_dense: tilings do not span the matrix");
  TiledMatrix t(rt, ct, std::move(grid), eps_lr, eps_sp);
  for (std::size_t i = 0; i < rt.n_tiles(); ++i) {
    for (std::size_t j = 0; j < ct.n_tiles(); ++j) {
      DenseMatrix sub(rt.size(i), ct.size(j));
      for (std::size_t c = 0; c < ct.size(j); ++c)
        for (std::size_t r = 0; r < rt.size(i); ++r)
          sub(r, c) = m(rt.offset(i) + r, ct.offset(j) + c);
      const double norm = frobenius_norm(sub);
      if (norm <= eps_sp * t.shape().area(i, j)) continue;  // screened out
      t.set_tile(i, j, compress(sub, eps_lr));
    }
  }
  return t;
}

DenseMatrix gather_dense(const TiledMatrix& t) {
  DenseMatrix out(t.rows(), t.cols());
  const Tiling& rt = t.row_tiling();
  const Tiling& ct = t.col_tiling();
  for (const auto& [key, block] : t.stored_tiles()) {
    const std::size_t i = key / t.n_col_tiles(), j = key % t.n_col_tiles();
    const DenseMatrix d = to_dense(*block);
    for (std::size_t c = 0; c < d.cols(); ++c)
      for (std::size_t r = 0; r < d.rows(); ++r)
        out(rt.offset(i) + r, ct.offset(j) + c) = d(r, c);
  }
  return out;
}

TiledMatrix clone(const TiledMatrix& t) {
  TiledMatrix out(t.row_tiling(), t.col_tiling(), t.grid(), t.eps_lr(),
                  t.shape().eps_sp());
  for (const auto& [key, block] : t.stored_tiles()) {
    const std::size_t i = key / t.n_col_tiles(), j = key % t.n_col_tiles();
    out.set_tile(i, j, block);
  }
  return out;
}

TiledMatrix identity_like(const TiledMatrix& m) {
  if (!(m.row_tiling() == m.col_tiling()))
    throw DimensionError("identity_like: row and column tilings differ");
  TiledMatrix out(m.row_tiling(), m.col_tiling(), m.grid(), m.eps_lr(),
                  m.shape().eps_sp());
  for (std::size_t t = 0; t < out.n_row_tiles(); ++t)
    out.set_tile(t, t, Block::dense(DenseMatrix::identity(out.row_tiling().size(t))));
  return out;
}

}  // namespace clr
