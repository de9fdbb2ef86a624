#ifndef CLR_TILED_MATRIX_HPP
#define CLR_TILED_MATRIX_HPP

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "clr/block.hpp"
#include "clr/grid.hpp"

namespace clr {

/// Nonuniform blocking of one dimension: strictly increasing boundaries
/// from 0 to the extent.
class Tiling {
 public:
  Tiling() : bounds_{0} {}
  explicit Tiling(std::vector<std::size_t> boundaries);

  static Tiling uniform(std::size_t extent, std::size_t tile);

  std::size_t n_tiles() const { return bounds_.size() - 1; }
  std::size_t extent() const { return bounds_.back(); }
  std::size_t offset(std::size_t t) const { return bounds_[t]; }
  std::size_t size(std::size_t t) const { return bounds_[t + 1] - bounds_[t]; }
  const std::vector<std::size_t>& boundaries() const { return bounds_; }

  bool operator==(const Tiling& o) const { return bounds_ == o.bounds_; }

 private:
  std::vector<std::size_t> bounds_;
};

/// Per-tile Frobenius-norm upper bounds plus the screening threshold the
/// shape was built with. bound == 0 marks a tile as exactly empty.
class Shape {
 public:
  Shape() = default;
  Shape(const Tiling& rows, const Tiling& cols, double eps_sp = 0.0);

  std::size_t n_row_tiles() const { return row_sizes_.size(); }
  std::size_t n_col_tiles() const { return col_sizes_.size(); }

  double bound(std::size_t i, std::size_t j) const {
    return bounds_[i * col_sizes_.size() + j];
  }
  void set_bound(std::size_t i, std::size_t j, double v) {
    bounds_[i * col_sizes_.size() + j] = v;
  }
  bool kept(std::size_t i, std::size_t j) const { return bound(i, j) > 0.0; }

  double area(std::size_t i, std::size_t j) const {
    return static_cast<double>(row_sizes_[i]) *
           static_cast<double>(col_sizes_[j]);
  }

  double eps_sp() const { return eps_sp_; }

  std::size_t n_kept() const;

 private:
  friend Shape product_shape(const Shape&, const Shape&, double);
  std::vector<std::size_t> row_sizes_, col_sizes_;
  std::vector<double> bounds_;
  double eps_sp_ = 0.0;
};

/// bound_C[i][j] = sum_k bound_A[i][k] * bound_B[k][j] (triangle inequality
/// plus submultiplicativity); entries at or below eps_sp * area are zeroed,
/// so those output tiles are never computed.
Shape product_shape(const Shape& a, const Shape& b, double eps_sp);

/// Mean over inner index k of the number of distinct grid rows owning a
/// non-empty tile of A's k-th tile column (and grid columns for B's k-th
/// tile row): the <Pr> and <Pc> of the sparse memory model.
double avg_active_grid_rows(const Shape& a, std::size_t pr);
double avg_active_grid_cols(const Shape& b, std::size_t pc);

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Distributed tiled matrix: tiles are block-cyclically owned by grid ranks,
/// empty tiles store nothing, and every stored tile's bytes are charged to
/// its owner in the grid's memory ledger.
class TiledMatrix {
 public:
  TiledMatrix(Tiling rows, Tiling cols, GridPtr grid, double eps_lr = 0.0,
              double eps_sp = 0.0);
  ~TiledMatrix();

  TiledMatrix(TiledMatrix&&) noexcept;
  TiledMatrix& operator=(TiledMatrix&&) noexcept;
  TiledMatrix(const TiledMatrix&) = delete;
  TiledMatrix& operator=(const TiledMatrix&) = delete;

  const Tiling& row_tiling() const { return rows_; }
  const Tiling& col_tiling() const { return cols_; }
  std::size_t rows() const { return rows_.extent(); }
  std::size_t cols() const { return cols_.extent(); }
  std::size_t n_row_tiles() const { return rows_.n_tiles(); }
  std::size_t n_col_tiles() const { return cols_.n_tiles(); }

  const Shape& shape() const { return shape_; }
  Shape& shape() { return shape_; }

  const GridPtr& grid() const { return grid_; }
  double eps_lr() const { return eps_lr_; }
  void set_eps_lr(double v) { eps_lr_ = v; }

  int owner(std::size_t i, std::size_t j) const {
    return grid_->rank_at(i % grid_->pr(), j % grid_->pc());
  }

  std::uint64_t tile_key(std::size_t i, std::size_t j) const {
    return static_cast<std::uint64_t>(i) * cols_.n_tiles() + j;
  }

  /// nullptr for empty tiles.
  BlockPtr tile(std::size_t i, std::size_t j) const;
  Block empty_tile(std::size_t i, std::size_t j) const {
    return Block::empty(rows_.size(i), cols_.size(j));
  }

  /// Stores a tile, charges its owner, and refreshes the shape bound from
  /// the block. Empty blocks erase the slot instead.
  void set_tile(std::size_t i, std::size_t j, Block b);
  void set_tile(std::size_t i, std::size_t j, BlockPtr b);
  /// Same bookkeeping as set_tile but without the ledger charge: used when
  /// the bytes were already charged as reduction temporaries.
  void adopt_tile(std::size_t i, std::size_t j, BlockPtr b);

  const std::unordered_map<std::uint64_t, BlockPtr>& stored_tiles() const {
    return tiles_;
  }

  std::size_t stored_elements() const;
  std::size_t stored_bytes() const { return stored_elements() * sizeof(double); }

  /// Fraction of elements covered by non-empty tiles (the 1 - z of the
  /// sparse memory model).
  double fill_fraction() const;

 private:
  void release_all();

  Tiling rows_, cols_;
  Shape shape_;
  GridPtr grid_;
  double eps_lr_ = 0.0;
  std::unordered_map<std::uint64_t, BlockPtr> tiles_;
};

/// Tile, compress, and screen a dense matrix onto the grid. Tiles whose
/// exact Frobenius norm is at most eps_sp * area are dropped to empty.
TiledMatrix from_dense(const DenseMatrix& m, const Tiling& rt,
                       const Tiling& ct, double eps_lr, double eps_sp,
                       GridPtr grid);

/// Test-oracle and interop path: assembles every tile into one dense matrix.
DenseMatrix gather_dense(const TiledMatrix& t);

/// Shares the (immutable) tile payloads; the clone charges the ledger again.
TiledMatrix clone(const TiledMatrix& t);

/// Identity with m's row blocking on both dimensions.
TiledMatrix identity_like(const TiledMatrix& m);

/// Bit-exact CLRM round trip of tilings, shape, tags, ranks, and payloads.
void save(const TiledMatrix& t, const std::string& path);
TiledMatrix load(const std::string& path, GridPtr grid);

}  // namespace clr

#endif  // CLR_TILED_MATRIX_HPP
