#include <cstdint>
#include <cstring>
#include <fstream>

#include "clr/tiled_matrix.hpp"

namespace clr {

// CLRM v1, little-endian:
//   "CLRM" | u32 version | u64 rows | u64 cols | u32 nrt | u32 nct |
//   row boundaries (nrt+1 x u64) | col boundaries (nct+1 x u64) |
//   per tile, row-major: u8 tag | u32 rank | f64 norm_bound | payload
// Payloads are column-major f64: dense = rows*cols, low-rank = X then W.

namespace {

constexpr char kMagic[4] = {'C', 'L', 'R', 'M'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("CLRM: truncated file");
  return v;
}

void write_matrix(std::ostream& out, const DenseMatrix& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
}

DenseMatrix read_matrix(std::istream& in, std::size_t rows, std::size_t cols) {
  DenseMatrix m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!in) throw FormatError("CLRM: truncated tile payload");
  return m;
}

}  // namespace

void save(const TiledMatrix& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("CLRM: cannot open " + path + " for writing");

  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint64_t>(t.rows()));
  write_pod(out, static_cast<std::uint64_t>(t.cols()));
  write_pod(out, static_cast<std::uint32_t>(t.n_row_tiles()));
  write_pod(out, static_cast<std::uint32_t>(t.n_col_tiles()));
  for (std::size_t b : t.row_tiling().boundaries())
    write_pod(out, static_cast<std::uint64_t>(b));
  for (std::size_t b : t.col_tiling().boundaries())
    write_pod(out, static_cast<std::uint64_t>(b));

  for (std::size_t i = 0; i < t.n_row_tiles(); ++i) {
    for (std::size_t j = 0; j < t.n_col_tiles(); ++j) {
      const BlockPtr b = t.tile(i, j);
      const std::uint8_t tag =
          !b ? 0 : static_cast<std::uint8_t>(b->kind());
      write_pod(out, tag);
      const std::uint32_t rank =
          (b && b->is_low_rank()) ? static_cast<std::uint32_t>(b->rank()) : 0;
      write_pod(out, rank);
      write_pod(out, b ? b->norm_bound() : 0.0);
      if (!b) continue;
      if (b->is_dense()) {
        write_matrix(out, b->dense_data());
      } else if (b->is_low_rank()) {
        write_matrix(out, b->x());
        write_matrix(out, b->w());
      }
    }
  }
  if (!out) throw FormatError("CLRM: write failed for " + path);
}

TiledMatrix load(const std::string& path, GridPtr grid) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("CLRM: cannot open " + path);

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("CLRM: bad magic");
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kVersion) throw FormatError("CLRM: unsupported version");

  const auto rows = read_pod<std::uint64_t>(in);
  const auto cols = read_pod<std::uint64_t>(in);
  const auto nrt = read_pod<std::uint32_t>(in);
  const auto nct = read_pod<std::uint32_t>(in);
  if (nrt == 0 || nct == 0) throw FormatError("CLRM: empty tile grid");

  auto read_boundaries = [&](std::uint32_t n, std::uint64_t extent) {
    std::vector<std::size_t> b(n + 1);
    for (auto& v : b) v = static_cast<std::size_t>(read_pod<std::uint64_t>(in));
    if (b.back() != extent)
      throw FormatError("CLRM: boundaries do not span the extent");
    return Tiling(std::move(b));
  };
  const Tiling rt = read_boundaries(nrt, rows);
  const Tiling ct = read_boundaries(nct, cols);

  TiledMatrix t(rt, ct, std::move(grid));
  for (std::size_t i = 0; i < nrt; ++i) {
    for (std::size_t j = 0; j < nct; ++j) {
      const auto tag = read_pod<std::uint8_t>(in);
      const auto rank = read_pod<std::uint32_t>(in);
      const auto norm_bound = read_pod<double>(in);
      const std::size_t tr = rt.size(i), tc = ct.size(j);
      switch (tag) {
        case 0:
          break;
        case 1:
          t.set_tile(i, j,
                     Block::dense(read_matrix(in, tr, tc))
                         .with_norm_bound(norm_bound));
          break;
        case 2: {
          if (rank == 0) throw FormatError("CLRM: low-rank tile with rank 0");
          DenseMatrix x = read_matrix(in, tr, rank);
          DenseMatrix w = read_matrix(in, tc, rank);
          t.set_tile(i, j, Block::low_rank(std::move(x), std::move(w))
                               .with_norm_bound(norm_bound));
          break;
        }
        default:
          throw FormatError("CLRM: unknown tile tag");
      }
    }
  }
  // Any trailing bytes mean the writer and reader disagree on the format.
  in.peek();
  if (!in.eof()) throw FormatError("CLRM: trailing bytes after last tile");
  return t;
}

}  // namespace clr
