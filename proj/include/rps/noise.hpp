#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rps {

// Equidistant grid with nodes t_a + j h for j = 0..n_cells. Cells carry a
// global index origin_index + j (origin_index = round(anchor/h)) so that
// grids sitting on the same step lattice address the same noise cells.
struct GridSpec {
  double anchor = 0.0;
  double h = 1.0;
  int64_t n_cells = 1;
  int64_t origin_index = 0;

  double time_at(int64_t j) const { return anchor + double(j) * h; }
  double horizon() const { return double(n_cells) * h; }
  bool operator==(const GridSpec&) const = default;
};

GridSpec make_grid(double anchor, double h, int64_t n_cells);

// Brownian increments over the cells of a grid: increments[j*dim + c] is
// component c of W(t_{j+1}) - W(t_j) and is N(0, h) under the generator
// contract. `keyed` marks paths whose increments equal the keyed stream at
// cell origin_index + j + key_offset; such paths can be extended on demand.
struct WienerPath {
  GridSpec grid;
  int dim = 1;
  uint64_t seed = 0;
  uint64_t stream_id = 0;
  bool keyed = true;
  int64_t key_offset = 0;
  std::vector<double> increments;

  double inc(int64_t j, int c = 0) const {
    return increments[size_t(j) * size_t(dim) + size_t(c)];
  }
};

// Fills increments from the counter-based generator keyed by
// (seed, stream_id, global cell index, component). Bit-reproducible and
// independent of evaluation order. stream_id must fit in 32 bits.
WienerPath sample_path(const GridSpec& grid, int dim, uint64_t seed, uint64_t stream_id);
void sample_path_into(WienerPath& out, const GridSpec& grid, int dim, uint64_t seed,
                      uint64_t stream_id);

// Wiener shift by m_cells steps: increment j of the result is increment
// j + m_cells of the underlying stream. The grid (and anchor) is unchanged;
// the shift acts on the noise. Cells outside the stored range are
// regenerated from keys when the path is keyed and extension is allowed.
WienerPath shift(const WienerPath& path, int64_t m_cells, bool allow_extension = true);

// Coarse increment j is the sum of fine increments j*factor ..
// (j+1)*factor - 1, accumulated in a canonical order (ascending odd prime
// folds, then pairwise halvings) so that coarsen(p, a*b) equals
// coarsen(coarsen(p, a), b) bit-exactly whenever b is a power of two.
// factor must divide n_cells.
WienerPath coarsen(const WienerPath& path, int64_t factor);
void coarsen_into(WienerPath& out, const WienerPath& path, int64_t factor);

// Binary dump for experiment resumption. Little-endian layout:
//   u64 seed, u64 stream_id, f64 anchor, f64 h, u64 n_cells, u64 dim,
//   then n_cells*dim f64 increments.
void save_path(const WienerPath& path, const std::string& filename);
WienerPath load_path(const std::string& filename);

}  // namespace rps
