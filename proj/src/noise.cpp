#include "rps/noise.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <stdexcept>

#include "rps/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "path files are little-endian; big-endian hosts are unsupported");

namespace rps {

GridSpec make_grid(double anchor, double h, int64_t n_cells) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("grid step must be positive and finite");
  if (n_cells < 1) throw std::invalid_argument("grid needs at least one cell");
  if (!std::isfinite(anchor)) throw std::invalid_argument("grid anchor must be finite");
  GridSpec g;
  g.anchor = anchor;
  g.h = h;
  g.n_cells = n_cells;
  g.origin_index = std::llround(anchor / h);
  return g;
}

void sample_path_into(WienerPath& out, const GridSpec& grid, int dim, uint64_t seed,
                      uint64_t stream_id) {
  if (dim < 1) throw std::invalid_argument("path dimension must be positive");
  if (stream_id > 0xFFFFFFFFull) throw std::invalid_argument("stream_id must fit in 32 bits");
  out.grid = grid;
  out.dim = dim;
  out.seed = seed;
  out.stream_id = stream_id;
  out.keyed = true;
  out.key_offset = 0;
  out.increments.resize(size_t(grid.n_cells) * size_t(dim));
  const double root_h = std::sqrt(grid.h);
  const auto stream = uint32_t(stream_id);
  for (int64_t j = 0; j < grid.n_cells; ++j) {
    const int64_t cell = grid.origin_index + j;
    for (int c = 0; c < dim; ++c)
      out.increments[size_t(j) * size_t(dim) + size_t(c)] =
          root_h * keyed_standard_normal(seed, stream, cell, uint32_t(c));
  }
}

WienerPath sample_path(const GridSpec& grid, int dim, uint64_t seed, uint64_t stream_id) {
  WienerPath p;
  sample_path_into(p, grid, dim, seed, stream_id);
  return p;
}

WienerPath shift(const WienerPath& path, int64_t m_cells, bool allow_extension) {
  WienerPath out;
  out.grid = path.grid;
  out.dim = path.dim;
  out.seed = path.seed;
  out.stream_id = path.stream_id;
  out.keyed = path.keyed;
  out.key_offset = path.key_offset + m_cells;
  const int64_t n = path.grid.n_cells;
  out.increments.resize(path.increments.size());
  for (int64_t j = 0; j < n; ++j) {
    const int64_t src = j + m_cells;
    if (src >= 0 && src < n) {
      for (int c = 0; c < path.dim; ++c)
        out.increments[size_t(j) * path.dim + c] = path.inc(src, c);
    } else if (path.keyed && allow_extension) {
      const int64_t cell = path.grid.origin_index + path.key_offset + src;
      const double root_h = std::sqrt(path.grid.h);
      for (int c = 0; c < path.dim; ++c)
        out.increments[size_t(j) * path.dim + c] =
            root_h * keyed_standard_normal(path.seed, uint32_t(path.stream_id), cell, uint32_t(c));
    } else {
      throw std::out_of_range("shift needs cell " + std::to_string(src) +
                              " outside the generated range and extension is unavailable");
    }
  }
  return out;
}

namespace {

// one fold: sums q consecutive increments, ascending within each group
void fold_groups(std::vector<double>& inc, int64_t& n, int dim, int64_t q) {
  const int64_t n_out = n / q;
  for (int64_t j = 0; j < n_out; ++j)
    for (int c = 0; c < dim; ++c) {
      double s = inc[size_t(j * q) * size_t(dim) + size_t(c)];
      for (int64_t k = 1; k < q; ++k) s += inc[size_t(j * q + k) * size_t(dim) + size_t(c)];
      inc[size_t(j) * size_t(dim) + size_t(c)] = s;
    }
  n = n_out;
}

}  // namespace

void coarsen_into(WienerPath& out, const WienerPath& path, int64_t factor) {
  if (factor < 1) throw std::invalid_argument("coarsening factor must be positive");
  if (path.grid.n_cells % factor != 0)
    throw std::invalid_argument("coarsening factor " + std::to_string(factor) +
                                " does not divide n_cells " + std::to_string(path.grid.n_cells));
  GridSpec g;
  g.anchor = path.grid.anchor;
  g.h = path.grid.h * double(factor);
  g.n_cells = path.grid.n_cells / factor;
  g.origin_index = std::llround(g.anchor / g.h);
  out.grid = g;
  out.dim = path.dim;
  out.seed = path.seed;
  out.stream_id = path.stream_id;
  out.keyed = (factor == 1) ? path.keyed : false;
  out.key_offset = (factor == 1) ? path.key_offset : 0;
  out.increments = path.increments;

  // Canonical summation order: odd prime folds ascending, then pairwise
  // halvings. Coarsening by a*b then matches coarsening by a followed by b
  // bit-exactly whenever b is a power of two (every coupling ladder used by
  // the convergence studies is), which rounded addition cannot provide for
  // arbitrary regroupings.
  int64_t n = path.grid.n_cells;
  int64_t rest = factor;
  int64_t twos = 0;
  while (rest % 2 == 0) {
    rest /= 2;
    ++twos;
  }
  for (int64_t q = 3; rest > 1; q += 2)
    while (rest % q == 0) {
      fold_groups(out.increments, n, path.dim, q);
      rest /= q;
    }
  for (int64_t k = 0; k < twos; ++k) fold_groups(out.increments, n, path.dim, 2);
  out.increments.resize(size_t(g.n_cells) * size_t(path.dim));
}

WienerPath coarsen(const WienerPath& path, int64_t factor) {
  WienerPath out;
  coarsen_into(out, path, factor);
  return out;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FileHandle = std::unique_ptr<std::FILE, FileCloser>;

template <typename T>
void write_raw(std::FILE* f, const T& v) {
  if (std::fwrite(&v, sizeof(T), 1, f) != 1) throw std::runtime_error("short write");
}

template <typename T>
T read_raw(std::FILE* f) {
  T v;
  if (std::fread(&v, sizeof(T), 1, f) != 1) throw std::runtime_error("short read");
  return v;
}

}  // namespace

void save_path(const WienerPath& path, const std::string& filename) {
  FileHandle f(std::fopen(filename.c_str(), "wb"));
  if (!f) throw std::runtime_error("cannot open " + filename + " for writing");
  write_raw(f.get(), path.seed);
  write_raw(f.get(), path.stream_id);
  write_raw(f.get(), path.grid.anchor);
  write_raw(f.get(), path.grid.h);
  write_raw(f.get(), uint64_t(path.grid.n_cells));
  write_raw(f.get(), uint64_t(path.dim));
  const size_t n = path.increments.size();
  if (n && std::fwrite(path.increments.data(), sizeof(double), n, f.get()) != n)
    throw std::runtime_error("short write to " + filename);
}

WienerPath load_path(const std::string& filename) {
  FileHandle f(std::fopen(filename.c_str(), "rb"));
  if (!f) throw std::runtime_error("cannot open " + filename);
  WienerPath p;
  p.seed = read_raw<uint64_t>(f.get());
  p.stream_id = read_raw<uint64_t>(f.get());
  const double anchor = read_raw<double>(f.get());
  const double h = read_raw<double>(f.get());
  const auto n_cells = int64_t(read_raw<uint64_t>(f.get()));
  const auto dim = int64_t(read_raw<uint64_t>(f.get()));
  if (n_cells < 1 || dim < 1 || dim > std::numeric_limits<int>::max())
    throw std::runtime_error("corrupt path header in " + filename);
  p.grid = make_grid(anchor, h, n_cells);
  p.dim = int(dim);
  p.keyed = false;  // provenance unknown after a round-trip
  p.increments.resize(size_t(n_cells) * size_t(dim));
  if (std::fread(p.increments.data(), sizeof(double), p.increments.size(), f.get()) !=
      p.increments.size())
    throw std::runtime_error("truncated path payload in " + filename);
  return p;
}

}  // namespace rps
