#pragma once

// Shared fixtures and independent oracles. Oracles here deliberately avoid
// the library's code paths: the synopsis oracle is a plain floor-mean
// cascade in int64, the bounds oracle a brute fragment scan, and the query
// oracles full-decode scans.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "scow/container.hpp"
#include "scow/geometry.hpp"
#include "scow/hmmt.hpp"
#include "scow/query.hpp"
#include "scow/types.hpp"

namespace testsup {

using scow::coords;
using scow::region;

// ---------------------------------------------------------------------------
// randomness
// ---------------------------------------------------------------------------

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline std::int32_t random_value(std::mt19937_64& rng, scow::value_type vt) {
    std::uniform_int_distribution<std::int64_t> d(scow::min_value(vt), scow::max_value(vt));
    return static_cast<std::int32_t>(d(rng));
}

inline std::vector<std::int32_t> random_values(std::mt19937_64& rng, scow::value_type vt,
                                               std::uint64_t n) {
    std::vector<std::int32_t> out(n);
    for (auto& v : out) v = random_value(rng, vt);
    return out;
}

/// Random schema: rank 1..3, level 0..3, small chunks, logical dims that
/// exercise both exact tiling and padding.
inline scow::array_schema random_schema(std::mt19937_64& rng, scow::value_type vt,
                                        std::uint64_t max_cells = 4096) {
    for (;;) {
        const std::size_t rank = 1 + rng() % 3;
        const std::uint32_t level = static_cast<std::uint32_t>(rng() % 4);
        coords chunk(rank), logical(rank);
        for (std::size_t d = 0; d < rank; ++d) {
            const std::uint64_t unit = std::uint64_t{1} << level;
            chunk[d] = unit * (1 + rng() % (rank == 1 ? 8 : 4));
            logical[d] = 1 + rng() % (2 * chunk[d]);
        }
        scow::array_schema s = scow::make_schema(logical, chunk, level, vt);
        if (s.cell_count() <= max_cells) return s;
    }
}

inline scow::value_type random_type(std::mt19937_64& rng) {
    return static_cast<scow::value_type>(rng() % 5);
}

// ---------------------------------------------------------------------------
// oracles
// ---------------------------------------------------------------------------

/// Average-pool cascade in transform order: per level, per dimension in
/// increasing order, adjacent pairs collapse to floor((a+b)/2). Exact int64
/// arithmetic, no lifting tricks.
inline std::vector<std::int64_t> pool_synopsis_oracle(const std::vector<std::int32_t>& chunk,
                                                      const coords& chunk_dims, std::uint32_t level) {
    const std::size_t m = chunk_dims.size();
    std::vector<std::int64_t> cur(chunk.begin(), chunk.end());
    coords ext = chunk_dims;
    for (std::uint32_t l = 0; l < level; ++l) {
        for (std::size_t d = 0; d < m; ++d) {
            coords next_ext = ext;
            next_ext[d] /= 2;
            std::vector<std::int64_t> next(
                [&] { std::uint64_t n = 1; for (auto e : next_ext) n *= e; return n; }());
            scow::for_each_coord(next_ext, [&](const coords& c) {
                coords a = c, b = c;
                a[d] = 2 * c[d];
                b[d] = 2 * c[d] + 1;
                const std::int64_t sum = cur[scow::linearize(a, ext)] + cur[scow::linearize(b, ext)];
                // arithmetic shift = floor division by 2, negatives included
                next[scow::linearize(c, next_ext)] = sum >> 1;
            });
            cur = std::move(next);
            ext = next_ext;
        }
    }
    return cur;
}

/// Brute scan of a region of the padded store.
inline scow::hmmt::min_max fragment_minmax_oracle(const std::vector<std::int32_t>& padded,
                                                  const scow::array_schema& schema,
                                                  const region& frag) {
    scow::hmmt::min_max mm{INT64_MAX, INT64_MIN};
    scow::for_each_coord(frag.extents(), [&](const coords& off) {
        coords abs(off.size());
        for (std::size_t d = 0; d < off.size(); ++d) abs[d] = frag.lo[d] + off[d];
        const std::int64_t v = padded[scow::linearize(abs, schema.dims)];
        mm.min = std::min(mm.min, v);
        mm.max = std::max(mm.max, v);
    });
    return mm;
}

/// Full-decode filter oracle: every logical cell in scan order
/// (chunk, source block, cell row-major within block), region-clipped.
inline std::vector<scow::query::hit> filter_oracle(const std::vector<std::int32_t>& logical,
                                                   const scow::array_schema& schema,
                                                   const scow::query::predicate& p,
                                                   const region* r = nullptr) {
    std::vector<scow::query::hit> hits;
    const coords bd = schema.block_dims();
    const coords cbg = schema.chunk_block_grid();
    for (std::uint64_t c = 0; c < schema.chunk_count(); ++c) {
        const region cr = scow::chunk_region(schema, c);
        for (std::uint64_t b = 0; b < schema.blocks_per_chunk(); ++b) {
            const coords bc = scow::delinearize(b, cbg);
            scow::for_each_coord(bd, [&](const coords& off) {
                coords abs(off.size());
                for (std::size_t d = 0; d < off.size(); ++d)
                    abs[d] = cr.lo[d] + bc[d] * bd[d] + off[d];
                for (std::size_t d = 0; d < abs.size(); ++d)
                    if (abs[d] >= schema.logical_dims[d]) return;
                if (r)
                    for (std::size_t d = 0; d < abs.size(); ++d)
                        if (abs[d] < r->lo[d] || abs[d] >= r->hi[d]) return;
                const std::int32_t v = logical[scow::linearize(abs, schema.logical_dims)];
                if (p.matches(v)) hits.push_back({abs, v});
            });
        }
    }
    return hits;
}

/// Crop oracle for range queries.
inline std::vector<std::int32_t> crop_oracle(const std::vector<std::int32_t>& logical,
                                             const scow::array_schema& schema, const region& r) {
    std::vector<std::int32_t> out(r.cell_count());
    const coords ext = r.extents();
    scow::for_each_coord(ext, [&](const coords& off) {
        coords abs(off.size());
        for (std::size_t d = 0; d < off.size(); ++d) abs[d] = r.lo[d] + off[d];
        out[scow::linearize(off, ext)] = logical[scow::linearize(abs, schema.logical_dims)];
    });
    return out;
}

inline region random_region(std::mt19937_64& rng, const coords& logical_dims) {
    region r;
    r.lo.resize(logical_dims.size());
    r.hi.resize(logical_dims.size());
    for (std::size_t d = 0; d < logical_dims.size(); ++d) {
        const std::uint64_t a = rng() % logical_dims[d];
        const std::uint64_t b = rng() % logical_dims[d];
        r.lo[d] = std::min(a, b);
        r.hi[d] = std::max(a, b) + 1;
    }
    return r;
}

// ---------------------------------------------------------------------------
// files and processes
// ---------------------------------------------------------------------------

/// Fresh directory under /tmp, removed on destruction.
class temp_dir {
  public:
    temp_dir() {
        char tmpl[] = "/tmp/scowtest.XXXXXX";
        if (!mkdtemp(tmpl)) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~temp_dir() {
        const int rc = std::system(("rm -rf " + path_).c_str());
        (void)rc;
    }
    temp_dir(const temp_dir&) = delete;
    temp_dir& operator=(const temp_dir&) = delete;

    [[nodiscard]] std::string file(const std::string& name) const { return path_ + "/" + name; }

  private:
    std::string path_;
};

inline void write_raw(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + path);
}

inline std::vector<std::uint8_t> read_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct cli_result {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Runs the CLI binary with the given argument string; captures both streams.
inline cli_result run_cli(const temp_dir& dir, const std::string& args) {
    const std::string out_path = dir.file("cli.out");
    const std::string err_path = dir.file("cli.err");
    const std::string cmd =
        std::string(SCOW_CLI_PATH) + " " + args + " >" + out_path + " 2>" + err_path;
    const int status = std::system(cmd.c_str());
    cli_result r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

// ---------------------------------------------------------------------------
// structured fixtures
// ---------------------------------------------------------------------------

inline std::vector<std::int32_t> constant_array(std::uint64_t n, std::int32_t v) {
    return std::vector<std::int32_t>(n, v);
}

/// Smooth 2D ramp, uint8 range.
inline std::vector<std::int32_t> gradient2d(std::uint64_t h, std::uint64_t w) {
    std::vector<std::int32_t> out(h * w);
    for (std::uint64_t y = 0; y < h; ++y)
        for (std::uint64_t x = 0; x < w; ++x)
            out[y * w + x] = static_cast<std::int32_t>(((y + x) / 4) % 256);
    return out;
}

/// Mostly zero, with a random-valued square in the corner covering about
/// `percent` of the cells (spatial clustering, not salt-and-pepper).
inline std::vector<std::int32_t> clustered_sparse2d(std::mt19937_64& rng, std::uint64_t h,
                                                    std::uint64_t w, double percent,
                                                    std::int32_t lo, std::int32_t hi) {
    std::vector<std::int32_t> out(h * w, 0);
    const auto side = static_cast<std::uint64_t>(
        std::sqrt(percent / 100.0 * static_cast<double>(h) * static_cast<double>(w)));
    std::uniform_int_distribution<std::int32_t> d(lo, hi);
    for (std::uint64_t y = 0; y < std::min(side, h); ++y)
        for (std::uint64_t x = 0; x < std::min(side, w); ++x) out[y * w + x] = d(rng);
    return out;
}

inline std::vector<std::int32_t> checkerboard(std::uint64_t h, std::uint64_t w, std::int32_t a,
                                              std::int32_t b) {
    std::vector<std::int32_t> out(h * w);
    for (std::uint64_t y = 0; y < h; ++y)
        for (std::uint64_t x = 0; x < w; ++x) out[y * w + x] = ((y ^ x) & 1) ? a : b;
    return out;
}

} // namespace testsup
