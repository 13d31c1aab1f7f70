#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "scow/types.hpp"

namespace scow {

using coords = std::vector<std::uint64_t>;

/// Half-open axis-aligned box: cells with lo[d] <= c[d] < hi[d].
struct region {
    coords lo;
    coords hi;

    [[nodiscard]] bool empty() const {
        for (std::size_t d = 0; d < lo.size(); ++d)
            if (lo[d] >= hi[d]) return true;
        return lo.empty();
    }

    [[nodiscard]] std::uint64_t cell_count() const {
        if (empty()) return 0;
        std::uint64_t n = 1;
        for (std::size_t d = 0; d < lo.size(); ++d) n *= hi[d] - lo[d];
        return n;
    }

    [[nodiscard]] coords extents() const {
        coords e(lo.size());
        for (std::size_t d = 0; d < lo.size(); ++d) e[d] = hi[d] > lo[d] ? hi[d] - lo[d] : 0;
        return e;
    }
};

[[nodiscard]] region intersect(const region& a, const region& b);

// ---------------------------------------------------------------------------
// array schema
// ---------------------------------------------------------------------------

/// Geometry of one stored array. `dims` is `logical_dims` rounded up to whole
/// chunks; pad cells are zero and excluded from query results. Every chunk
/// splits into 2^level blocks per dimension, so chunk_dims[d] must be
/// divisible by 2^level.
struct array_schema {
    coords logical_dims;
    coords dims;
    coords chunk_dims;
    std::uint32_t wavelet_level = 0;
    value_type type = value_type::uint8;

    [[nodiscard]] std::size_t rank() const { return dims.size(); }

    /// Block extent: chunk_dims[d] >> wavelet_level.
    [[nodiscard]] coords block_dims() const;

    /// Chunks per dimension.
    [[nodiscard]] coords chunk_grid() const;

    /// Blocks per dimension inside one chunk (2^wavelet_level each).
    [[nodiscard]] coords chunk_block_grid() const;

    /// Blocks per dimension across the whole padded array.
    [[nodiscard]] coords block_grid() const;

    [[nodiscard]] std::uint64_t chunk_count() const;
    [[nodiscard]] std::uint64_t blocks_per_chunk() const;
    [[nodiscard]] std::uint64_t cells_per_chunk() const;
    [[nodiscard]] std::uint64_t cells_per_block() const;
    [[nodiscard]] std::uint64_t cell_count() const;
    [[nodiscard]] std::uint64_t logical_cell_count() const;

    [[nodiscard]] region logical_region() const { return {coords(rank(), 0), logical_dims}; }
};

/// Validates and derives the padded schema. Throws std::invalid_argument on
/// empty dims, zero extents, or chunk dims not divisible by 2^level.
[[nodiscard]] array_schema make_schema(const coords& logical_dims, const coords& chunk_dims,
                                       std::uint32_t wavelet_level, value_type vt);

// ---------------------------------------------------------------------------
// linear orders
// ---------------------------------------------------------------------------

/// Row-major linear index; the last dimension varies fastest.
[[nodiscard]] std::uint64_t linearize(std::span<const std::uint64_t> c,
                                      std::span<const std::uint64_t> extents);

[[nodiscard]] coords delinearize(std::uint64_t index, std::span<const std::uint64_t> extents);

/// Visits every coordinate of the box [0, extents) in row-major order.
void for_each_coord(std::span<const std::uint64_t> extents, const std::function<void(const coords&)>& fn);

/// Placement of a cell: owning chunk, block within the chunk, and the cell's
/// coordinates inside the block. All three follow the row-major order above.
struct cell_location {
    std::uint64_t chunk_id = 0;
    std::uint64_t block_id = 0;
    coords offset;
};

[[nodiscard]] cell_location locate(std::span<const std::uint64_t> cell, const array_schema& schema);

/// Inverse of locate(); used to map hits back to absolute coordinates.
[[nodiscard]] coords cell_at(const cell_location& loc, const array_schema& schema);

// ---------------------------------------------------------------------------
// padded stores
// ---------------------------------------------------------------------------

/// Logical row-major cells -> padded row-major cells (pad cells zero).
[[nodiscard]] std::vector<std::int32_t> pad_array(std::span<const std::int32_t> logical,
                                                  const array_schema& schema);

/// Padded row-major cells -> logical row-major cells.
[[nodiscard]] std::vector<std::int32_t> crop_array(std::span<const std::int32_t> padded,
                                                   const array_schema& schema);

/// Copies one chunk out of the padded store (row-major over chunk_dims).
[[nodiscard]] std::vector<std::int32_t> extract_chunk(std::span<const std::int32_t> padded,
                                                      const array_schema& schema, std::uint64_t chunk_id);

/// Writes one chunk back into the padded store.
void scatter_chunk(std::span<const std::int32_t> chunk_cells, std::span<std::int32_t> padded,
                   const array_schema& schema, std::uint64_t chunk_id);

/// Cell region covered by a chunk, in absolute (padded) coordinates.
[[nodiscard]] region chunk_region(const array_schema& schema, std::uint64_t chunk_id);

} // namespace scow
