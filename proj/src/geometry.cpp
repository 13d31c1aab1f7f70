#include "scow/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace scow {

region intersect(const region& a, const region& b) {
    region r;
    r.lo.resize(a.lo.size());
    r.hi.resize(a.lo.size());
    for (std::size_t d = 0; d < a.lo.size(); ++d) {
        r.lo[d] = std::max(a.lo[d], b.lo[d]);
        r.hi[d] = std::min(a.hi[d], b.hi[d]);
        if (r.hi[d] < r.lo[d]) r.hi[d] = r.lo[d];
    }
    return r;
}

// ---------------------------------------------------------------------------
// array_schema
// ---------------------------------------------------------------------------

coords array_schema::block_dims() const {
    coords b(rank());
    for (std::size_t d = 0; d < rank(); ++d) b[d] = chunk_dims[d] >> wavelet_level;
    return b;
}

coords array_schema::chunk_grid() const {
    coords g(rank());
    for (std::size_t d = 0; d < rank(); ++d) g[d] = dims[d] / chunk_dims[d];
    return g;
}

coords array_schema::chunk_block_grid() const {
    return coords(rank(), std::uint64_t{1} << wavelet_level);
}

coords array_schema::block_grid() const {
    coords g = chunk_grid();
    for (auto& e : g) e <<= wavelet_level;
    return g;
}

std::uint64_t array_schema::chunk_count() const {
    std::uint64_t n = 1;
    for (auto e : chunk_grid()) n *= e;
    return n;
}

std::uint64_t array_schema::blocks_per_chunk() const {
    return std::uint64_t{1} << (wavelet_level * rank());
}

std::uint64_t array_schema::cells_per_chunk() const {
    std::uint64_t n = 1;
    for (auto e : chunk_dims) n *= e;
    return n;
}

std::uint64_t array_schema::cells_per_block() const {
    std::uint64_t n = 1;
    for (auto e : block_dims()) n *= e;
    return n;
}

std::uint64_t array_schema::cell_count() const {
    std::uint64_t n = 1;
    for (auto e : dims) n *= e;
    return n;
}

std::uint64_t array_schema::logical_cell_count() const {
    std::uint64_t n = 1;
    for (auto e : logical_dims) n *= e;
    return n;
}

array_schema make_schema(const coords& logical_dims, const coords& chunk_dims,
                         std::uint32_t wavelet_level, value_type vt) {
    if (logical_dims.empty()) throw std::invalid_argument("scow: schema needs at least one dimension");
    if (logical_dims.size() != chunk_dims.size())
        throw std::invalid_argument("scow: chunk rank differs from array rank");
    if (wavelet_level > 30) throw std::invalid_argument("scow: wavelet level too large");
    const std::uint64_t div = std::uint64_t{1} << wavelet_level;
    array_schema s;
    s.logical_dims = logical_dims;
    s.chunk_dims = chunk_dims;
    s.wavelet_level = wavelet_level;
    s.type = vt;
    s.dims.resize(logical_dims.size());
    for (std::size_t d = 0; d < logical_dims.size(); ++d) {
        if (logical_dims[d] == 0) throw std::invalid_argument("scow: zero array extent");
        if (chunk_dims[d] == 0) throw std::invalid_argument("scow: zero chunk extent");
        if (chunk_dims[d] % div != 0)
            throw std::invalid_argument("scow: chunk extent not divisible by 2^wavelet_level");
        const std::uint64_t chunks = (logical_dims[d] + chunk_dims[d] - 1) / chunk_dims[d];
        s.dims[d] = chunks * chunk_dims[d];
    }
    return s;
}

// ---------------------------------------------------------------------------
// linear orders
// ---------------------------------------------------------------------------

std::uint64_t linearize(std::span<const std::uint64_t> c, std::span<const std::uint64_t> extents) {
    if (c.size() != extents.size()) throw std::invalid_argument("scow: coordinate rank mismatch");
    std::uint64_t idx = 0;
    for (std::size_t d = 0; d < c.size(); ++d) {
        if (c[d] >= extents[d]) throw std::invalid_argument("scow: coordinate out of range");
        idx = idx * extents[d] + c[d];
    }
    return idx;
}

coords delinearize(std::uint64_t index, std::span<const std::uint64_t> extents) {
    coords c(extents.size());
    for (std::size_t d = extents.size(); d-- > 0;) {
        c[d] = index % extents[d];
        index /= extents[d];
    }
    if (index != 0) throw std::invalid_argument("scow: linear index out of range");
    return c;
}

void for_each_coord(std::span<const std::uint64_t> extents, const std::function<void(const coords&)>& fn) {
    if (extents.empty()) return;
    for (auto e : extents)
        if (e == 0) return;
    coords c(extents.size(), 0);
    for (;;) {
        fn(c);
        bool done = true;
        for (std::size_t d = extents.size(); d-- > 0;) {
            if (++c[d] < extents[d]) {
                done = false;
                break;
            }
            c[d] = 0;
        }
        if (done) return;
    }
}

cell_location locate(std::span<const std::uint64_t> cell, const array_schema& schema) {
    if (cell.size() != schema.rank()) throw std::invalid_argument("scow: coordinate rank mismatch");
    const coords bd = schema.block_dims();
    coords chunk_c(schema.rank()), block_c(schema.rank());
    cell_location loc;
    loc.offset.resize(schema.rank());
    for (std::size_t d = 0; d < schema.rank(); ++d) {
        if (cell[d] >= schema.dims[d]) throw std::invalid_argument("scow: cell out of range");
        chunk_c[d] = cell[d] / schema.chunk_dims[d];
        const std::uint64_t in_chunk = cell[d] % schema.chunk_dims[d];
        block_c[d] = in_chunk / bd[d];
        loc.offset[d] = in_chunk % bd[d];
    }
    loc.chunk_id = linearize(chunk_c, schema.chunk_grid());
    loc.block_id = linearize(block_c, schema.chunk_block_grid());
    return loc;
}

coords cell_at(const cell_location& loc, const array_schema& schema) {
    const coords bd = schema.block_dims();
    const coords chunk_c = delinearize(loc.chunk_id, schema.chunk_grid());
    const coords block_c = delinearize(loc.block_id, schema.chunk_block_grid());
    coords cell(schema.rank());
    for (std::size_t d = 0; d < schema.rank(); ++d)
        cell[d] = chunk_c[d] * schema.chunk_dims[d] + block_c[d] * bd[d] + loc.offset[d];
    return cell;
}

// ---------------------------------------------------------------------------
// padded stores
// ---------------------------------------------------------------------------

std::vector<std::int32_t> pad_array(std::span<const std::int32_t> logical, const array_schema& schema) {
    if (logical.size() != schema.logical_cell_count())
        throw std::invalid_argument("scow: logical cell count mismatch");
    std::vector<std::int32_t> padded(schema.cell_count(), 0);
    std::uint64_t src = 0;
    for_each_coord(schema.logical_dims, [&](const coords& c) {
        padded[linearize(c, schema.dims)] = logical[src++];
    });
    return padded;
}

std::vector<std::int32_t> crop_array(std::span<const std::int32_t> padded, const array_schema& schema) {
    if (padded.size() != schema.cell_count())
        throw std::invalid_argument("scow: padded cell count mismatch");
    std::vector<std::int32_t> logical(schema.logical_cell_count());
    std::uint64_t dst = 0;
    for_each_coord(schema.logical_dims, [&](const coords& c) {
        logical[dst++] = padded[linearize(c, schema.dims)];
    });
    return logical;
}

std::vector<std::int32_t> extract_chunk(std::span<const std::int32_t> padded,
                                        const array_schema& schema, std::uint64_t chunk_id) {
    const region r = chunk_region(schema, chunk_id);
    std::vector<std::int32_t> out(schema.cells_per_chunk());
    std::uint64_t dst = 0;
    for_each_coord(schema.chunk_dims, [&](const coords& c) {
        coords abs(c.size());
        for (std::size_t d = 0; d < c.size(); ++d) abs[d] = r.lo[d] + c[d];
        out[dst++] = padded[linearize(abs, schema.dims)];
    });
    return out;
}

void scatter_chunk(std::span<const std::int32_t> chunk_cells, std::span<std::int32_t> padded,
                   const array_schema& schema, std::uint64_t chunk_id) {
    const region r = chunk_region(schema, chunk_id);
    std::uint64_t src = 0;
    for_each_coord(schema.chunk_dims, [&](const coords& c) {
        coords abs(c.size());
        for (std::size_t d = 0; d < c.size(); ++d) abs[d] = r.lo[d] + c[d];
        padded[linearize(abs, schema.dims)] = chunk_cells[src++];
    });
}

region chunk_region(const array_schema& schema, std::uint64_t chunk_id) {
    const coords c = delinearize(chunk_id, schema.chunk_grid());
    region r;
    r.lo.resize(schema.rank());
    r.hi.resize(schema.rank());
    for (std::size_t d = 0; d < schema.rank(); ++d) {
        r.lo[d] = c[d] * schema.chunk_dims[d];
        r.hi[d] = r.lo[d] + schema.chunk_dims[d];
    }
    return r;
}

} // namespace scow
