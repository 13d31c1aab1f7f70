#include "scow/wavelet.hpp"

#include <algorithm>
#include <bit>

namespace scow::wavelet {

namespace {

// One separable level over the region [0, ext) of the chunk buffer. Lines
// run along dim d with the full-chunk stride; pairs (2i, 2i+1) become
// approx at i and detail at ext[d]/2 + i. All arithmetic wraps mod 2^32,
// which keeps the step bijective even at the int32 extremes.
void split_lines(std::span<std::int32_t> cells, const coords& chunk, const coords& ext,
                 std::size_t d, bool forward) {
    std::uint64_t stride = 1;
    for (std::size_t k = chunk.size(); k-- > d + 1;) stride *= chunk[k];
    const std::uint64_t n = ext[d];
    const std::uint64_t half = n / 2;
    std::vector<std::uint32_t> line(n);

    coords walk = ext;
    walk[d] = 1;
    for_each_coord(walk, [&](const coords& c) {
        const std::uint64_t base = linearize(c, chunk);
        for (std::uint64_t i = 0; i < n; ++i)
            line[i] = static_cast<std::uint32_t>(cells[base + i * stride]);
        if (forward) {
            for (std::uint64_t i = 0; i < half; ++i) {
                const std::uint32_t a = line[2 * i];
                const std::uint32_t b = line[2 * i + 1];
                const std::int32_t detail = static_cast<std::int32_t>(a - b);
                const std::uint32_t approx = b + static_cast<std::uint32_t>(detail >> 1);
                cells[base + i * stride] = static_cast<std::int32_t>(approx);
                cells[base + (half + i) * stride] = detail;
            }
        } else {
            for (std::uint64_t i = 0; i < half; ++i) {
                const std::uint32_t approx = line[i];
                const std::int32_t detail = static_cast<std::int32_t>(line[half + i]);
                const std::uint32_t b = approx - static_cast<std::uint32_t>(detail >> 1);
                const std::uint32_t a = b + static_cast<std::uint32_t>(detail);
                cells[base + 2 * i * stride] = static_cast<std::int32_t>(a);
                cells[base + (2 * i + 1) * stride] = static_cast<std::int32_t>(b);
            }
        }
    });
}

} // namespace

void forward_chunk(std::span<std::int32_t> cells, const array_schema& schema) {
    if (cells.size() != schema.cells_per_chunk())
        throw std::invalid_argument("scow: chunk buffer size mismatch");
    const std::size_t m = schema.rank();
    for (std::uint32_t level = 1; level <= schema.wavelet_level; ++level) {
        coords ext(m);
        for (std::size_t d = 0; d < m; ++d) ext[d] = schema.chunk_dims[d] >> (level - 1);
        for (std::size_t d = 0; d < m; ++d) split_lines(cells, schema.chunk_dims, ext, d, true);
    }
}

void inverse_chunk(std::span<std::int32_t> cells, const array_schema& schema) {
    if (cells.size() != schema.cells_per_chunk())
        throw std::invalid_argument("scow: chunk buffer size mismatch");
    const std::size_t m = schema.rank();
    for (std::uint32_t level = schema.wavelet_level; level >= 1; --level) {
        coords ext(m);
        for (std::size_t d = 0; d < m; ++d) ext[d] = schema.chunk_dims[d] >> (level - 1);
        for (std::size_t d = m; d-- > 0;) split_lines(cells, schema.chunk_dims, ext, d, false);
    }
}

std::vector<std::int32_t> synopsis_of(std::span<const std::int32_t> transformed,
                                      const array_schema& schema) {
    const coords bd = schema.block_dims();
    std::vector<std::int32_t> out(schema.cells_per_block());
    std::uint64_t i = 0;
    for_each_coord(bd, [&](const coords& c) { out[i++] = transformed[linearize(c, schema.chunk_dims)]; });
    return out;
}

std::uint32_t block_level(const array_schema& schema, std::uint64_t block_id) {
    const coords b = delinearize(block_id, schema.chunk_block_grid());
    std::uint32_t octave = 0;
    for (auto e : b) octave = std::max(octave, static_cast<std::uint32_t>(std::bit_width(e)));
    return octave == 0 ? 0 : schema.wavelet_level - octave + 1;
}

std::uint64_t node_for_block(const hmmt::topology& topo, const array_schema& schema,
                             std::uint64_t chunk_id, std::uint64_t block_id) {
    const coords chunk = delinearize(chunk_id, schema.chunk_grid());
    const coords b = delinearize(block_id, schema.chunk_block_grid());
    const std::size_t m = schema.rank();

    std::uint32_t octave = 0;
    for (auto e : b) octave = std::max(octave, static_cast<std::uint32_t>(std::bit_width(e)));
    if (octave == 0) return topo.node_id(topo.level_chunk, chunk); // synopsis

    const std::uint32_t level = schema.wavelet_level - octave + 1;
    coords node(m);
    for (std::size_t d = 0; d < m; ++d) {
        const std::uint64_t orient_bit = std::uint64_t{1} << (octave - 1);
        const std::uint64_t local = b[d] >= orient_bit ? b[d] - orient_bit : b[d];
        node[d] = (chunk[d] << (schema.wavelet_level - level)) + local;
    }
    return topo.node_id(topo.level_block - level, node);
}

std::vector<std::uint64_t> blocks_for_region(const array_schema& schema, std::uint64_t chunk_id,
                                             const region& r) {
    const region clipped = intersect(r, chunk_region(schema, chunk_id));
    if (clipped.empty()) throw std::invalid_argument("scow: region does not touch chunk");

    const std::size_t m = schema.rank();
    const coords bd = schema.block_dims();
    const coords grid = schema.chunk_block_grid();
    const coords corner = chunk_region(schema, chunk_id).lo;

    // source blocks the region touches, in chunk-local block coordinates
    coords blo(m), bhi(m);
    for (std::size_t d = 0; d < m; ++d) {
        blo[d] = (clipped.lo[d] - corner[d]) / bd[d];
        bhi[d] = (clipped.hi[d] - corner[d] + bd[d] - 1) / bd[d];
    }

    std::vector<std::uint64_t> out{0};
    const std::uint32_t L = schema.wavelet_level;
    for (std::uint32_t level = 1; level <= L; ++level) {
        coords lo(m), ext(m);
        for (std::size_t d = 0; d < m; ++d) {
            lo[d] = blo[d] >> level;
            ext[d] = ((bhi[d] - 1) >> level) + 1 - lo[d];
        }
        coords orient(m, 0);
        for (std::uint64_t o = 1; o < (std::uint64_t{1} << m); ++o) {
            for (std::size_t d = 0; d < m; ++d)
                orient[d] = ((o >> (m - 1 - d)) & 1) << (L - level);
            for_each_coord(ext, [&](const coords& c) {
                coords block(m);
                for (std::size_t d = 0; d < m; ++d) block[d] = orient[d] + lo[d] + c[d];
                out.push_back(linearize(block, grid));
            });
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace scow::wavelet
