#include "scow/query.hpp"

#include <algorithm>
#include <atomic>

#include "scow/codec.hpp"
#include "scow/thread_pool.hpp"
#include "scow/wavelet.hpp"

namespace scow::query {

predicate predicate::in_range(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw std::invalid_argument("scow: empty value range");
    return {kind::in_range, lo, hi, cmp_op::lt};
}

bool predicate::matches(std::int64_t v) const {
    switch (k) {
    case kind::equals: return v == a;
    case kind::in_range: return a <= v && v <= b;
    case kind::compare:
        switch (op) {
        case cmp_op::lt: return v < a;
        case cmp_op::le: return v <= a;
        case cmp_op::gt: return v > a;
        case cmp_op::ge: return v >= a;
        }
    }
    return false;
}

bool evaluate_node(const hmmt::node_bounds& b, const predicate& p) {
    switch (p.k) {
    case predicate::kind::equals: return b.lower <= p.a && p.a <= b.upper;
    case predicate::kind::in_range: return b.lower <= p.b && p.a <= b.upper;
    case predicate::kind::compare:
        switch (p.op) {
        case cmp_op::lt: return b.lower < p.a;
        case cmp_op::le: return b.lower <= p.a;
        case cmp_op::gt: return b.upper > p.a;
        case cmp_op::ge: return b.upper >= p.a;
        }
    }
    return false;
}

chunk_block_bitmap candidate_bitmap(const array_schema& schema, const hmmt::topology& topo,
                                    const hmmt::decoded_bounds& bounds, const predicate& p) {
    chunk_block_bitmap m;
    m.chunk_flags.assign(schema.chunk_count(), 0);
    m.block_flags.assign(schema.chunk_count() * schema.blocks_per_chunk(), 0);
    const coords chunk_grid = schema.chunk_grid();
    const coords cbg = schema.chunk_block_grid();
    const std::uint64_t bpc = schema.blocks_per_chunk();

    std::vector<std::uint64_t> queue{0};
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const std::uint64_t node = queue[head];
        const bool sat = evaluate_node(bounds.at(node), p);
        const std::uint32_t level = topo.level_of(node);
        if (level == topo.level_chunk && sat) {
            m.chunk_flags[linearize(topo.coords_of(node), chunk_grid)] = 1;
            ++m.chunks_marked;
        }
        if (level == topo.level_block && sat) {
            const coords b = topo.coords_of(node);
            coords in_chunk(b.size()), of_chunk(b.size());
            for (std::size_t d = 0; d < b.size(); ++d) {
                of_chunk[d] = b[d] / cbg[d];
                in_chunk[d] = b[d] % cbg[d];
            }
            m.block_flags[linearize(of_chunk, chunk_grid) * bpc + linearize(in_chunk, cbg)] = 1;
            ++m.blocks_marked;
        }
        if (sat && level < topo.level_block)
            for (std::uint64_t c : topo.children(node)) queue.push_back(c);
    }
    return m;
}

namespace {

[[nodiscard]] std::vector<std::uint8_t> chunks_touching(const array_schema& schema,
                                                        const region& r) {
    std::vector<std::uint8_t> flags(schema.chunk_count(), 0);
    for (std::uint64_t c = 0; c < flags.size(); ++c)
        flags[c] = intersect(r, chunk_region(schema, c)).empty() ? 0 : 1;
    return flags;
}

void check_region(const array_schema& schema, const region& r) {
    if (r.lo.size() != schema.rank() || r.hi.size() != schema.rank())
        throw std::invalid_argument("scow: region rank mismatch");
    if (r.empty()) throw std::invalid_argument("scow: empty region");
    for (std::size_t d = 0; d < r.lo.size(); ++d)
        if (r.hi[d] > schema.logical_dims[d])
            throw std::invalid_argument("scow: region outside the array");
}

[[nodiscard]] region block_abs_region(const array_schema& schema, std::uint64_t chunk_id,
                                      std::uint64_t block_id) {
    const coords corner = chunk_region(schema, chunk_id).lo;
    const coords bd = schema.block_dims();
    const coords b = delinearize(block_id, schema.chunk_block_grid());
    region out;
    out.lo.resize(b.size());
    out.hi.resize(b.size());
    for (std::size_t d = 0; d < b.size(); ++d) {
        out.lo[d] = corner[d] + b[d] * bd[d];
        out.hi[d] = out.lo[d] + bd[d];
    }
    return out;
}

} // namespace

std::uint64_t query_plan::chunk_count() const {
    return static_cast<std::uint64_t>(std::count(final_chunks.begin(), final_chunks.end(), 1));
}

query_plan plan(const array_schema& schema, const hmmt::topology& topo,
                const hmmt::decoded_bounds& bounds, const std::optional<region>& r,
                const std::optional<predicate>& p) {
    query_plan q;
    q.scan_chunks.assign(schema.chunk_count(), 1);
    if (r) {
        check_region(schema, *r);
        q.range_chunks = chunks_touching(schema, *r);
    }
    if (p) q.filter_chunks = candidate_bitmap(schema, topo, bounds, *p).chunk_flags;

    q.final_chunks = q.scan_chunks;
    for (std::uint64_t c = 0; c < q.final_chunks.size(); ++c) {
        if (!q.range_chunks.empty()) q.final_chunks[c] &= q.range_chunks[c];
        if (!q.filter_chunks.empty()) q.final_chunks[c] &= q.filter_chunks[c];
    }
    return q;
}

namespace {

filter_result run_filter(const container::reader& src, const std::optional<region>& r,
                         const predicate& p, unsigned threads) {
    const array_schema& schema = src.schema();
    const region effective = r.value_or(schema.logical_region());
    const query_plan q = plan(schema, src.topology(), src.bounds(), r, p);
    const chunk_block_bitmap marks = candidate_bitmap(schema, src.topology(), src.bounds(), p);
    const std::uint64_t bpc = schema.blocks_per_chunk();

    const std::uint64_t base_bytes = src.bytes_read();
    const std::uint64_t base_chunks = src.chunks_read();
    std::atomic<std::uint64_t> blocks_decoded{0};
    std::vector<std::vector<hit>> slots(schema.chunk_count());

    parallel_for(schema.chunk_count(), threads, [&](std::uint64_t c) {
        if (!q.final_chunks[c]) return;

        std::vector<std::uint64_t> wanted; // marked source blocks touching the region
        for (std::uint64_t b = 0; b < bpc; ++b)
            if (marks.block(c, bpc, b) && !intersect(effective, block_abs_region(schema, c, b)).empty())
                wanted.push_back(b);
        if (wanted.empty()) return;

        std::vector<std::uint64_t> need;
        for (std::uint64_t b : wanted) {
            const region scope = intersect(effective, block_abs_region(schema, c, b));
            const std::vector<std::uint64_t> ids = wavelet::blocks_for_region(schema, c, scope);
            need.insert(need.end(), ids.begin(), ids.end());
        }
        std::sort(need.begin(), need.end());
        need.erase(std::unique(need.begin(), need.end()), need.end());

        const std::vector<std::uint8_t> bytes = src.read_chunk(c);
        std::vector<std::int32_t> cells = codec::decode_blocks(bytes, schema, c, src.topology(),
                                                               src.bounds(), src.options(), need);
        wavelet::inverse_chunk(cells, schema);
        blocks_decoded.fetch_add(need.size());

        const coords corner = chunk_region(schema, c).lo;
        std::vector<hit>& out = slots[c];
        for (std::uint64_t b : wanted) {
            const region scope = intersect(effective, block_abs_region(schema, c, b));
            for_each_coord(scope.extents(), [&](const coords& off) {
                coords abs(off.size()), local(off.size());
                for (std::size_t d = 0; d < off.size(); ++d) {
                    abs[d] = scope.lo[d] + off[d];
                    local[d] = abs[d] - corner[d];
                }
                const std::int32_t v = cells[linearize(local, schema.chunk_dims)];
                if (p.matches(v)) out.push_back({std::move(abs), v});
            });
        }
    });

    filter_result res;
    for (std::vector<hit>& s : slots)
        res.hits.insert(res.hits.end(), std::make_move_iterator(s.begin()),
                        std::make_move_iterator(s.end()));
    res.io.chunks_read = src.chunks_read() - base_chunks;
    res.io.bytes_read = src.bytes_read() - base_bytes;
    res.io.blocks_decoded = blocks_decoded.load();
    return res;
}

} // namespace

filter_result filter(const container::reader& src, const predicate& p, unsigned threads) {
    return run_filter(src, std::nullopt, p, threads);
}

filter_result range_filter(const container::reader& src, const region& r, const predicate& p,
                           unsigned threads) {
    return run_filter(src, r, p, threads);
}

range_result range(const container::reader& src, const region& r, unsigned threads) {
    const array_schema& schema = src.schema();
    const query_plan q = plan(schema, src.topology(), src.bounds(), r, std::nullopt);

    const std::uint64_t base_bytes = src.bytes_read();
    const std::uint64_t base_chunks = src.chunks_read();
    std::atomic<std::uint64_t> blocks_decoded{0};

    range_result res;
    res.r = r;
    const coords ext = res.r.extents();
    res.cells.assign(res.r.cell_count(), 0);

    parallel_for(schema.chunk_count(), threads, [&](std::uint64_t c) {
        if (!q.final_chunks[c]) return;
        const region scope = intersect(r, chunk_region(schema, c));
        const std::vector<std::uint64_t> need = wavelet::blocks_for_region(schema, c, scope);

        const std::vector<std::uint8_t> bytes = src.read_chunk(c);
        std::vector<std::int32_t> cells = codec::decode_blocks(bytes, schema, c, src.topology(),
                                                               src.bounds(), src.options(), need);
        wavelet::inverse_chunk(cells, schema);
        blocks_decoded.fetch_add(need.size());

        const coords corner = chunk_region(schema, c).lo;
        for_each_coord(scope.extents(), [&](const coords& off) {
            coords rel(off.size()), local(off.size());
            for (std::size_t d = 0; d < off.size(); ++d) {
                rel[d] = scope.lo[d] + off[d] - r.lo[d];
                local[d] = scope.lo[d] + off[d] - corner[d];
            }
            res.cells[linearize(rel, ext)] = cells[linearize(local, schema.chunk_dims)];
        });
    });

    res.io.chunks_read = src.chunks_read() - base_chunks;
    res.io.bytes_read = src.bytes_read() - base_bytes;
    res.io.blocks_decoded = blocks_decoded.load();
    return res;
}

} // namespace scow::query
