#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "scow/container.hpp"
#include "scow/geometry.hpp"
#include "scow/hmmt.hpp"

// Query processing over a container: value predicates (filter), rectangular
// slices (range), and their combination. The decoded min-max tree prunes at
// two grains before any chunk I/O happens: whole chunks via the chunk-level
// nodes, then source blocks via the leaves. Surviving blocks decide which
// transformed blocks each chunk actually decodes.

namespace scow::query {

enum class cmp_op { lt, le, gt, ge };

struct predicate {
    enum class kind { equals, in_range, compare };

    kind k = kind::equals;
    std::int64_t a = 0; // equals/compare value, or range low
    std::int64_t b = 0; // range high (inclusive)
    cmp_op op = cmp_op::lt;

    [[nodiscard]] static predicate equals(std::int64_t v) { return {kind::equals, v, v, cmp_op::lt}; }
    [[nodiscard]] static predicate in_range(std::int64_t lo, std::int64_t hi);
    [[nodiscard]] static predicate compare(cmp_op op, std::int64_t v) {
        return {kind::compare, v, v, op};
    }

    [[nodiscard]] bool matches(std::int64_t v) const;
};

/// True iff some value in [b.lower, b.upper] could satisfy p; never false
/// when the fragment holds a match, provided the bounds are sound.
[[nodiscard]] bool evaluate_node(const hmmt::node_bounds& b, const predicate& p);

/// Output of the tree walk: per-chunk and per-(chunk, source block) flags.
struct chunk_block_bitmap {
    std::vector<std::uint8_t> chunk_flags;
    std::vector<std::uint8_t> block_flags; // chunk-major: chunk * blocks_per_chunk + block
    std::uint64_t chunks_marked = 0;
    std::uint64_t blocks_marked = 0;

    [[nodiscard]] bool block(std::uint64_t chunk, std::uint64_t blocks_per_chunk,
                             std::uint64_t block) const {
        return block_flags[chunk * blocks_per_chunk + block] != 0;
    }
};

/// Breadth-first walk from the root, descending only through satisfying
/// nodes; marks chunks at the chunk level and source blocks at the leaves
/// (one combined pass when the levels coincide).
[[nodiscard]] chunk_block_bitmap candidate_bitmap(const array_schema& schema,
                                                  const hmmt::topology& topo,
                                                  const hmmt::decoded_bounds& bounds,
                                                  const predicate& p);

/// Operator chain scan -> range_select -> filter with the chunk set each
/// operator needs. Inspection fills the per-operator sets bottom-up, then
/// propagation intersects them top-down, so the scan touches only chunks
/// every operator can use.
struct query_plan {
    std::vector<std::uint8_t> scan_chunks;
    std::vector<std::uint8_t> range_chunks;  // present when a region is given
    std::vector<std::uint8_t> filter_chunks; // present when a predicate is given
    std::vector<std::uint8_t> final_chunks;  // intersection the scan executes
    [[nodiscard]] std::uint64_t chunk_count() const;
};

[[nodiscard]] query_plan plan(const array_schema& schema, const hmmt::topology& topo,
                              const hmmt::decoded_bounds& bounds,
                              const std::optional<region>& r, const std::optional<predicate>& p);

struct hit {
    coords where;
    std::int32_t value = 0;
};

struct stats {
    std::uint64_t chunks_read = 0;
    std::uint64_t blocks_decoded = 0;
    std::uint64_t bytes_read = 0;
};

struct filter_result {
    std::vector<hit> hits; // (chunk, source block, cell row-major) order
    stats io;
};

struct range_result {
    region r;
    std::vector<std::int32_t> cells; // row-major over r's extents
    stats io;
};

[[nodiscard]] filter_result filter(const container::reader& src, const predicate& p,
                                   unsigned threads = 1);

[[nodiscard]] range_result range(const container::reader& src, const region& r,
                                 unsigned threads = 1);

[[nodiscard]] filter_result range_filter(const container::reader& src, const region& r,
                                         const predicate& p, unsigned threads = 1);

} // namespace scow::query
