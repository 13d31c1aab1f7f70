#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scow/geometry.hpp"

// Hierarchical min-max tree. Leaves hold the exact min/max of one block of
// the source array; each level up groups two neighbours per dimension. When
// any dimension runs out of pairs the remaining nodes merge straight into the
// root. The compressed form keeps the root exact and stores every other node
// as a drift of its significant-bit positions, so decoding yields sound,
// conservative bounds rather than the exact values.

namespace scow::hmmt {

/// Position (1-indexed from the least significant end) of the n-th most
/// significant set bit of x; 0 when x has fewer than n set bits.
[[nodiscard]] int sig_bit_pos(int n, std::uint64_t x);

/// sign(v) * sig_bit_pos(n, |v|), with sign(v) = 1 for v >= 0.
[[nodiscard]] int signed_sig_bit(int n, std::int64_t v);

// ---------------------------------------------------------------------------
// tree shape
// ---------------------------------------------------------------------------

struct topology {
    std::size_t m = 0;
    /// Node grid per level; index 0 is the root level, the last index is the
    /// block (leaf) level.
    std::vector<coords> level_grids;
    std::uint32_t level_chunk = 0;
    std::uint32_t level_block = 0;
    /// True when the root adopts every node of level 1 instead of the usual
    /// 2-per-dimension grouping (happens once a dimension is down to one node).
    bool gather_root = false;
    std::vector<std::uint64_t> level_offsets;
    std::uint64_t total_nodes = 0;
    coords block_dims;
    coords dims;

    [[nodiscard]] std::uint32_t level_count() const { return static_cast<std::uint32_t>(level_grids.size()); }
    [[nodiscard]] std::uint64_t level_size(std::uint32_t level) const;
    [[nodiscard]] std::uint32_t level_of(std::uint64_t node) const;
    [[nodiscard]] coords coords_of(std::uint64_t node) const;
    [[nodiscard]] std::uint64_t node_id(std::uint32_t level, const coords& c) const;
    [[nodiscard]] std::uint64_t parent(std::uint64_t node) const;
    [[nodiscard]] std::vector<std::uint64_t> children(std::uint64_t node) const;
    /// Source cells covered by the node, clipped to the padded array.
    [[nodiscard]] region fragment(std::uint64_t node) const;
};

[[nodiscard]] topology make_topology(const array_schema& schema);

// ---------------------------------------------------------------------------
// exact tree
// ---------------------------------------------------------------------------

struct min_max {
    std::int64_t min = 0;
    std::int64_t max = 0;
};

struct exact_tree {
    topology topo;
    std::vector<min_max> nodes; // indexed by node id
};

/// Scans the padded array and fills every node bottom-up.
[[nodiscard]] exact_tree build(std::span<const std::int32_t> padded, const array_schema& schema);

// ---------------------------------------------------------------------------
// compressed form
// ---------------------------------------------------------------------------

/// Breadth-first significant-bit encoding. The root is exact at the declared
/// cell width; other nodes store either unsigned position deltas against the
/// parent (same bit order) or fresh positions (order advanced). A node whose
/// min and max share the current significant bit also emits the shared bit
/// run ("jump") plus a 1 marker so the decoder can lock those bits for the
/// whole subtree.
[[nodiscard]] std::vector<std::uint8_t> compress(const exact_tree& tree, value_type vt);

struct node_bounds {
    std::int64_t lower = 0;
    std::int64_t upper = 0;
};

struct decoded_bounds {
    std::vector<node_bounds> nodes; // indexed by node id

    [[nodiscard]] const node_bounds& at(std::uint64_t node) const { return nodes[node]; }
};

/// Replays the encoder schedule and returns conservative bounds for every
/// node: lower <= exact min <= exact max <= upper. Nodes the encoder skipped
/// inherit their ancestor's interval. Throws format_error when the stream
/// desynchronizes.
[[nodiscard]] decoded_bounds decompress(std::span<const std::uint8_t> bits, const topology& topo,
                                        value_type vt);

} // namespace scow::hmmt
