#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scow/geometry.hpp"
#include "scow/hmmt.hpp"

// Per-chunk block packer. Every block of a transformed chunk is packed in
// sign-magnitude at its real width R; the header stores only the 7-bit
// difference between R and the width both sides estimate from the decoded
// min-max tree bounds, so the widths themselves never hit the stream.
//
// Chunk stream layout, bit-packed MSB first:
//   1. per block, in block id order: 7-bit two's-complement delta
//      (estimated width - real width)
//   2. per entropy-coded block, in block id order: 32-bit payload bit length
//      (plain payloads need none: their length is width * cells)
//   3. payloads in block id order, the synopsis block first by construction
//   4. zero padding to a byte boundary
//
// A block is entropy coded (RLE + Huffman over its cell sequence) when the
// option is on and its real width has a table. All-zero blocks take real
// width 0 and an empty payload.

namespace scow::codec {

struct options {
    bool bit_reduction = true;
};

/// Exact packed width of a block: max significant-bit position + 1 sign bit,
/// 0 for an all-zero block.
[[nodiscard]] unsigned r_real(std::span<const std::int32_t> cells);

/// Estimated width of the synopsis block from its node's decoded bounds.
[[nodiscard]] unsigned r_est_synopsis(const hmmt::node_bounds& b);

/// Estimated width of a detail block: the synopsis estimate of its node
/// minus the block's wavelet level, floored at 0 (detail magnitudes shrink
/// roughly twofold per level).
[[nodiscard]] unsigned r_est_detail(const hmmt::node_bounds& b, std::uint32_t level);

/// Estimated widths for every block of one chunk, in block id order.
[[nodiscard]] std::vector<unsigned> estimate_widths(const array_schema& schema,
                                                    std::uint64_t chunk_id,
                                                    const hmmt::topology& topo,
                                                    const hmmt::decoded_bounds& bounds);

/// Stream geometry of one encoded chunk, derived from the header fields and
/// the estimated widths. Parsing needs the delta region and (when entropy
/// coding is on) the length region to be present in the given bytes; the
/// payload region may be absent or truncated.
struct chunk_layout {
    std::vector<unsigned> real_width;        // per block
    std::vector<std::uint8_t> entropy_coded; // per block
    std::vector<std::uint64_t> payload_bits; // per block
    std::vector<std::uint64_t> payload_off;  // absolute bit offset per block
    std::uint64_t header_bits = 0;

    [[nodiscard]] std::uint64_t total_bits() const;
    /// Bytes that must be present to decode blocks 0..block_id.
    [[nodiscard]] std::uint64_t prefix_bytes(std::uint64_t block_id) const;
};

/// Bytes needed before the entropy-coded block count is known: the delta
/// region alone.
[[nodiscard]] std::uint64_t delta_region_bytes(const array_schema& schema);

/// Bytes spanning the delta and length regions, given bytes covering at
/// least the delta region.
[[nodiscard]] std::uint64_t header_region_bytes(std::span<const std::uint8_t> bytes,
                                                const array_schema& schema,
                                                std::uint64_t chunk_id, const hmmt::topology& topo,
                                                const hmmt::decoded_bounds& bounds, options opt);

[[nodiscard]] chunk_layout parse_layout(std::span<const std::uint8_t> bytes,
                                        const array_schema& schema, std::uint64_t chunk_id,
                                        const hmmt::topology& topo,
                                        const hmmt::decoded_bounds& bounds, options opt);

/// Packs one transformed chunk (row-major over chunk_dims).
[[nodiscard]] std::vector<std::uint8_t> encode_chunk(std::span<const std::int32_t> transformed,
                                                     const array_schema& schema,
                                                     std::uint64_t chunk_id,
                                                     const hmmt::topology& topo,
                                                     const hmmt::decoded_bounds& bounds,
                                                     options opt);

/// Full inverse of encode_chunk. Rejects byte counts that disagree with the
/// decoded layout.
[[nodiscard]] std::vector<std::int32_t> decode_chunk(std::span<const std::uint8_t> bytes,
                                                     const array_schema& schema,
                                                     std::uint64_t chunk_id,
                                                     const hmmt::topology& topo,
                                                     const hmmt::decoded_bounds& bounds,
                                                     options opt);

/// Decodes only the listed blocks into an otherwise zeroed chunk buffer.
/// `bytes` may be a prefix of the chunk stream as long as it covers the
/// header and every requested payload.
[[nodiscard]] std::vector<std::int32_t> decode_blocks(std::span<const std::uint8_t> bytes,
                                                      const array_schema& schema,
                                                      std::uint64_t chunk_id,
                                                      const hmmt::topology& topo,
                                                      const hmmt::decoded_bounds& bounds,
                                                      options opt,
                                                      std::span<const std::uint64_t> block_ids);

} // namespace scow::codec
