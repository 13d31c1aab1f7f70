#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scow/geometry.hpp"
#include "scow/hmmt.hpp"

// Reversible integer wavelet transform on one chunk. The pair step is the
// integer Haar (S-transform): approx = floor((a+b)/2), detail = a - b, which
// is exactly invertible. Each level splits every dimension of the current
// low-pass region in two, dimension 0 first; after `level` passes the
// approximation corner has block extent and is the chunk's synopsis.

namespace scow::wavelet {

/// In-place forward transform of a row-major chunk buffer.
void forward_chunk(std::span<std::int32_t> cells, const array_schema& schema);

/// In-place inverse; inverse_chunk(forward_chunk(x)) == x.
void inverse_chunk(std::span<std::int32_t> cells, const array_schema& schema);

/// Copy of the approximation corner (extent block_dims). Each value is a
/// floor-accumulated mean of its 2^level-per-dim source region and stays
/// within that region's [min, max].
[[nodiscard]] std::vector<std::int32_t> synopsis_of(std::span<const std::int32_t> transformed,
                                                    const array_schema& schema);

/// Wavelet level of a transformed block: 0 for the synopsis block, otherwise
/// in [1, level]. Level l detail blocks hold differences of means over
/// 2^l-per-dim source regions.
[[nodiscard]] std::uint32_t block_level(const array_schema& schema, std::uint64_t block_id);

/// The min-max tree node whose fragment is the source region a transformed
/// block summarizes: the synopsis block maps to the chunk's node, a level-l
/// detail block at subband-local coords p maps to the node covering p scaled
/// by 2^l block extents.
[[nodiscard]] std::uint64_t node_for_block(const hmmt::topology& topo, const array_schema& schema,
                                           std::uint64_t chunk_id, std::uint64_t block_id);

/// Transformed blocks one chunk must decode so the inverse transform (with
/// every other block zeroed) reproduces the given source region exactly:
/// the synopsis block plus, per level and detail orientation, the blocks
/// covering every source block the region touches. Sorted ascending.
/// The region is in absolute coordinates; throws std::invalid_argument when
/// it misses the chunk.
[[nodiscard]] std::vector<std::uint64_t> blocks_for_region(const array_schema& schema,
                                                           std::uint64_t chunk_id, const region& r);

} // namespace scow::wavelet
