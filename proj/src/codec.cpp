#include "scow/codec.hpp"

#include <algorithm>

#include "scow/bitreduction.hpp"
#include "scow/bitstream.hpp"
#include "scow/wavelet.hpp"

namespace scow::codec {

namespace {

constexpr unsigned max_width = 33; // 32-bit magnitude + sign

[[nodiscard]] std::uint64_t abs64(std::int64_t v) {
    return v < 0 ? static_cast<std::uint64_t>(-(v + 1)) + 1 : static_cast<std::uint64_t>(v);
}

[[nodiscard]] bool coded(unsigned r, options opt) {
    return opt.bit_reduction && bitred::codable_width(r);
}

// cells of one block, block-local row-major
std::vector<std::int32_t> gather_block(std::span<const std::int32_t> chunk,
                                       const array_schema& schema, std::uint64_t block_id) {
    const coords bd = schema.block_dims();
    const coords base = delinearize(block_id, schema.chunk_block_grid());
    std::vector<std::int32_t> out(schema.cells_per_block());
    std::uint64_t i = 0;
    for_each_coord(bd, [&](const coords& c) {
        coords abs(c.size());
        for (std::size_t d = 0; d < c.size(); ++d) abs[d] = base[d] * bd[d] + c[d];
        out[i++] = chunk[linearize(abs, schema.chunk_dims)];
    });
    return out;
}

void scatter_block(std::span<const std::int32_t> cells, std::span<std::int32_t> chunk,
                   const array_schema& schema, std::uint64_t block_id) {
    const coords bd = schema.block_dims();
    const coords base = delinearize(block_id, schema.chunk_block_grid());
    std::uint64_t i = 0;
    for_each_coord(bd, [&](const coords& c) {
        coords abs(c.size());
        for (std::size_t d = 0; d < c.size(); ++d) abs[d] = base[d] * bd[d] + c[d];
        chunk[linearize(abs, schema.chunk_dims)] = cells[i++];
    });
}

} // namespace

unsigned r_real(std::span<const std::int32_t> cells) {
    std::uint32_t all = 0;
    for (std::int32_t v : cells) all |= static_cast<std::uint32_t>(abs64(v));
    return all == 0 ? 0 : static_cast<unsigned>(hmmt::sig_bit_pos(1, all)) + 1;
}

unsigned r_est_synopsis(const hmmt::node_bounds& b) {
    const int bits = std::max(hmmt::sig_bit_pos(1, abs64(b.lower)),
                              hmmt::sig_bit_pos(1, abs64(b.upper)));
    return static_cast<unsigned>(bits) + 1;
}

unsigned r_est_detail(const hmmt::node_bounds& b, std::uint32_t level) {
    const int est = static_cast<int>(r_est_synopsis(b)) - static_cast<int>(level);
    return est < 0 ? 0 : static_cast<unsigned>(est);
}

std::vector<unsigned> estimate_widths(const array_schema& schema, std::uint64_t chunk_id,
                                      const hmmt::topology& topo,
                                      const hmmt::decoded_bounds& bounds) {
    const std::uint64_t nb = schema.blocks_per_chunk();
    std::vector<unsigned> est(nb);
    for (std::uint64_t b = 0; b < nb; ++b) {
        const hmmt::node_bounds& nb_ = bounds.at(wavelet::node_for_block(topo, schema, chunk_id, b));
        const std::uint32_t level = wavelet::block_level(schema, b);
        est[b] = level == 0 ? r_est_synopsis(nb_) : r_est_detail(nb_, level);
    }
    return est;
}

std::uint64_t chunk_layout::total_bits() const {
    return payload_off.empty() ? header_bits : payload_off.back() + payload_bits.back();
}

std::uint64_t chunk_layout::prefix_bytes(std::uint64_t block_id) const {
    return (payload_off[block_id] + payload_bits[block_id] + 7) / 8;
}

std::uint64_t delta_region_bytes(const array_schema& schema) {
    return (7 * schema.blocks_per_chunk() + 7) / 8;
}

namespace {

// delta region -> real widths; needs 7 bits per block present
std::vector<unsigned> parse_real_widths(std::span<const std::uint8_t> bytes,
                                        const array_schema& schema, std::uint64_t chunk_id,
                                        const hmmt::topology& topo,
                                        const hmmt::decoded_bounds& bounds) {
    const std::vector<unsigned> est = estimate_widths(schema, chunk_id, topo, bounds);
    bit_reader in(bytes);
    std::vector<unsigned> real(est.size());
    for (std::size_t b = 0; b < est.size(); ++b) {
        const std::uint64_t raw = in.read_unsigned(7);
        const int delta = static_cast<int>(raw) - ((raw & 0x40u) ? 128 : 0);
        const int r = static_cast<int>(est[b]) - delta;
        if (r < 0 || r > static_cast<int>(max_width))
            throw format_error("block width delta out of range");
        real[b] = static_cast<unsigned>(r);
    }
    return real;
}

} // namespace

std::uint64_t header_region_bytes(std::span<const std::uint8_t> bytes, const array_schema& schema,
                                  std::uint64_t chunk_id, const hmmt::topology& topo,
                                  const hmmt::decoded_bounds& bounds, options opt) {
    const std::vector<unsigned> real = parse_real_widths(bytes, schema, chunk_id, topo, bounds);
    std::uint64_t bits = 7 * real.size();
    for (unsigned r : real)
        if (coded(r, opt)) bits += 32;
    return (bits + 7) / 8;
}

chunk_layout parse_layout(std::span<const std::uint8_t> bytes, const array_schema& schema,
                          std::uint64_t chunk_id, const hmmt::topology& topo,
                          const hmmt::decoded_bounds& bounds, options opt) {
    chunk_layout lay;
    lay.real_width = parse_real_widths(bytes, schema, chunk_id, topo, bounds);
    const std::uint64_t nb = lay.real_width.size();
    const std::uint64_t cells = schema.cells_per_block();

    lay.entropy_coded.assign(nb, 0);
    lay.payload_bits.assign(nb, 0);
    lay.payload_off.assign(nb, 0);
    lay.header_bits = 7 * nb;
    for (std::uint64_t b = 0; b < nb; ++b)
        if (coded(lay.real_width[b], opt)) {
            lay.entropy_coded[b] = 1;
            lay.header_bits += 32;
        }

    bit_reader in(bytes);
    in.seek(7 * nb);
    for (std::uint64_t b = 0; b < nb; ++b)
        lay.payload_bits[b] = lay.entropy_coded[b] ? in.read_unsigned(32)
                                                   : lay.real_width[b] * cells;
    std::uint64_t off = lay.header_bits;
    for (std::uint64_t b = 0; b < nb; ++b) {
        lay.payload_off[b] = off;
        off += lay.payload_bits[b];
    }
    return lay;
}

std::vector<std::uint8_t> encode_chunk(std::span<const std::int32_t> transformed,
                                       const array_schema& schema, std::uint64_t chunk_id,
                                       const hmmt::topology& topo,
                                       const hmmt::decoded_bounds& bounds, options opt) {
    if (transformed.size() != schema.cells_per_chunk())
        throw std::invalid_argument("scow: chunk buffer size mismatch");
    const std::vector<unsigned> est = estimate_widths(schema, chunk_id, topo, bounds);
    const std::uint64_t nb = schema.blocks_per_chunk();

    std::vector<unsigned> real(nb);
    std::vector<std::vector<std::uint8_t>> payload(nb);
    std::vector<std::uint64_t> payload_bits(nb, 0);
    for (std::uint64_t b = 0; b < nb; ++b) {
        const std::vector<std::int32_t> cells = gather_block(transformed, schema, b);
        real[b] = r_real(cells);
        if (real[b] == 0) continue;
        bit_writer w;
        if (coded(real[b], opt)) {
            bitred::encode_block(w, cells, real[b]);
        } else {
            for (std::int32_t v : cells) w.write_sign_magnitude(v, real[b]);
        }
        payload_bits[b] = w.bit_count();
        payload[b] = w.take();
    }

    bit_writer out;
    for (std::uint64_t b = 0; b < nb; ++b) {
        const int delta = static_cast<int>(est[b]) - static_cast<int>(real[b]);
        if (delta < -64 || delta > 63) throw std::logic_error("scow: width delta overflows header");
        out.write_unsigned(static_cast<std::uint64_t>(delta & 0x7F), 7);
    }
    for (std::uint64_t b = 0; b < nb; ++b)
        if (coded(real[b], opt)) {
            if (payload_bits[b] >> 32)
                throw std::logic_error("scow: entropy payload length overflows header");
            out.write_unsigned(payload_bits[b], 32);
        }
    for (std::uint64_t b = 0; b < nb; ++b) append_bits(out, payload[b], payload_bits[b]);
    return out.take();
}

namespace {

std::vector<std::int32_t> decode_one(std::span<const std::uint8_t> bytes, const chunk_layout& lay,
                                     std::uint64_t cells, std::uint64_t b) {
    if (lay.prefix_bytes(b) > bytes.size()) throw format_error("chunk bytes truncated");
    if (lay.real_width[b] == 0) return std::vector<std::int32_t>(cells, 0);
    bit_reader in(bytes);
    in.seek(lay.payload_off[b]);
    std::vector<std::int32_t> out;
    if (lay.entropy_coded[b]) {
        out = bitred::decode_block(in, cells, lay.real_width[b]);
        if (in.bit_pos() != lay.payload_off[b] + lay.payload_bits[b])
            throw format_error("entropy payload length mismatch");
    } else {
        out.resize(cells);
        for (std::uint64_t i = 0; i < cells; ++i)
            out[i] = static_cast<std::int32_t>(in.read_sign_magnitude(lay.real_width[b]));
    }
    return out;
}

} // namespace

std::vector<std::int32_t> decode_blocks(std::span<const std::uint8_t> bytes,
                                        const array_schema& schema, std::uint64_t chunk_id,
                                        const hmmt::topology& topo,
                                        const hmmt::decoded_bounds& bounds, options opt,
                                        std::span<const std::uint64_t> block_ids) {
    const chunk_layout lay = parse_layout(bytes, schema, chunk_id, topo, bounds, opt);
    std::vector<std::int32_t> chunk(schema.cells_per_chunk(), 0);
    const std::uint64_t cells = schema.cells_per_block();
    for (std::uint64_t b : block_ids) {
        if (b >= lay.real_width.size()) throw std::invalid_argument("scow: block id out of range");
        scatter_block(decode_one(bytes, lay, cells, b), chunk, schema, b);
    }
    return chunk;
}

std::vector<std::int32_t> decode_chunk(std::span<const std::uint8_t> bytes,
                                       const array_schema& schema, std::uint64_t chunk_id,
                                       const hmmt::topology& topo,
                                       const hmmt::decoded_bounds& bounds, options opt) {
    const chunk_layout lay = parse_layout(bytes, schema, chunk_id, topo, bounds, opt);
    if ((lay.total_bits() + 7) / 8 != bytes.size())
        throw format_error("chunk byte count disagrees with layout");
    std::vector<std::int32_t> chunk(schema.cells_per_chunk(), 0);
    const std::uint64_t cells = schema.cells_per_block();
    for (std::uint64_t b = 0; b < lay.real_width.size(); ++b)
        scatter_block(decode_one(bytes, lay, cells, b), chunk, schema, b);
    return chunk;
}

} // namespace scow::codec
