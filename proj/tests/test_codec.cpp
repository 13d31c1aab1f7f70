#include <doctest.h>

#include <numeric>

#include "scow/codec.hpp"
#include "scow/wavelet.hpp"
#include "support.hpp"

using scow::coords;
namespace codec = scow::codec;
namespace hmmt = scow::hmmt;

namespace {

struct pipeline {
    scow::array_schema schema;
    hmmt::topology topo;
    hmmt::decoded_bounds bounds;
    std::vector<std::int32_t> padded;

    pipeline(const std::vector<std::int32_t>& logical, const scow::array_schema& s) : schema(s) {
        padded = scow::pad_array(logical, s);
        const hmmt::exact_tree tree = hmmt::build(padded, s);
        topo = tree.topo;
        bounds = hmmt::decompress(hmmt::compress(tree, s.type), topo, s.type);
    }

    [[nodiscard]] std::vector<std::int32_t> transformed(std::uint64_t chunk_id) const {
        std::vector<std::int32_t> cells = scow::extract_chunk(padded, schema, chunk_id);
        scow::wavelet::forward_chunk(cells, schema);
        return cells;
    }
};

} // namespace

TEST_CASE("exact packed widths") {
    CHECK(codec::r_real(std::vector<std::int32_t>{0, 0, 0, 0}) == 0);
    CHECK(codec::r_real(std::vector<std::int32_t>{100, 102}) == 8);
    CHECK(codec::r_real(std::vector<std::int32_t>{-32}) == 7);
    CHECK(codec::r_real(std::vector<std::int32_t>{1}) == 2);
    CHECK(codec::r_real(std::vector<std::int32_t>{INT32_MIN}) == 33);
}

TEST_CASE("estimated widths from node bounds") {
    CHECK(codec::r_est_synopsis({100, 102}) == 8);
    CHECK(codec::r_est_synopsis({0, 0}) == 1);
    CHECK(codec::r_est_synopsis({-63, 127}) == 8);
    CHECK(codec::r_est_detail({-32, 102}, 2) == 6);
    CHECK(codec::r_est_detail({0, 0}, 1) == 0);
    CHECK(codec::r_est_detail({0, 0}, 3) == 0);
    CHECK(codec::r_est_detail({-1, 1}, 3) == 0);
}

TEST_CASE("chunk round trip, all types, both entropy options") {
    auto rng = testsup::make_rng(51);
    for (int i = 0; i < 120; ++i) {
        const scow::value_type vt = testsup::random_type(rng);
        const scow::array_schema s = testsup::random_schema(rng, vt, 2048);
        const std::vector<std::int32_t> logical =
            testsup::random_values(rng, vt, s.logical_cell_count());
        const pipeline p(logical, s);

        for (bool bit_reduction : {false, true}) {
            const codec::options opt{bit_reduction};
            for (std::uint64_t c = 0; c < s.chunk_count(); ++c) {
                const std::vector<std::int32_t> cells = p.transformed(c);
                const std::vector<std::uint8_t> bytes =
                    codec::encode_chunk(cells, s, c, p.topo, p.bounds, opt);
                CHECK(codec::decode_chunk(bytes, s, c, p.topo, p.bounds, opt) == cells);
            }
        }
    }
}

TEST_CASE("entropy coding changes bytes, never values") {
    auto rng = testsup::make_rng(52);
    const scow::array_schema s =
        scow::make_schema(coords{32, 32}, coords{16, 16}, 2, scow::value_type::uint8);
    const pipeline p(testsup::random_values(rng, scow::value_type::uint8, 1024), s);

    for (std::uint64_t c = 0; c < s.chunk_count(); ++c) {
        const std::vector<std::int32_t> cells = p.transformed(c);
        const auto plain = codec::encode_chunk(cells, s, c, p.topo, p.bounds, {false});
        const auto coded = codec::encode_chunk(cells, s, c, p.topo, p.bounds, {true});
        CHECK(codec::decode_chunk(plain, s, c, p.topo, p.bounds, {false}) ==
              codec::decode_chunk(coded, s, c, p.topo, p.bounds, {true}));
    }
}

TEST_CASE("all-zero chunk packs to width headers only") {
    const scow::array_schema s =
        scow::make_schema(coords{8, 8}, coords{8, 8}, 2, scow::value_type::uint8);
    const pipeline p(testsup::constant_array(64, 0), s);
    const std::vector<std::int32_t> cells = p.transformed(0);

    const std::vector<std::uint8_t> bytes =
        codec::encode_chunk(cells, s, 0, p.topo, p.bounds, {true});
    CHECK(bytes.size() == (7 * 16 + 7) / 8); // sixteen 7-bit deltas, nothing else

    const codec::chunk_layout layout = codec::parse_layout(bytes, s, 0, p.topo, p.bounds, {true});
    for (std::uint64_t b = 0; b < 16; ++b) {
        CHECK(layout.real_width[b] == 0);
        CHECK(layout.payload_bits[b] == 0);
        CHECK_FALSE(layout.entropy_coded[b]);
    }
    CHECK(codec::decode_chunk(bytes, s, 0, p.topo, p.bounds, {true}) == cells);
}

TEST_CASE("synopsis width matches its estimate when bounds are exact") {
    // one chunk, so the chunk node is the exact root: bounds [100, 102],
    // synopsis cells within [100, 102], both width formulas give 8
    auto rng = testsup::make_rng(53);
    const scow::array_schema s =
        scow::make_schema(coords{4, 4}, coords{4, 4}, 1, scow::value_type::uint8);
    std::vector<std::int32_t> logical(16);
    for (auto& v : logical) v = 100 + static_cast<std::int32_t>(rng() % 3);
    logical[0] = 100;
    logical[1] = 102;
    const pipeline p(logical, s);

    CHECK(p.bounds.at(0).lower == 100);
    CHECK(p.bounds.at(0).upper == 102);
    CHECK(codec::estimate_widths(s, 0, p.topo, p.bounds)[0] == 8);

    const std::vector<std::int32_t> cells = p.transformed(0);
    const std::vector<std::uint8_t> bytes =
        codec::encode_chunk(cells, s, 0, p.topo, p.bounds, {false});
    const codec::chunk_layout layout = codec::parse_layout(bytes, s, 0, p.topo, p.bounds, {false});
    CHECK(layout.real_width[0] == 8); // delta 0
}

TEST_CASE("plain payload size is exactly sum of widths times cells") {
    auto rng = testsup::make_rng(54);
    const scow::array_schema s =
        scow::make_schema(coords{64, 64}, coords{64, 64}, 3, scow::value_type::uint8);
    const pipeline p(testsup::random_values(rng, scow::value_type::uint8, 4096), s);
    const std::vector<std::int32_t> cells = p.transformed(0);

    const std::vector<std::uint8_t> bytes =
        codec::encode_chunk(cells, s, 0, p.topo, p.bounds, {false});
    const codec::chunk_layout layout = codec::parse_layout(bytes, s, 0, p.topo, p.bounds, {false});

    std::uint64_t payload = 0;
    for (std::uint64_t b = 0; b < s.blocks_per_chunk(); ++b) {
        CHECK(layout.payload_bits[b] == layout.real_width[b] * s.cells_per_block());
        payload += layout.payload_bits[b];
    }
    CHECK(layout.header_bits == 7 * s.blocks_per_chunk());
    // width headers stay under 2% of payload for dense random chunks
    CHECK(static_cast<double>(layout.header_bits) < 0.02 * static_cast<double>(payload));
}

TEST_CASE("decoding a prefix serves the synopsis block alone") {
    auto rng = testsup::make_rng(55);
    const scow::array_schema s =
        scow::make_schema(coords{16, 16}, coords{16, 16}, 2, scow::value_type::int16);
    const pipeline p(testsup::random_values(rng, scow::value_type::int16, 256), s);
    const std::vector<std::int32_t> cells = p.transformed(0);

    for (bool bit_reduction : {false, true}) {
        const codec::options opt{bit_reduction};
        std::vector<std::uint8_t> bytes = codec::encode_chunk(cells, s, 0, p.topo, p.bounds, opt);
        const codec::chunk_layout layout = codec::parse_layout(bytes, s, 0, p.topo, p.bounds, opt);

        const std::vector<std::uint64_t> all = [&] {
            std::vector<std::uint64_t> ids(s.blocks_per_chunk());
            std::iota(ids.begin(), ids.end(), 0);
            return ids;
        }();
        CHECK(codec::decode_blocks(bytes, s, 0, p.topo, p.bounds, opt, all) == cells);

        bytes.resize(layout.prefix_bytes(0));
        const std::vector<std::int32_t> partial =
            codec::decode_blocks(bytes, s, 0, p.topo, p.bounds, opt, std::vector<std::uint64_t>{0});
        const coords bd = s.block_dims();
        scow::for_each_coord(bd, [&](const coords& c) {
            CHECK(partial[scow::linearize(c, s.chunk_dims)] ==
                  cells[scow::linearize(c, s.chunk_dims)]);
        });
        CHECK_THROWS_AS((void)codec::decode_blocks(bytes, s, 0, p.topo, p.bounds, opt,
                                                   std::vector<std::uint64_t>{1}),
                        scow::format_error);
    }
}

TEST_CASE("byte counts must agree with the decoded layout") {
    auto rng = testsup::make_rng(56);
    const scow::array_schema s =
        scow::make_schema(coords{8, 8}, coords{8, 8}, 1, scow::value_type::uint8);
    const pipeline p(testsup::random_values(rng, scow::value_type::uint8, 64), s);
    const std::vector<std::int32_t> cells = p.transformed(0);
    const std::vector<std::uint8_t> bytes =
        codec::encode_chunk(cells, s, 0, p.topo, p.bounds, {true});

    std::vector<std::uint8_t> longer = bytes;
    longer.push_back(0);
    CHECK_THROWS_AS((void)codec::decode_chunk(longer, s, 0, p.topo, p.bounds, {true}),
                    scow::format_error);

    std::vector<std::uint8_t> shorter = bytes;
    shorter.pop_back();
    CHECK_THROWS_AS((void)codec::decode_chunk(shorter, s, 0, p.topo, p.bounds, {true}),
                    scow::format_error);
}

TEST_CASE("corrupted width deltas are rejected, not misread") {
    // 4x4-cell blocks: any width change shifts the stream by at least 16
    // bits, far past byte padding slack, so every delta mutation is caught
    auto rng = testsup::make_rng(57);
    const scow::array_schema s =
        scow::make_schema(coords{8, 8}, coords{8, 8}, 1, scow::value_type::uint8);
    const pipeline p(testsup::random_values(rng, scow::value_type::uint8, 64), s);
    const std::vector<std::int32_t> cells = p.transformed(0);
    const std::vector<std::uint8_t> bytes =
        codec::encode_chunk(cells, s, 0, p.topo, p.bounds, {false});

    const std::uint64_t delta_bits = 7 * s.blocks_per_chunk();
    for (std::uint64_t bit = 0; bit < delta_bits; ++bit) {
        std::vector<std::uint8_t> bad = bytes;
        bad[bit / 8] ^= static_cast<std::uint8_t>(0x80 >> (bit % 8));
        CHECK_THROWS_AS((void)codec::decode_chunk(bad, s, 0, p.topo, p.bounds, {false}),
                        scow::format_error);
    }
}
