#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scow/bitstream.hpp"

// Optional entropy stage for packed blocks: run-length encoding followed by
// a static canonical Huffman code. One table exists per packed width R; its
// symbol probabilities come from a zero-mean normal, so the tables are fixed
// at build time and shared by every array. A coded run is the symbol's
// codeword followed by the run length as an Elias gamma code.

namespace scow::bitred {

/// Widths that have a Huffman table. Wider blocks stay plainly packed: their
/// alphabets (2^R - 1 symbols) would be impractically large and their tails
/// carry almost no probability mass anyway.
constexpr unsigned min_coded_width = 2;
constexpr unsigned max_coded_width = 18;

[[nodiscard]] constexpr bool codable_width(unsigned r) {
    return r >= min_coded_width && r <= max_coded_width;
}

/// Standard deviation of the symbol model for width r.
[[nodiscard]] double sigma_for_width(unsigned r);

struct huffman_table {
    unsigned width = 0;                 // packed width R; symbols cover [-(2^(R-1)-1), 2^(R-1)-1]
    std::vector<std::uint8_t> lengths;  // code length per symbol, indexed by symbol + 2^(R-1) - 1
    std::vector<std::uint64_t> codes;   // canonical codeword per symbol, MSB-first

    [[nodiscard]] std::int64_t min_symbol() const { return -max_symbol(); }
    [[nodiscard]] std::int64_t max_symbol() const {
        return (std::int64_t{1} << (width - 1)) - 1;
    }
    [[nodiscard]] std::size_t index_of(std::int64_t symbol) const {
        return static_cast<std::size_t>(symbol - min_symbol());
    }

    void write_symbol(bit_writer& out, std::int64_t symbol) const;
    [[nodiscard]] std::int64_t read_symbol(bit_reader& in) const;

  private:
    friend const huffman_table& table_for(unsigned r);
    [[nodiscard]] static huffman_table build(unsigned r);
    // canonical decode tables, one entry per code length 1..max
    std::vector<std::uint64_t> first_code_;
    std::vector<std::uint32_t> first_index_;
    std::vector<std::uint32_t> count_;
    std::vector<std::uint32_t> symbol_order_; // symbol indices sorted by (length, symbol)
};

/// Shared table for width r, built on first use; safe for concurrent calls.
[[nodiscard]] const huffman_table& table_for(unsigned r);

/// Elias gamma code for n >= 1: bit_width(n)-1 zeros, then n itself.
void write_gamma(bit_writer& out, std::uint64_t n);
[[nodiscard]] std::uint64_t read_gamma(bit_reader& in);

struct run {
    std::int32_t symbol = 0;
    std::uint64_t count = 0;
};

/// Maximal runs, in input order; concatenating the expanded runs restores
/// the input exactly.
[[nodiscard]] std::vector<run> rle_encode(std::span<const std::int32_t> symbols);
[[nodiscard]] std::vector<std::int32_t> rle_decode(std::span<const run> runs);

/// RLE + Huffman for one block's cells at packed width r.
void encode_block(bit_writer& out, std::span<const std::int32_t> cells, unsigned r);

/// Reads exactly cell_count cells; throws format_error if runs overshoot.
[[nodiscard]] std::vector<std::int32_t> decode_block(bit_reader& in, std::uint64_t cell_count,
                                                     unsigned r);

} // namespace scow::bitred
