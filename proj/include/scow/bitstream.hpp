#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scow/types.hpp"

// Width-stated bit packing shared by the tree coder, the block packer and the
// entropy coder. Fields are written most-significant bit first, bytes fill
// from bit 7 down to bit 0, and the only zero padding allowed is the final
// flush to a byte boundary. Negative values use sign-and-magnitude: one sign
// bit (1 = negative) followed by width-1 magnitude bits; minus zero is never
// emitted.

namespace scow {

class bit_writer {
  public:
    /// Sets the field width for subsequent write() calls. 0 <= w <= 64.
    void set_width(unsigned w) {
        if (w > 64) throw std::invalid_argument("scow: bit width > 64");
        width_ = w;
    }

    [[nodiscard]] unsigned width() const { return width_; }

    /// Writes `v` in the current width. Requires v < 2^width.
    void write(std::uint64_t v) { write_unsigned(v, width_); }

    void write_unsigned(std::uint64_t v, unsigned w) {
        if (w > 64) throw std::invalid_argument("scow: bit width > 64");
        if (w < 64 && (v >> w) != 0)
            throw std::invalid_argument("scow: value does not fit bit width");
        for (unsigned i = w; i-- > 0;) put_bit((v >> i) & 1u);
    }

    /// One sign bit then w-1 magnitude bits. Requires |v| < 2^(w-1), w >= 1.
    void write_sign_magnitude(std::int64_t v, unsigned w) {
        if (w == 0) throw std::invalid_argument("scow: sign-magnitude width 0");
        const bool neg = v < 0;
        const std::uint64_t mag = neg ? static_cast<std::uint64_t>(-(v + 1)) + 1
                                      : static_cast<std::uint64_t>(v);
        put_bit(neg && mag != 0 ? 1u : 0u);
        write_unsigned(mag, w - 1);
    }

    [[nodiscard]] std::uint64_t bit_count() const { return bits_; }

    /// Returns the buffer; a trailing partial byte is already zero-padded.
    [[nodiscard]] std::vector<std::uint8_t> take() {
        std::vector<std::uint8_t> out = std::move(bytes_);
        bytes_.clear();
        bits_ = 0;
        cursor_ = 0;
        return out;
    }

  private:
    void put_bit(unsigned bit) {
        if (cursor_ == 0) {
            bytes_.push_back(0);
            cursor_ = 8;
        }
        --cursor_;
        if (bit) bytes_.back() |= static_cast<std::uint8_t>(1u << cursor_);
        ++bits_;
    }

    std::vector<std::uint8_t> bytes_;
    std::uint64_t bits_ = 0;
    unsigned cursor_ = 0; // free bits remaining in bytes_.back()
    unsigned width_ = 0;
};

class bit_reader {
  public:
    bit_reader() = default;
    explicit bit_reader(std::span<const std::uint8_t> data) : data_(data) {}

    void set_width(unsigned w) {
        if (w > 64) throw format_error("bit width > 64");
        width_ = w;
    }

    [[nodiscard]] unsigned width() const { return width_; }

    [[nodiscard]] std::uint64_t read() { return read_unsigned(width_); }

    [[nodiscard]] std::uint64_t read_unsigned(unsigned w) {
        if (w > 64) throw format_error("bit width > 64");
        std::uint64_t v = 0;
        for (unsigned i = 0; i < w; ++i) v = (v << 1) | get_bit();
        return v;
    }

    [[nodiscard]] std::int64_t read_sign_magnitude(unsigned w) {
        if (w == 0) throw format_error("sign-magnitude width 0");
        const unsigned sign = get_bit();
        const std::uint64_t mag = read_unsigned(w - 1);
        if (sign && mag == 0) throw format_error("minus zero in sign-magnitude field");
        return sign ? -static_cast<std::int64_t>(mag) : static_cast<std::int64_t>(mag);
    }

    [[nodiscard]] std::uint64_t bit_pos() const { return pos_; }
    [[nodiscard]] std::uint64_t bit_size() const { return data_.size() * 8ull; }
    [[nodiscard]] bool exhausted() const { return pos_ >= bit_size(); }

    void seek(std::uint64_t bit) {
        if (bit > bit_size()) throw format_error("seek past end of bit stream");
        pos_ = bit;
    }

  private:
    unsigned get_bit() {
        if (pos_ >= bit_size()) throw format_error("read past end of bit stream");
        const std::uint8_t byte = data_[pos_ >> 3];
        const unsigned bit = (byte >> (7 - (pos_ & 7))) & 1u;
        ++pos_;
        return bit;
    }

    std::span<const std::uint8_t> data_;
    std::uint64_t pos_ = 0;
    unsigned width_ = 0;
};

/// Appends the first `bit_count` bits of `bytes` to `dst`, ignoring the
/// source's byte padding. Lets separately assembled payloads be concatenated
/// without byte alignment between them.
inline void append_bits(bit_writer& dst, std::span<const std::uint8_t> bytes,
                        std::uint64_t bit_count) {
    bit_reader src(bytes);
    while (bit_count >= 64) {
        dst.write_unsigned(src.read_unsigned(64), 64);
        bit_count -= 64;
    }
    if (bit_count > 0) dst.write_unsigned(src.read_unsigned(static_cast<unsigned>(bit_count)),
                                          static_cast<unsigned>(bit_count));
}

} // namespace scow
