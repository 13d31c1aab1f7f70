#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace scow {

/// Raised when a container or bit stream is malformed or inconsistent.
class format_error : public std::runtime_error {
  public:
    explicit format_error(const std::string& msg) : std::runtime_error("scow: " + msg) {}
};

/// Raised on file system failures.
class io_error : public std::runtime_error {
  public:
    explicit io_error(const std::string& msg) : std::runtime_error("scow: " + msg) {}
};

// ---------------------------------------------------------------------------
// cell value types
// ---------------------------------------------------------------------------

/// Element types storable in a container. Cells are widened to int32 for all
/// in-memory processing; the container records the declared type so raw
/// import/export round-trips byte for byte.
enum class value_type : std::uint8_t {
    uint8 = 0,
    int8 = 1,
    uint16 = 2,
    int16 = 3,
    int32 = 4,
};

[[nodiscard]] constexpr std::size_t size_of(value_type vt) noexcept {
    switch (vt) {
    case value_type::uint8:
    case value_type::int8: return 1;
    case value_type::uint16:
    case value_type::int16: return 2;
    case value_type::int32: return 4;
    }
    return 0;
}

[[nodiscard]] constexpr bool is_signed(value_type vt) noexcept {
    return vt == value_type::int8 || vt == value_type::int16 || vt == value_type::int32;
}

[[nodiscard]] constexpr std::int64_t min_value(value_type vt) noexcept {
    switch (vt) {
    case value_type::uint8:
    case value_type::uint16: return 0;
    case value_type::int8: return -128;
    case value_type::int16: return -32768;
    case value_type::int32: return INT32_MIN;
    }
    return 0;
}

[[nodiscard]] constexpr std::int64_t max_value(value_type vt) noexcept {
    switch (vt) {
    case value_type::uint8: return 255;
    case value_type::int8: return 127;
    case value_type::uint16: return 65535;
    case value_type::int16: return 32767;
    case value_type::int32: return INT32_MAX;
    }
    return 0;
}

[[nodiscard]] std::string name_of(value_type vt);

/// Parses "uint8" | "int8" | "uint16" | "int16" | "int32".
[[nodiscard]] value_type parse_value_type(const std::string& name);

[[nodiscard]] value_type value_type_from_code(std::uint8_t code);

// ---------------------------------------------------------------------------
// raw cell buffers
// ---------------------------------------------------------------------------

/// Widens a little-endian raw buffer of `vt` cells to int32.
/// The buffer size must be a whole number of cells.
[[nodiscard]] std::vector<std::int32_t> load_cells(std::span<const std::uint8_t> raw, value_type vt);

/// Narrows int32 cells back to the little-endian raw encoding of `vt`.
/// Values outside the type's range signal corruption.
[[nodiscard]] std::vector<std::uint8_t> store_cells(std::span<const std::int32_t> cells, value_type vt);

} // namespace scow
