#include "scow/types.hpp"

#include <cstring>

namespace scow {

std::string name_of(value_type vt) {
    switch (vt) {
    case value_type::uint8: return "uint8";
    case value_type::int8: return "int8";
    case value_type::uint16: return "uint16";
    case value_type::int16: return "int16";
    case value_type::int32: return "int32";
    }
    return "?";
}

value_type parse_value_type(const std::string& name) {
    if (name == "uint8") return value_type::uint8;
    if (name == "int8") return value_type::int8;
    if (name == "uint16") return value_type::uint16;
    if (name == "int16") return value_type::int16;
    if (name == "int32") return value_type::int32;
    throw std::invalid_argument("scow: unknown value type '" + name + "'");
}

value_type value_type_from_code(std::uint8_t code) {
    if (code > 4) throw format_error("unknown value type code " + std::to_string(code));
    return static_cast<value_type>(code);
}

namespace {

template <typename T> std::vector<std::int32_t> widen(std::span<const std::uint8_t> raw) {
    std::vector<std::int32_t> out(raw.size() / sizeof(T));
    for (std::size_t i = 0; i < out.size(); ++i) {
        T v;
        std::memcpy(&v, raw.data() + i * sizeof(T), sizeof(T));
        out[i] = static_cast<std::int32_t>(v);
    }
    return out;
}

template <typename T> std::vector<std::uint8_t> narrow(std::span<const std::int32_t> cells, value_type vt) {
    std::vector<std::uint8_t> out(cells.size() * sizeof(T));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const std::int64_t v = cells[i];
        if (v < min_value(vt) || v > max_value(vt))
            throw format_error("cell value out of range for " + name_of(vt));
        const T t = static_cast<T>(v);
        std::memcpy(out.data() + i * sizeof(T), &t, sizeof(T));
    }
    return out;
}

} // namespace

std::vector<std::int32_t> load_cells(std::span<const std::uint8_t> raw, value_type vt) {
    if (raw.size() % size_of(vt) != 0)
        throw format_error("raw buffer is not a whole number of " + name_of(vt) + " cells");
    switch (vt) {
    case value_type::uint8: return widen<std::uint8_t>(raw);
    case value_type::int8: return widen<std::int8_t>(raw);
    case value_type::uint16: return widen<std::uint16_t>(raw);
    case value_type::int16: return widen<std::int16_t>(raw);
    case value_type::int32: return widen<std::int32_t>(raw);
    }
    throw std::invalid_argument("scow: bad value type");
}

std::vector<std::uint8_t> store_cells(std::span<const std::int32_t> cells, value_type vt) {
    switch (vt) {
    case value_type::uint8: return narrow<std::uint8_t>(cells, vt);
    case value_type::int8: return narrow<std::int8_t>(cells, vt);
    case value_type::uint16: return narrow<std::uint16_t>(cells, vt);
    case value_type::int16: return narrow<std::int16_t>(cells, vt);
    case value_type::int32: return narrow<std::int32_t>(cells, vt);
    }
    throw std::invalid_argument("scow: bad value type");
}

} // namespace scow
