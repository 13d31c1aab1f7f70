#include "scow/bitreduction.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <mutex>
#include <queue>

namespace scow::bitred {

double sigma_for_width(unsigned r) {
    if (r == 7) return 17.4;
    if (r == 8) return 35.7;
    return std::ldexp(17.4, static_cast<int>(r) - 7);
}

namespace {

// erf by its Maclaurin series with a fixed operation order, so the weights
// below are identical on every IEEE-754 platform regardless of libm. The
// arguments stay below 2.7 in magnitude (|symbol| <= ~3.7 sigma), where the
// series converges long before the fixed iteration count.
double erf_fixed(double x) {
    constexpr double two_over_sqrt_pi = 1.1283791670955126;
    const double x2 = x * x;
    double u = x;       // (-1)^n x^(2n+1) / n!
    double sum = x;     // running sum of u_n / (2n+1)
    for (int n = 1; n <= 72; ++n) {
        u *= -x2 / n;
        sum += u / (2 * n + 1);
    }
    return two_over_sqrt_pi * sum;
}

double normal_cdf(double z) {
    constexpr double inv_sqrt_2 = 0.7071067811865476;
    return 0.5 * (1.0 + erf_fixed(z * inv_sqrt_2));
}

constexpr double weight_scale = 17592186044416.0; // 2^44

struct heap_item {
    std::uint64_t weight;
    std::uint32_t seq;
    std::uint32_t node;

    bool operator>(const heap_item& o) const {
        return weight != o.weight ? weight > o.weight : seq > o.seq;
    }
};

} // namespace

huffman_table huffman_table::build(unsigned r) {
    huffman_table t;
    t.width = r;
    const double sigma = sigma_for_width(r);
    const std::size_t n = (std::size_t{1} << r) - 1;
    t.lengths.assign(n, 0);
    t.codes.assign(n, 0);

    std::vector<std::uint64_t> weight(n);
    const std::int64_t lo = -((std::int64_t{1} << (r - 1)) - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = static_cast<double>(lo + static_cast<std::int64_t>(i));
        const double p = normal_cdf((s + 0.5) / sigma) - normal_cdf((s - 0.5) / sigma);
        weight[i] = static_cast<std::uint64_t>(std::max<long long>(1, std::llround(p * weight_scale)));
    }

    // Huffman merge with (weight, insertion order) ties, so the tree shape is
    // a pure function of the weights.
    std::vector<std::uint32_t> parent(2 * n - 1, 0);
    std::priority_queue<heap_item, std::vector<heap_item>, std::greater<>> heap;
    for (std::size_t i = 0; i < n; ++i)
        heap.push({weight[i], static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i)});
    std::uint32_t next = static_cast<std::uint32_t>(n);
    while (heap.size() > 1) {
        const heap_item a = heap.top();
        heap.pop();
        const heap_item b = heap.top();
        heap.pop();
        parent[a.node] = next;
        parent[b.node] = next;
        heap.push({a.weight + b.weight, next, next});
        ++next;
    }

    const std::uint32_t root = next - 1;
    for (std::size_t i = 0; i < n; ++i) {
        unsigned len = 0;
        for (std::uint32_t v = static_cast<std::uint32_t>(i); v != root; v = parent[v]) ++len;
        if (len > 64) throw std::logic_error("scow: huffman code length over 64 bits");
        t.lengths[i] = static_cast<std::uint8_t>(len);
    }

    // canonical assignment: by (length, symbol), counting up, shifting left
    // at each length increase
    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return t.lengths[a] != t.lengths[b] ? t.lengths[a] < t.lengths[b] : a < b;
    });

    const unsigned max_len = t.lengths[order.back()];
    t.first_code_.assign(max_len + 1, 0);
    t.first_index_.assign(max_len + 1, 0);
    t.count_.assign(max_len + 1, 0);
    t.symbol_order_ = order;

    std::uint64_t code = 0;
    unsigned prev_len = t.lengths[order.front()];
    for (std::size_t k = 0; k < n; ++k) {
        const unsigned len = t.lengths[order[k]];
        if (k > 0) {
            code += 1;
            code <<= (len - prev_len);
        }
        if (t.count_[len] == 0) {
            t.first_code_[len] = code;
            t.first_index_[len] = static_cast<std::uint32_t>(k);
        }
        ++t.count_[len];
        t.codes[order[k]] = code;
        prev_len = len;
    }
    return t;
}

void huffman_table::write_symbol(bit_writer& out, std::int64_t symbol) const {
    const std::size_t i = index_of(symbol);
    out.write_unsigned(codes[i], lengths[i]);
}

std::int64_t huffman_table::read_symbol(bit_reader& in) const {
    std::uint64_t code = 0;
    for (unsigned len = 1; len < count_.size(); ++len) {
        code = (code << 1) | in.read_unsigned(1);
        if (count_[len] != 0 && code >= first_code_[len] &&
            code - first_code_[len] < count_[len]) {
            const std::uint32_t i = symbol_order_[first_index_[len] + (code - first_code_[len])];
            return min_symbol() + static_cast<std::int64_t>(i);
        }
    }
    throw format_error("invalid huffman code");
}

const huffman_table& table_for(unsigned r) {
    if (!codable_width(r)) throw std::invalid_argument("scow: no huffman table for this width");
    static std::array<std::once_flag, max_coded_width + 1> flags;
    static std::array<huffman_table, max_coded_width + 1> tables;
    std::call_once(flags[r], [r] { tables[r] = huffman_table::build(r); });
    return tables[r];
}

void write_gamma(bit_writer& out, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("scow: gamma code needs n >= 1");
    const unsigned w = static_cast<unsigned>(std::bit_width(n));
    out.write_unsigned(0, w - 1);
    out.write_unsigned(n, w);
}

std::uint64_t read_gamma(bit_reader& in) {
    unsigned zeros = 0;
    while (in.read_unsigned(1) == 0)
        if (++zeros > 63) throw format_error("gamma code too long");
    return (std::uint64_t{1} << zeros) | in.read_unsigned(zeros);
}

std::vector<run> rle_encode(std::span<const std::int32_t> symbols) {
    std::vector<run> out;
    for (std::size_t i = 0; i < symbols.size();) {
        std::size_t j = i + 1;
        while (j < symbols.size() && symbols[j] == symbols[i]) ++j;
        out.push_back({symbols[i], j - i});
        i = j;
    }
    return out;
}

std::vector<std::int32_t> rle_decode(std::span<const run> runs) {
    std::vector<std::int32_t> out;
    for (const run& r : runs) out.insert(out.end(), r.count, r.symbol);
    return out;
}

void encode_block(bit_writer& out, std::span<const std::int32_t> cells, unsigned r) {
    const huffman_table& table = table_for(r);
    for (const run& rn : rle_encode(cells)) {
        table.write_symbol(out, rn.symbol);
        write_gamma(out, rn.count);
    }
}

std::vector<std::int32_t> decode_block(bit_reader& in, std::uint64_t cell_count, unsigned r) {
    const huffman_table& table = table_for(r);
    std::vector<std::int32_t> out;
    out.reserve(cell_count);
    while (out.size() < cell_count) {
        const std::int64_t symbol = table.read_symbol(in);
        const std::uint64_t count = read_gamma(in);
        if (count > cell_count - out.size()) throw format_error("run overshoots block");
        out.insert(out.end(), count, static_cast<std::int32_t>(symbol));
    }
    return out;
}

} // namespace scow::bitred
