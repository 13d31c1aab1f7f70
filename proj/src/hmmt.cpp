#include "scow/hmmt.hpp"

#include <algorithm>
#include <bit>
#include <limits>

#include "scow/bitstream.hpp"

namespace scow::hmmt {

int sig_bit_pos(int n, std::uint64_t x) {
    if (n < 1) throw std::invalid_argument("scow: significant bit index must be >= 1");
    int pos = 0;
    while (x != 0) {
        pos = std::bit_width(x);
        if (--n == 0) return pos;
        x &= ~(std::uint64_t{1} << (pos - 1));
    }
    return 0;
}

namespace {

[[nodiscard]] std::uint64_t abs64(std::int64_t v) {
    return v < 0 ? static_cast<std::uint64_t>(-(v + 1)) + 1 : static_cast<std::uint64_t>(v);
}

} // namespace

int signed_sig_bit(int n, std::int64_t v) {
    const int pos = sig_bit_pos(n, abs64(v));
    return v < 0 ? -pos : pos;
}

// ---------------------------------------------------------------------------
// topology
// ---------------------------------------------------------------------------

std::uint64_t topology::level_size(std::uint32_t level) const {
    std::uint64_t n = 1;
    for (auto e : level_grids[level]) n *= e;
    return n;
}

std::uint32_t topology::level_of(std::uint64_t node) const {
    std::uint32_t level = level_count() - 1;
    while (level_offsets[level] > node) --level;
    return level;
}

coords topology::coords_of(std::uint64_t node) const {
    const std::uint32_t level = level_of(node);
    return delinearize(node - level_offsets[level], level_grids[level]);
}

std::uint64_t topology::node_id(std::uint32_t level, const coords& c) const {
    return level_offsets[level] + linearize(c, level_grids[level]);
}

std::uint64_t topology::parent(std::uint64_t node) const {
    if (node == 0) throw std::invalid_argument("scow: root has no parent");
    const std::uint32_t level = level_of(node);
    if (level == 1 && gather_root) return 0;
    coords c = coords_of(node);
    for (auto& e : c) e >>= 1;
    return node_id(level - 1, c);
}

std::vector<std::uint64_t> topology::children(std::uint64_t node) const {
    const std::uint32_t level = level_of(node);
    if (level + 1 == level_count()) return {};
    std::vector<std::uint64_t> out;
    if (level == 0 && gather_root) {
        const std::uint64_t n = level_size(1);
        out.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) out.push_back(level_offsets[1] + i);
        return out;
    }
    const coords c = coords_of(node);
    const coords& grid = level_grids[level + 1];
    coords lo(m), ext(m);
    for (std::size_t d = 0; d < m; ++d) {
        lo[d] = c[d] * 2;
        ext[d] = std::min<std::uint64_t>(2, grid[d] - lo[d]);
    }
    for_each_coord(ext, [&](const coords& off) {
        coords child(m);
        for (std::size_t d = 0; d < m; ++d) child[d] = lo[d] + off[d];
        out.push_back(node_id(level + 1, child));
    });
    return out;
}

region topology::fragment(std::uint64_t node) const {
    const std::uint32_t level = level_of(node);
    const std::uint32_t k = level_block - level;
    const coords c = coords_of(node);
    region r;
    r.lo.resize(m);
    r.hi.resize(m);
    for (std::size_t d = 0; d < m; ++d) {
        const std::uint64_t scale = block_dims[d] << k;
        r.lo[d] = std::min(c[d] * scale, dims[d]);
        r.hi[d] = std::min((c[d] + 1) * scale, dims[d]);
    }
    if (node == 0) r = {coords(m, 0), dims};
    return r;
}

topology make_topology(const array_schema& schema) {
    topology t;
    t.m = schema.rank();
    t.block_dims = schema.block_dims();
    t.dims = schema.dims;

    std::vector<coords> bottom_up;
    coords g = schema.block_grid();
    bottom_up.push_back(g);
    auto all_mergeable = [](const coords& c) {
        for (auto e : c)
            if (e < 2) return false;
        return true;
    };
    while (all_mergeable(g)) {
        for (auto& e : g) e = (e + 1) / 2;
        bottom_up.push_back(g);
    }
    std::uint64_t top_nodes = 1;
    for (auto e : bottom_up.back()) top_nodes *= e;
    if (top_nodes > 1) {
        bottom_up.emplace_back(t.m, 1);
        t.gather_root = true;
    }

    t.level_grids.assign(bottom_up.rbegin(), bottom_up.rend());
    t.level_block = t.level_count() - 1;
    t.level_chunk = t.level_block - schema.wavelet_level;
    t.level_offsets.resize(t.level_count());
    std::uint64_t off = 0;
    for (std::uint32_t l = 0; l < t.level_count(); ++l) {
        t.level_offsets[l] = off;
        off += t.level_size(l);
    }
    t.total_nodes = off;
    return t;
}

// ---------------------------------------------------------------------------
// exact build
// ---------------------------------------------------------------------------

exact_tree build(std::span<const std::int32_t> padded, const array_schema& schema) {
    if (padded.size() != schema.cell_count())
        throw std::invalid_argument("scow: padded cell count mismatch");
    exact_tree tree;
    tree.topo = make_topology(schema);
    const topology& topo = tree.topo;
    tree.nodes.assign(topo.total_nodes, min_max{});

    const std::uint64_t leaf_off = topo.level_offsets[topo.level_block];
    const std::uint64_t leaves = topo.level_size(topo.level_block);
    for (std::uint64_t i = 0; i < leaves; ++i) {
        const region frag = topo.fragment(leaf_off + i);
        std::int64_t lo = std::numeric_limits<std::int64_t>::max();
        std::int64_t hi = std::numeric_limits<std::int64_t>::min();
        for_each_coord(frag.extents(), [&](const coords& off) {
            coords abs(off.size());
            for (std::size_t d = 0; d < off.size(); ++d) abs[d] = frag.lo[d] + off[d];
            const std::int64_t v = padded[linearize(abs, schema.dims)];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        });
        tree.nodes[leaf_off + i] = {lo, hi};
    }

    for (std::uint32_t level = topo.level_block; level-- > 0;) {
        const std::uint64_t off = topo.level_offsets[level];
        const std::uint64_t n = topo.level_size(level);
        for (std::uint64_t i = 0; i < n; ++i) {
            std::int64_t lo = std::numeric_limits<std::int64_t>::max();
            std::int64_t hi = std::numeric_limits<std::int64_t>::min();
            for (std::uint64_t c : topo.children(off + i)) {
                lo = std::min(lo, tree.nodes[c].min);
                hi = std::max(hi, tree.nodes[c].max);
            }
            tree.nodes[off + i] = {lo, hi};
        }
    }
    return tree;
}

// ---------------------------------------------------------------------------
// compression
// ---------------------------------------------------------------------------

namespace {

constexpr int max_bit_pos = 34; // int32 cells: |value| <= 2^31, positions stay below this

[[nodiscard]] unsigned span_width(int smin, int smax) {
    return static_cast<unsigned>(std::bit_width(static_cast<std::uint64_t>(smax - smin)));
}

} // namespace

std::vector<std::uint8_t> compress(const exact_tree& tree, value_type vt) {
    const topology& topo = tree.topo;
    const unsigned root_w = static_cast<unsigned>(8 * size_of(vt));
    bit_writer out;

    std::vector<int> order(topo.total_nodes, 0);
    std::vector<unsigned> width(topo.total_nodes, 0);
    order[0] = 1;
    width[0] = root_w;

    std::vector<std::uint64_t> queue{0};
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const std::uint64_t i = queue[head];
        const min_max mm = tree.nodes[i];
        const int n = order[i];

        if (i == 0) {
            const std::uint64_t mask = root_w == 64 ? ~std::uint64_t{0}
                                                    : (std::uint64_t{1} << root_w) - 1;
            out.write_unsigned(static_cast<std::uint64_t>(mm.min) & mask, root_w);
            out.write_unsigned(static_cast<std::uint64_t>(mm.max) & mask, root_w);
        } else {
            const min_max pm = tree.nodes[topo.parent(i)];
            if (order[topo.parent(i)] == n) {
                const int dmin = signed_sig_bit(n, mm.min) - signed_sig_bit(n, pm.min);
                const int dmax = signed_sig_bit(n, pm.max) - signed_sig_bit(n, mm.max);
                if (dmin < 0 || dmax < 0)
                    throw std::logic_error("scow: significant-bit drift direction violated");
                out.write_unsigned(static_cast<std::uint64_t>(dmin), width[i]);
                out.write_unsigned(static_cast<std::uint64_t>(dmax), width[i]);
            } else {
                out.write_unsigned(static_cast<std::uint64_t>(sig_bit_pos(n, abs64(mm.min))), width[i]);
                out.write_unsigned(static_cast<std::uint64_t>(sig_bit_pos(n, abs64(mm.max))), width[i]);
            }
        }

        const std::vector<std::uint64_t> kids = topo.children(i);
        if (kids.empty()) continue;

        const int smin = signed_sig_bit(n, mm.min);
        const int smax = signed_sig_bit(n, mm.max);
        if (smin == 0 && smax == 0) continue; // every cell is zero below this node

        if (smin != smax) {
            const unsigned w = span_width(smin, smax);
            for (std::uint64_t c : kids) {
                order[c] = n;
                width[c] = w;
                queue.push_back(c);
            }
            continue;
        }

        // min and max sit on the same signed bit position: advance the order
        // past every further shared position and hand children the new one.
        const unsigned q = static_cast<unsigned>(smax < 0 ? -smax : smax);
        const std::uint64_t amin = abs64(mm.min);
        const std::uint64_t amax = abs64(mm.max);
        int k = n, bmin = 0, bmax = 0;
        for (;;) {
            ++k;
            bmin = sig_bit_pos(k, amin);
            bmax = sig_bit_pos(k, amax);
            if (!(bmin == bmax && bmin != 0)) break;
        }
        if (bmax == 0) {
            // the max has no next significant bit: the drift scheme cannot
            // narrow the children, so the subtree ends here
            out.write_unsigned(0, q);
            out.write_unsigned(1, 1);
            continue;
        }
        const int end = std::max(bmin, bmax);
        out.write_unsigned(static_cast<std::uint64_t>(k - n), q);
        for (int pos = static_cast<int>(q) - 1; pos >= end + 1; --pos)
            out.write_unsigned((amin >> (pos - 1)) & 1u, 1);
        out.write_unsigned(1, 1); // end marker
        const unsigned w = static_cast<unsigned>(std::bit_width(static_cast<std::uint64_t>(end)));
        for (std::uint64_t c : kids) {
            order[c] = k;
            width[c] = w;
            queue.push_back(c);
        }
    }
    return out.take();
}

// ---------------------------------------------------------------------------
// decompression
// ---------------------------------------------------------------------------

namespace {

struct node_state {
    int order = 1;
    unsigned width = 0;
    std::int64_t prefix = 0; // magnitude bits locked for the whole subtree
    int floor_pos = 64;      // positions >= floor_pos are part of prefix
    int sign = 1;            // subtree sign once an order > 1 is reached
    int smin = 0;
    int smax = 0;
};

[[nodiscard]] std::int64_t lower_of(const node_state& s) {
    if (s.smin > 0) return s.prefix + (std::int64_t{1} << (s.smin - 1));
    if (s.smin == 0) return s.prefix == 0 ? 0 : (s.sign < 0 ? -s.prefix : s.prefix);
    const int q = -s.smin;
    return -(s.prefix + (std::int64_t{1} << q) - 1);
}

[[nodiscard]] std::int64_t upper_of(const node_state& s) {
    if (s.smax > 0) return s.prefix + (std::int64_t{1} << s.smax) - 1;
    if (s.smax == 0) return s.prefix == 0 ? 0 : (s.sign < 0 ? -s.prefix : s.prefix);
    const int q = -s.smax;
    return -(s.prefix + (std::int64_t{1} << (q - 1)));
}

} // namespace

decoded_bounds decompress(std::span<const std::uint8_t> bits, const topology& topo, value_type vt) {
    const unsigned root_w = static_cast<unsigned>(8 * size_of(vt));
    bit_reader in(bits);

    decoded_bounds out;
    out.nodes.assign(topo.total_nodes, node_bounds{});
    std::vector<node_state> st(topo.total_nodes);
    std::vector<std::uint8_t> visited(topo.total_nodes, 0);

    std::vector<std::uint64_t> queue{0};
    visited[0] = 1;
    st[0].order = 1;
    st[0].width = root_w;

    for (std::size_t head = 0; head < queue.size(); ++head) {
        const std::uint64_t i = queue[head];
        node_state& s = st[i];

        if (i == 0) {
            std::uint64_t umin = in.read_unsigned(root_w);
            std::uint64_t umax = in.read_unsigned(root_w);
            std::int64_t mn, mx;
            if (is_signed(vt)) {
                const std::uint64_t sign_bit = std::uint64_t{1} << (root_w - 1);
                mn = static_cast<std::int64_t>((umin ^ sign_bit)) - static_cast<std::int64_t>(sign_bit);
                mx = static_cast<std::int64_t>((umax ^ sign_bit)) - static_cast<std::int64_t>(sign_bit);
            } else {
                mn = static_cast<std::int64_t>(umin);
                mx = static_cast<std::int64_t>(umax);
            }
            if (mn > mx) throw format_error("root min exceeds root max");
            s.smin = signed_sig_bit(1, mn);
            s.smax = signed_sig_bit(1, mx);
            out.nodes[0] = {mn, mx};
        } else {
            const std::uint64_t p = topo.parent(i);
            const node_state& ps = st[p];
            if (s.order == ps.order) {
                const std::uint64_t dmin = in.read_unsigned(s.width);
                const std::uint64_t dmax = in.read_unsigned(s.width);
                s.smin = ps.smin + static_cast<int>(dmin);
                s.smax = ps.smax - static_cast<int>(dmax);
            } else {
                const std::uint64_t qmin = in.read_unsigned(s.width);
                const std::uint64_t qmax = in.read_unsigned(s.width);
                if (static_cast<int>(qmin) >= s.floor_pos || static_cast<int>(qmax) >= s.floor_pos)
                    throw format_error("significant-bit position inside locked prefix");
                s.smin = s.sign * static_cast<int>(qmin);
                s.smax = s.sign * static_cast<int>(qmax);
            }
            if (s.smin > s.smax || s.smin < -max_bit_pos || s.smax > max_bit_pos)
                throw format_error("significant-bit schedule desynchronized");
            out.nodes[i] = {lower_of(s), upper_of(s)};
        }

        const std::vector<std::uint64_t> kids = topo.children(i);
        if (kids.empty()) continue;
        if (s.smin == 0 && s.smax == 0) continue;

        if (s.smin != s.smax) {
            const unsigned w = span_width(s.smin, s.smax);
            for (std::uint64_t c : kids) {
                st[c].order = s.order;
                st[c].width = w;
                st[c].prefix = s.prefix;
                st[c].floor_pos = s.floor_pos;
                st[c].sign = s.sign;
                visited[c] = 1;
                queue.push_back(c);
            }
            continue;
        }

        const unsigned q = static_cast<unsigned>(s.smax < 0 ? -s.smax : s.smax);
        const std::uint64_t d = in.read_unsigned(q);
        if (d == 0) {
            if (in.read_unsigned(1) != 1) throw format_error("missing jump end marker");
            continue; // subtree finished; descendants inherit these bounds
        }
        const int m_new = s.order + static_cast<int>(d);
        if (m_new > max_bit_pos) throw format_error("bit order out of range");
        std::int64_t prefix = s.prefix + (std::int64_t{1} << (q - 1));
        int pos = static_cast<int>(q) - 1;
        std::uint64_t ones = 0;
        for (;;) {
            const unsigned bit = static_cast<unsigned>(in.read_unsigned(1));
            if (bit) {
                ++ones;
                if (ones == d) break; // end marker
            }
            if (pos < 1) throw format_error("jump runs past position 1");
            if (bit) prefix += std::int64_t{1} << (pos - 1);
            --pos;
        }
        const int end = pos;
        if (end < 1) throw format_error("jump end position out of range");
        const int sign = s.smax < 0 ? -1 : 1;
        // the shared bits narrow this node too, not just its children (the
        // root keeps its exact values instead)
        if (i != 0) {
            const std::int64_t lo_mag = prefix;
            const std::int64_t hi_mag = prefix + (std::int64_t{1} << end) - 1;
            out.nodes[i] = sign < 0 ? node_bounds{-hi_mag, -lo_mag} : node_bounds{lo_mag, hi_mag};
        }
        const unsigned w = static_cast<unsigned>(std::bit_width(static_cast<std::uint64_t>(end)));
        for (std::uint64_t c : kids) {
            st[c].order = m_new;
            st[c].width = w;
            st[c].prefix = prefix;
            st[c].floor_pos = end + 1;
            st[c].sign = sign;
            visited[c] = 1;
            queue.push_back(c);
        }
    }

    // nodes the encoder never reached inherit the nearest decoded ancestor
    for (std::uint64_t i = 1; i < topo.total_nodes; ++i)
        if (!visited[i]) out.nodes[i] = out.nodes[topo.parent(i)];
    return out;
}

} // namespace scow::hmmt
