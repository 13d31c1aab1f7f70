#include "scow/container.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include "scow/thread_pool.hpp"
#include "scow/wavelet.hpp"

namespace scow::container {

namespace {

constexpr char magic[4] = {'S', 'C', 'O', 'W'};
constexpr std::size_t max_rank = 16;

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | in[static_cast<std::size_t>(i)];
    return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> in) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | in[static_cast<std::size_t>(i)];
    return v;
}

[[nodiscard]] std::uint64_t fixed_header_bytes(std::size_t m) {
    return 4 + 1 + 1 + 1 + 8 * m + 8 * m + 4 * m + 1 + 1 + 4;
}

} // namespace

std::uint64_t write_container(const std::string& path, const array_schema& schema,
                              codec::options opt, std::span<const std::uint8_t> tree_bits,
                              const std::vector<std::vector<std::uint8_t>>& chunks) {
    if (chunks.size() != schema.chunk_count())
        throw std::invalid_argument("scow: chunk count does not match schema");
    const std::size_t m = schema.rank();

    std::vector<std::uint8_t> head;
    head.insert(head.end(), magic, magic + 4);
    put_u8(head, format_version);
    put_u8(head, static_cast<std::uint8_t>(schema.type));
    put_u8(head, static_cast<std::uint8_t>(m));
    for (std::uint64_t e : schema.logical_dims) put_u64(head, e);
    for (std::uint64_t e : schema.dims) put_u64(head, e);
    for (std::uint64_t e : schema.chunk_dims) put_u32(head, static_cast<std::uint32_t>(e));
    put_u8(head, static_cast<std::uint8_t>(schema.wavelet_level));
    put_u8(head, opt.bit_reduction ? flag_bit_reduction : 0);
    put_u32(head, static_cast<std::uint32_t>(tree_bits.size()));
    head.insert(head.end(), tree_bits.begin(), tree_bits.end());

    std::uint64_t offset = head.size() + 16 * chunks.size();
    for (const auto& c : chunks) {
        put_u64(head, offset);
        put_u64(head, c.size());
        offset += c.size();
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(head.data()), static_cast<std::streamsize>(head.size()));
    for (const auto& c : chunks)
        out.write(reinterpret_cast<const char*>(c.data()), static_cast<std::streamsize>(c.size()));
    out.flush();
    if (!out) throw io_error("write failed: " + path);
    return offset;
}

reader::reader(const std::string& path) {
    fd_ = ::open(path.c_str(), O_RDONLY);
    if (fd_ < 0) throw io_error("cannot open: " + path);
    struct stat st {};
    if (::fstat(fd_, &st) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw io_error("cannot stat: " + path);
    }
    file_size_ = static_cast<std::uint64_t>(st.st_size);

    try {
        std::uint8_t prelude[7];
        pread_exact(0, prelude);
        if (std::memcmp(prelude, magic, 4) != 0) throw format_error("bad magic");
        if (prelude[4] != format_version) throw format_error("unsupported format version");
        const value_type vt = value_type_from_code(prelude[5]);
        const std::size_t m = prelude[6];
        if (m == 0 || m > max_rank) throw format_error("rank out of range");

        std::vector<std::uint8_t> rest(fixed_header_bytes(m) - 7);
        pread_exact(7, rest);
        std::span<const std::uint8_t> p(rest);
        coords logical(m), dims(m), chunk(m);
        for (std::size_t d = 0; d < m; ++d, p = p.subspan(8)) logical[d] = get_u64(p);
        for (std::size_t d = 0; d < m; ++d, p = p.subspan(8)) dims[d] = get_u64(p);
        for (std::size_t d = 0; d < m; ++d, p = p.subspan(4)) chunk[d] = get_u32(p);
        const std::uint32_t level = p[0];
        const std::uint8_t flags = p[1];
        tree_bytes_ = get_u32(p.subspan(2));

        try {
            schema_ = make_schema(logical, chunk, level, vt);
        } catch (const std::invalid_argument& e) {
            throw format_error(std::string("invalid schema: ") + e.what());
        }
        if (schema_.dims != dims) throw format_error("padded dims disagree with schema");
        opt_.bit_reduction = (flags & flag_bit_reduction) != 0;

        std::vector<std::uint8_t> tree(tree_bytes_);
        pread_exact(fixed_header_bytes(m), tree);
        topo_ = hmmt::make_topology(schema_);
        bounds_ = hmmt::decompress(tree, topo_, vt);

        dir_offset_ = fixed_header_bytes(m) + tree_bytes_;
        chunks_start_ = dir_offset_ + 16 * schema_.chunk_count();
        if (chunks_start_ > file_size_) throw format_error("truncated chunk directory");
    } catch (...) {
        ::close(fd_);
        fd_ = -1;
        throw;
    }
}

reader::~reader() {
    if (fd_ >= 0) ::close(fd_);
}

reader::reader(reader&& o) noexcept
    : fd_(o.fd_), file_size_(o.file_size_), schema_(std::move(o.schema_)), opt_(o.opt_),
      topo_(std::move(o.topo_)), bounds_(std::move(o.bounds_)), tree_bytes_(o.tree_bytes_),
      dir_offset_(o.dir_offset_), chunks_start_(o.chunks_start_),
      bytes_read_(o.bytes_read_.load()), chunks_read_(o.chunks_read_.load()) {
    o.fd_ = -1;
}

void reader::pread_exact(std::uint64_t offset, std::span<std::uint8_t> out) const {
    std::size_t done = 0;
    while (done < out.size()) {
        const ssize_t got = ::pread(fd_, out.data() + done, out.size() - done,
                                    static_cast<off_t>(offset + done));
        if (got < 0 && errno == EINTR) continue;
        if (got <= 0) throw io_error("unexpected end of container");
        done += static_cast<std::size_t>(got);
    }
    bytes_read_.fetch_add(out.size());
}

reader::dir_entry reader::directory_entry(std::uint64_t chunk_id) const {
    if (chunk_id >= schema_.chunk_count()) throw std::invalid_argument("scow: chunk id out of range");
    std::uint8_t raw[16];
    pread_exact(dir_offset_ + 16 * chunk_id, raw);
    dir_entry e{get_u64({raw, 8}), get_u64({raw + 8, 8})};
    if (e.offset < chunks_start_ || e.length > file_size_ || e.offset > file_size_ - e.length)
        throw format_error("chunk directory entry out of bounds");
    return e;
}

std::uint64_t reader::chunk_byte_length(std::uint64_t chunk_id) const {
    return directory_entry(chunk_id).length;
}

std::vector<std::uint8_t> reader::read_chunk(std::uint64_t chunk_id) const {
    const dir_entry e = directory_entry(chunk_id);
    std::vector<std::uint8_t> bytes(e.length);
    pread_exact(e.offset, bytes);
    chunks_read_.fetch_add(1);
    return bytes;
}

std::vector<std::int32_t> reader::read_synopsis(std::uint64_t chunk_id) const {
    const dir_entry e = directory_entry(chunk_id);

    auto fetch_through = [&](std::vector<std::uint8_t>& buf, std::uint64_t want) {
        if (want > e.length) throw format_error("chunk shorter than its header");
        if (want <= buf.size()) return;
        const std::uint64_t have = buf.size();
        buf.resize(want);
        pread_exact(e.offset + have, std::span<std::uint8_t>(buf).subspan(have));
    };

    std::vector<std::uint8_t> buf;
    fetch_through(buf, std::min<std::uint64_t>(codec::delta_region_bytes(schema_), e.length));
    fetch_through(buf, codec::header_region_bytes(buf, schema_, chunk_id, topo_, bounds_, opt_));
    const codec::chunk_layout lay =
        codec::parse_layout(buf, schema_, chunk_id, topo_, bounds_, opt_);
    fetch_through(buf, lay.prefix_bytes(0));

    const std::uint64_t ids[1] = {0};
    const std::vector<std::int32_t> chunk =
        codec::decode_blocks(buf, schema_, chunk_id, topo_, bounds_, opt_, ids);
    return wavelet::synopsis_of(chunk, schema_);
}

std::uint64_t compress_to_file(const std::string& path, std::span<const std::int32_t> logical,
                               const array_schema& schema, codec::options opt) {
    const std::vector<std::int32_t> padded = pad_array(logical, schema);
    const hmmt::exact_tree tree = hmmt::build(padded, schema);
    const std::vector<std::uint8_t> tree_bits = hmmt::compress(tree, schema.type);
    // the packer must see the same conservative bounds the reader will
    const hmmt::decoded_bounds bounds = hmmt::decompress(tree_bits, tree.topo, schema.type);

    std::vector<std::vector<std::uint8_t>> chunks(schema.chunk_count());
    for (std::uint64_t c = 0; c < chunks.size(); ++c) {
        std::vector<std::int32_t> cells = extract_chunk(padded, schema, c);
        wavelet::forward_chunk(cells, schema);
        chunks[c] = codec::encode_chunk(cells, schema, c, tree.topo, bounds, opt);
    }
    return write_container(path, schema, opt, tree_bits, chunks);
}

std::vector<std::int32_t> decompress_all(const reader& r, unsigned threads) {
    const array_schema& schema = r.schema();
    std::vector<std::int32_t> padded(schema.cell_count());
    parallel_for(schema.chunk_count(), threads, [&](std::uint64_t c) {
        const std::vector<std::uint8_t> bytes = r.read_chunk(c);
        std::vector<std::int32_t> cells =
            codec::decode_chunk(bytes, schema, c, r.topology(), r.bounds(), r.options());
        wavelet::inverse_chunk(cells, schema);
        scatter_chunk(cells, padded, schema, c);
    });
    return crop_array(padded, schema);
}

} // namespace scow::container
