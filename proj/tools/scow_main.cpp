// scow: compress, decompress, query and inspect chunked integer arrays.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scow/codec.hpp"
#include "scow/container.hpp"
#include "scow/geometry.hpp"
#include "scow/query.hpp"
#include "scow/thread_pool.hpp"
#include "scow/types.hpp"

namespace {

using scow::coords;
using scow::region;

class timer {
  public:
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw scow::io_error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw scow::io_error("cannot read " + path);
    return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw scow::io_error("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw scow::io_error("cannot write " + path);
}

coords parse_dims(const std::string& text) {
    coords out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        std::size_t used = 0;
        unsigned long long v = std::stoull(part, &used);
        if (used != part.size()) throw std::invalid_argument("scow: bad extent '" + part + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("scow: empty dimension list");
    return out;
}

// lo:hi pairs, comma-joined per dimension, half-open.
region parse_region(const std::string& text) {
    region r;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const std::size_t colon = part.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("scow: region wants lo:hi, got '" + part + "'");
        r.lo.push_back(std::stoull(part.substr(0, colon)));
        r.hi.push_back(std::stoull(part.substr(colon + 1)));
    }
    if (r.lo.empty()) throw std::invalid_argument("scow: empty region");
    return r;
}

std::string join_dims(const coords& c) {
    std::string out;
    for (std::size_t d = 0; d < c.size(); ++d) {
        if (d) out += ',';
        out += std::to_string(c[d]);
    }
    return out;
}

void report(std::ostream& os, const std::string& key, const std::string& value) {
    os << key << ": " << value << "\n";
}

void report(std::ostream& os, const std::string& key, std::uint64_t value) {
    report(os, key, std::to_string(value));
}

std::string fixed(double v, int digits) {
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(digits);
    ss << v;
    return ss.str();
}

void report_io(const scow::query::stats& io) {
    report(std::cerr, "chunks_read", io.chunks_read);
    report(std::cerr, "blocks_decoded", io.blocks_decoded);
    report(std::cerr, "bytes_read", io.bytes_read);
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

struct compress_args {
    std::string input, output, type_name = "uint8";
    std::string dims_text, chunk_text;
    std::uint32_t level = 3;
    bool no_bit_reduction = false;
};

void cmd_compress(const compress_args& a) {
    const timer t;
    const scow::value_type vt = scow::parse_value_type(a.type_name);
    const coords dims = parse_dims(a.dims_text);
    const coords chunk = a.chunk_text.empty() ? coords(dims.size(), 64) : parse_dims(a.chunk_text);
    if (chunk.size() != dims.size())
        throw std::invalid_argument("scow: --chunk rank differs from --dims");
    const scow::array_schema schema = scow::make_schema(dims, chunk, a.level, vt);

    const std::vector<std::uint8_t> raw = read_file(a.input);
    if (raw.size() != schema.logical_cell_count() * scow::size_of(vt))
        throw std::invalid_argument("scow: input is " + std::to_string(raw.size()) +
                                    " bytes, schema wants " +
                                    std::to_string(schema.logical_cell_count() * scow::size_of(vt)));
    const std::vector<std::int32_t> cells = scow::load_cells(raw, vt);

    scow::codec::options opt;
    opt.bit_reduction = !a.no_bit_reduction;
    const std::uint64_t written = scow::container::compress_to_file(a.output, cells, schema, opt);

    report(std::cout, "input_bytes", raw.size());
    report(std::cout, "output_bytes", written);
    report(std::cout, "ratio", fixed(static_cast<double>(raw.size()) / static_cast<double>(written), 4));
    report(std::cout, "wall_time", fixed(t.seconds(), 4));
}

void cmd_decompress(const std::string& input, const std::string& output, unsigned threads) {
    const timer t;
    const scow::container::reader src(input);
    const std::vector<std::int32_t> cells = scow::container::decompress_all(src, threads);
    const std::vector<std::uint8_t> raw = scow::store_cells(cells, src.schema().type);
    write_file(output, raw);

    report(std::cout, "input_bytes", src.file_bytes());
    report(std::cout, "output_bytes", raw.size());
    report(std::cout, "wall_time", fixed(t.seconds(), 4));
}

void cmd_info(const std::string& input) {
    const scow::container::reader src(input);
    const scow::array_schema& s = src.schema();

    std::uint64_t synopsis_bits = 0;
    for (std::uint64_t c = 0; c < s.chunk_count(); ++c) {
        const std::vector<std::uint8_t> bytes = src.read_chunk(c);
        const scow::codec::chunk_layout layout = scow::codec::parse_layout(
            bytes, s, c, src.topology(), src.bounds(), src.options());
        synopsis_bits += layout.payload_bits[0];
    }
    const std::uint64_t hmmt_bytes = src.tree_bytes();
    const std::uint64_t synopsis_bytes = (synopsis_bits + 7) / 8;
    const std::uint64_t body_bytes = src.file_bytes() - hmmt_bytes - synopsis_bytes;
    const auto pct = [&](std::uint64_t part) {
        return fixed(100.0 * static_cast<double>(part) / static_cast<double>(src.file_bytes()), 2);
    };

    report(std::cout, "type", scow::name_of(s.type));
    report(std::cout, "logical_dims", join_dims(s.logical_dims));
    report(std::cout, "padded_dims", join_dims(s.dims));
    report(std::cout, "chunk_dims", join_dims(s.chunk_dims));
    report(std::cout, "wavelet_level", s.wavelet_level);
    report(std::cout, "bit_reduction", src.options().bit_reduction ? "true" : "false");
    report(std::cout, "chunks", s.chunk_count());
    report(std::cout, "blocks_per_chunk", s.blocks_per_chunk());
    report(std::cout, "root_min", std::to_string(src.bounds().at(0).lower));
    report(std::cout, "root_max", std::to_string(src.bounds().at(0).upper));
    report(std::cout, "file_bytes", src.file_bytes());
    report(std::cout, "hmmt_bytes", hmmt_bytes);
    report(std::cout, "hmmt_pct", pct(hmmt_bytes));
    report(std::cout, "synopsis_bytes", synopsis_bytes);
    report(std::cout, "synopsis_pct", pct(synopsis_bytes));
    report(std::cout, "body_bytes", body_bytes);
    report(std::cout, "body_pct", pct(body_bytes));
}

void cmd_range(const std::string& input, const std::string& region_text, const std::string& out,
               unsigned threads) {
    const timer t;
    const scow::container::reader src(input);
    const region r = parse_region(region_text);
    const scow::query::range_result res = scow::query::range(src, r, threads);
    write_file(out, scow::store_cells(res.cells, src.schema().type));

    report_io(res.io);
    report(std::cerr, "cells", res.cells.size());
    report(std::cerr, "wall_time", fixed(t.seconds(), 4));
}

struct filter_args {
    std::string input, out, region_text;
    std::optional<scow::query::predicate> pred;
    unsigned threads = 6;
};

void cmd_filter(const filter_args& a) {
    const timer t;
    const scow::container::reader src(a.input);
    const scow::query::predicate& p = *a.pred;

    scow::query::filter_result res =
        a.region_text.empty()
            ? scow::query::filter(src, p, a.threads)
            : scow::query::range_filter(src, parse_region(a.region_text), p, a.threads);

    std::ofstream file;
    if (!a.out.empty()) {
        file.open(a.out, std::ios::trunc);
        if (!file) throw scow::io_error("cannot open " + a.out + " for writing");
    }
    std::ostream& os = a.out.empty() ? std::cout : file;
    for (const scow::query::hit& h : res.hits) {
        for (std::uint64_t c : h.where) os << c << ',';
        os << h.value << '\n';
    }
    if (!os) throw scow::io_error("cannot write filter output");

    report_io(res.io);
    report(std::cerr, "hits", res.hits.size());
    report(std::cerr, "wall_time", fixed(t.seconds(), 4));
}

void cmd_synopsis(const std::string& input, const std::string& out, unsigned threads) {
    const timer t;
    const scow::container::reader src(input);
    const scow::array_schema& s = src.schema();

    coords syn_dims(s.rank());
    for (std::size_t d = 0; d < s.rank(); ++d) syn_dims[d] = s.dims[d] >> s.wavelet_level;
    const coords bd = s.block_dims();
    const coords grid = s.chunk_grid();

    std::vector<std::int32_t> synopsis(s.chunk_count() * s.cells_per_block());
    scow::parallel_for(s.chunk_count(), threads, [&](std::uint64_t c) {
        const std::vector<std::int32_t> cells = src.read_synopsis(c);
        const coords corner = scow::delinearize(c, grid);
        scow::for_each_coord(bd, [&](const coords& off) {
            coords abs(off.size());
            for (std::size_t d = 0; d < off.size(); ++d) abs[d] = corner[d] * bd[d] + off[d];
            synopsis[scow::linearize(abs, syn_dims)] = cells[scow::linearize(off, bd)];
        });
    });

    std::vector<std::uint8_t> raw(synopsis.size() * 4);
    for (std::size_t i = 0; i < synopsis.size(); ++i) {
        const std::uint32_t u = static_cast<std::uint32_t>(synopsis[i]);
        raw[4 * i] = static_cast<std::uint8_t>(u);
        raw[4 * i + 1] = static_cast<std::uint8_t>(u >> 8);
        raw[4 * i + 2] = static_cast<std::uint8_t>(u >> 16);
        raw[4 * i + 3] = static_cast<std::uint8_t>(u >> 24);
    }
    write_file(out, raw);

    report(std::cerr, "chunks_read", src.chunks_read());
    report(std::cerr, "bytes_read", src.bytes_read());
    report(std::cerr, "cells", synopsis.size());
    report(std::cerr, "wall_time", fixed(t.seconds(), 4));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"scow: wavelet-compressed chunked array store"};
    app.require_subcommand(1);

    compress_args ca;
    CLI::App* comp = app.add_subcommand("compress", "Compress a raw row-major value file");
    comp->add_option("--input", ca.input, "Raw input file")->required();
    comp->add_option("--output", ca.output, "Container to write")->required();
    comp->add_option("--type", ca.type_name, "uint8|int8|uint16|int16|int32")->required();
    comp->add_option("--dims", ca.dims_text, "Logical extents, comma-joined")->required();
    comp->add_option("--chunk", ca.chunk_text, "Chunk extents (default 64 per dimension)");
    comp->add_option("--level", ca.level, "Wavelet decomposition levels (default 3)");
    comp->add_flag("--no-bit-reduction", ca.no_bit_reduction, "Skip RLE + Huffman coding");
    comp->callback([&] { cmd_compress(ca); });

    std::string d_input, d_output;
    unsigned d_threads = 6;
    CLI::App* dec = app.add_subcommand("decompress", "Rebuild the raw value file");
    dec->add_option("--input", d_input, "Container")->required();
    dec->add_option("--output", d_output, "Raw output file")->required();
    dec->add_option("--threads", d_threads, "Worker threads (default 6)");
    dec->callback([&] { cmd_decompress(d_input, d_output, d_threads); });

    std::string i_input;
    CLI::App* info = app.add_subcommand("info", "Describe a container");
    info->add_option("--input", i_input, "Container")->required();
    info->callback([&] { cmd_info(i_input); });

    std::string r_input, r_region, r_out;
    unsigned r_threads = 6;
    CLI::App* rng = app.add_subcommand("range", "Extract a rectangular slice");
    rng->add_option("--input", r_input, "Container")->required();
    rng->add_option("--region", r_region, "lo:hi per dimension, comma-joined, half-open")->required();
    rng->add_option("--out", r_out, "Raw output file")->required();
    rng->add_option("--threads", r_threads, "Worker threads (default 6)");
    rng->callback([&] { cmd_range(r_input, r_region, r_out, r_threads); });

    filter_args fa;
    std::int64_t f_eq = 0, f_lt = 0, f_le = 0, f_gt = 0, f_ge = 0;
    std::vector<std::int64_t> f_range;
    CLI::App* flt = app.add_subcommand("filter", "List cells matching a value predicate");
    flt->add_option("--input", fa.input, "Container")->required();
    CLI::Option* o_eq = flt->add_option("--eq", f_eq, "value == V");
    CLI::Option* o_rng = flt->add_option("--range", f_range, "LO <= value <= HI")->expected(2);
    CLI::Option* o_lt = flt->add_option("--lt", f_lt, "value < V");
    CLI::Option* o_le = flt->add_option("--le", f_le, "value <= V");
    CLI::Option* o_gt = flt->add_option("--gt", f_gt, "value > V");
    CLI::Option* o_ge = flt->add_option("--ge", f_ge, "value >= V");
    flt->add_option("--region", fa.region_text, "Restrict to lo:hi per dimension");
    flt->add_option("--out", fa.out, "CSV output file (default stdout)");
    flt->add_option("--threads", fa.threads, "Worker threads (default 6)");
    flt->callback([&] {
        using scow::query::cmp_op;
        using scow::query::predicate;
        const unsigned given = static_cast<unsigned>(o_eq->count() + o_rng->count() +
                                                     o_lt->count() + o_le->count() +
                                                     o_gt->count() + o_ge->count());
        if (given != 1)
            throw CLI::ValidationError("filter wants exactly one of --eq/--range/--lt/--le/--gt/--ge");
        if (o_eq->count()) fa.pred = predicate::equals(f_eq);
        if (o_rng->count()) fa.pred = predicate::in_range(f_range[0], f_range[1]);
        if (o_lt->count()) fa.pred = predicate::compare(cmp_op::lt, f_lt);
        if (o_le->count()) fa.pred = predicate::compare(cmp_op::le, f_le);
        if (o_gt->count()) fa.pred = predicate::compare(cmp_op::gt, f_gt);
        if (o_ge->count()) fa.pred = predicate::compare(cmp_op::ge, f_ge);
        cmd_filter(fa);
    });

    std::string s_input, s_out;
    unsigned s_threads = 6;
    CLI::App* syn = app.add_subcommand("synopsis", "Write the synopsis array (int32 cells)");
    syn->add_option("--input", s_input, "Container")->required();
    syn->add_option("--out", s_out, "Raw int32 output file")->required();
    syn->add_option("--threads", s_threads, "Worker threads (default 6)");
    syn->callback([&] { cmd_synopsis(s_input, s_out, s_threads); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
