#include <doctest.h>

#include <sstream>

#include "scow/container.hpp"
#include "scow/query.hpp"
#include "support.hpp"

using scow::coords;
using scow::region;

namespace {

/// Value of a "key: value" report line, or empty.
std::string report_value(const std::string& text, const std::string& key) {
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line))
        if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
    return {};
}

std::string csv_of(const std::vector<scow::query::hit>& hits) {
    std::string out;
    for (const scow::query::hit& h : hits) {
        for (std::uint64_t c : h.where) out += std::to_string(c) + ",";
        out += std::to_string(h.value) + "\n";
    }
    return out;
}

} // namespace

TEST_CASE("cli compress and decompress round trip") {
    testsup::temp_dir dir;
    auto rng = testsup::make_rng(81);
    const std::vector<std::int32_t> cells =
        testsup::random_values(rng, scow::value_type::int16, 20 * 12);
    const std::vector<std::uint8_t> raw = scow::store_cells(cells, scow::value_type::int16);
    testsup::write_raw(dir.file("in.raw"), raw);

    const testsup::cli_result comp = testsup::run_cli(
        dir, "compress --input " + dir.file("in.raw") + " --output " + dir.file("a.scow") +
                 " --type int16 --dims 20,12 --chunk 8,8 --level 2");
    REQUIRE(comp.exit_code == 0);
    CHECK(report_value(comp.out, "input_bytes") == "480");
    CHECK(report_value(comp.out, "output_bytes") ==
          std::to_string(testsup::read_raw(dir.file("a.scow")).size()));
    CHECK_FALSE(report_value(comp.out, "ratio").empty());
    CHECK_FALSE(report_value(comp.out, "wall_time").empty());

    const testsup::cli_result dec = testsup::run_cli(
        dir, "decompress --input " + dir.file("a.scow") + " --output " + dir.file("out.raw"));
    REQUIRE(dec.exit_code == 0);
    CHECK(testsup::read_raw(dir.file("out.raw")) == raw);
    CHECK(report_value(dec.out, "output_bytes") == "480");
}

TEST_CASE("cli compress is deterministic") {
    testsup::temp_dir dir;
    auto rng = testsup::make_rng(82);
    const std::vector<std::int32_t> cells =
        testsup::random_values(rng, scow::value_type::uint8, 50 * 40);
    testsup::write_raw(dir.file("in.raw"), scow::store_cells(cells, scow::value_type::uint8));

    for (const char* name : {"one.scow", "two.scow"}) {
        const testsup::cli_result r = testsup::run_cli(
            dir, "compress --input " + dir.file("in.raw") + " --output " + dir.file(name) +
                     " --type uint8 --dims 50,40 --chunk 16,16 --level 2");
        REQUIRE(r.exit_code == 0);
    }
    CHECK(testsup::read_raw(dir.file("one.scow")) == testsup::read_raw(dir.file("two.scow")));
}

TEST_CASE("cli filter emits oracle hits in order") {
    testsup::temp_dir dir;
    auto rng = testsup::make_rng(83);
    const scow::array_schema s =
        scow::make_schema(coords{12, 10}, coords{4, 4}, 1, scow::value_type::uint8);
    std::vector<std::int32_t> cells(120);
    for (auto& v : cells) v = static_cast<std::int32_t>(rng() % 16);
    testsup::write_raw(dir.file("in.raw"), scow::store_cells(cells, scow::value_type::uint8));

    REQUIRE(testsup::run_cli(dir, "compress --input " + dir.file("in.raw") + " --output " +
                                      dir.file("a.scow") +
                                      " --type uint8 --dims 12,10 --chunk 4,4 --level 1")
                .exit_code == 0);

    const scow::query::predicate p = scow::query::predicate::equals(7);
    const std::string want = csv_of(testsup::filter_oracle(cells, s, p));

    const testsup::cli_result to_stdout =
        testsup::run_cli(dir, "filter --input " + dir.file("a.scow") + " --eq 7");
    REQUIRE(to_stdout.exit_code == 0);
    CHECK(to_stdout.out == want);
    CHECK_FALSE(report_value(to_stdout.err, "hits").empty());
    CHECK_FALSE(report_value(to_stdout.err, "chunks_read").empty());
    CHECK_FALSE(report_value(to_stdout.err, "blocks_decoded").empty());
    CHECK_FALSE(report_value(to_stdout.err, "bytes_read").empty());

    const testsup::cli_result to_file = testsup::run_cli(
        dir, "filter --input " + dir.file("a.scow") + " --eq 7 --out " + dir.file("hits.csv"));
    REQUIRE(to_file.exit_code == 0);
    CHECK(testsup::slurp(dir.file("hits.csv")) == want);

    // clipped variant
    const region rg{{2, 1}, {9, 8}};
    const std::string clipped = csv_of(testsup::filter_oracle(cells, s, p, &rg));
    const testsup::cli_result part = testsup::run_cli(
        dir, "filter --input " + dir.file("a.scow") + " --eq 7 --region 2:9,1:8");
    REQUIRE(part.exit_code == 0);
    CHECK(part.out == clipped);
}

TEST_CASE("cli filter on an all-zero store reads nothing") {
    testsup::temp_dir dir;
    testsup::write_raw(dir.file("z.raw"), std::vector<std::uint8_t>(256, 0));
    REQUIRE(testsup::run_cli(dir, "compress --input " + dir.file("z.raw") + " --output " +
                                      dir.file("z.scow") +
                                      " --type uint8 --dims 16,16 --chunk 8,8 --level 1")
                .exit_code == 0);

    const testsup::cli_result r =
        testsup::run_cli(dir, "filter --input " + dir.file("z.scow") + " --eq 5");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.empty());
    CHECK(report_value(r.err, "chunks_read") == "0");
    CHECK(report_value(r.err, "hits") == "0");
}

TEST_CASE("cli range extracts the requested slice") {
    testsup::temp_dir dir;
    auto rng = testsup::make_rng(84);
    const scow::array_schema s =
        scow::make_schema(coords{24, 20}, coords{8, 8}, 2, scow::value_type::int8);
    const std::vector<std::int32_t> cells =
        testsup::random_values(rng, scow::value_type::int8, 480);
    testsup::write_raw(dir.file("in.raw"), scow::store_cells(cells, scow::value_type::int8));
    REQUIRE(testsup::run_cli(dir, "compress --input " + dir.file("in.raw") + " --output " +
                                      dir.file("a.scow") +
                                      " --type int8 --dims 24,20 --chunk 8,8 --level 2")
                .exit_code == 0);

    const testsup::cli_result r =
        testsup::run_cli(dir, "range --input " + dir.file("a.scow") + " --region 3:17,5:12 --out " +
                                  dir.file("slice.raw"));
    REQUIRE(r.exit_code == 0);
    const region rg{{3, 5}, {17, 12}};
    CHECK(testsup::read_raw(dir.file("slice.raw")) ==
          scow::store_cells(testsup::crop_oracle(cells, s, rg), scow::value_type::int8));
    CHECK(report_value(r.err, "cells") == std::to_string(rg.cell_count()));
}

TEST_CASE("cli synopsis writes the pooled grid") {
    testsup::temp_dir dir;
    auto rng = testsup::make_rng(85);
    const scow::array_schema s =
        scow::make_schema(coords{12, 10}, coords{8, 8}, 1, scow::value_type::uint8);
    const std::vector<std::int32_t> cells =
        testsup::random_values(rng, scow::value_type::uint8, 120);
    testsup::write_raw(dir.file("in.raw"), scow::store_cells(cells, scow::value_type::uint8));
    REQUIRE(testsup::run_cli(dir, "compress --input " + dir.file("in.raw") + " --output " +
                                      dir.file("a.scow") +
                                      " --type uint8 --dims 12,10 --chunk 8,8 --level 1")
                .exit_code == 0);

    const testsup::cli_result r = testsup::run_cli(
        dir, "synopsis --input " + dir.file("a.scow") + " --out " + dir.file("syn.raw"));
    REQUIRE(r.exit_code == 0);

    // oracle: pool each padded chunk, assemble the per-chunk corners
    const std::vector<std::int32_t> padded = scow::pad_array(cells, s);
    const coords bd = s.block_dims();
    coords syn_dims(s.rank());
    for (std::size_t d = 0; d < s.rank(); ++d) syn_dims[d] = s.dims[d] >> s.wavelet_level;
    std::vector<std::int32_t> want(s.chunk_count() * s.cells_per_block());
    for (std::uint64_t c = 0; c < s.chunk_count(); ++c) {
        const std::vector<std::int64_t> pooled = testsup::pool_synopsis_oracle(
            scow::extract_chunk(padded, s, c), s.chunk_dims, s.wavelet_level);
        const coords corner = scow::delinearize(c, s.chunk_grid());
        scow::for_each_coord(bd, [&](const coords& off) {
            coords abs(off.size());
            for (std::size_t d = 0; d < off.size(); ++d) abs[d] = corner[d] * bd[d] + off[d];
            want[scow::linearize(abs, syn_dims)] =
                static_cast<std::int32_t>(pooled[scow::linearize(off, bd)]);
        });
    }
    CHECK(testsup::read_raw(dir.file("syn.raw")) ==
          scow::store_cells(want, scow::value_type::int32));
    CHECK(report_value(r.err, "cells") == std::to_string(want.size()));
}

TEST_CASE("cli info describes the container") {
    testsup::temp_dir dir;
    std::vector<std::int32_t> cells(16 * 16, 3);
    cells[5] = 91;
    testsup::write_raw(dir.file("in.raw"), scow::store_cells(cells, scow::value_type::uint8));
    REQUIRE(testsup::run_cli(dir, "compress --input " + dir.file("in.raw") + " --output " +
                                      dir.file("a.scow") +
                                      " --type uint8 --dims 16,16 --chunk 8,8 --level 1"
                                      " --no-bit-reduction")
                .exit_code == 0);

    const testsup::cli_result r = testsup::run_cli(dir, "info --input " + dir.file("a.scow"));
    REQUIRE(r.exit_code == 0);
    CHECK(report_value(r.out, "type") == "uint8");
    CHECK(report_value(r.out, "logical_dims") == "16,16");
    CHECK(report_value(r.out, "padded_dims") == "16,16");
    CHECK(report_value(r.out, "chunk_dims") == "8,8");
    CHECK(report_value(r.out, "wavelet_level") == "1");
    CHECK(report_value(r.out, "bit_reduction") == "false");
    CHECK(report_value(r.out, "chunks") == "4");
    CHECK(report_value(r.out, "blocks_per_chunk") == "4");
    CHECK(report_value(r.out, "root_min") == "3");
    CHECK(report_value(r.out, "root_max") == "91");
    CHECK(report_value(r.out, "file_bytes") ==
          std::to_string(testsup::read_raw(dir.file("a.scow")).size()));
    for (const char* key : {"hmmt_bytes", "hmmt_pct", "synopsis_bytes", "synopsis_pct",
                            "body_bytes", "body_pct"})
        CHECK_FALSE(report_value(r.out, key).empty());
}

TEST_CASE("cli rejects malformed invocations") {
    testsup::temp_dir dir;
    testsup::write_raw(dir.file("in.raw"), std::vector<std::uint8_t>(64, 1));
    REQUIRE(testsup::run_cli(dir, "compress --input " + dir.file("in.raw") + " --output " +
                                      dir.file("a.scow") +
                                      " --type uint8 --dims 8,8 --chunk 4,4 --level 1")
                .exit_code == 0);

    // wrong byte count for the declared shape
    const testsup::cli_result wrong_size = testsup::run_cli(
        dir, "compress --input " + dir.file("in.raw") + " --output " + dir.file("b.scow") +
                 " --type uint8 --dims 9,9 --chunk 4,4 --level 1");
    CHECK(wrong_size.exit_code != 0);
    CHECK(wrong_size.err.find("scow:") != std::string::npos);

    CHECK(testsup::run_cli(dir, "compress --input " + dir.file("nope.raw") + " --output " +
                                    dir.file("c.scow") + " --type uint8 --dims 8,8")
              .exit_code != 0);
    CHECK(testsup::run_cli(dir, "compress --input " + dir.file("in.raw") + " --output " +
                                    dir.file("d.scow") + " --type float32 --dims 8,8")
              .exit_code != 0);
    CHECK(testsup::run_cli(dir, "info --input " + dir.file("nope.scow")).exit_code != 0);
    CHECK(testsup::run_cli(dir, "frobnicate --input x").exit_code != 0);

    // exactly one predicate
    CHECK(testsup::run_cli(dir, "filter --input " + dir.file("a.scow")).exit_code != 0);
    CHECK(testsup::run_cli(dir, "filter --input " + dir.file("a.scow") + " --eq 1 --lt 5")
              .exit_code != 0);

    // malformed or out-of-bounds regions
    CHECK(testsup::run_cli(dir, "range --input " + dir.file("a.scow") + " --region 5 --out " +
                                    dir.file("x.raw"))
              .exit_code != 0);
    CHECK(testsup::run_cli(dir, "range --input " + dir.file("a.scow") + " --region 0:9,0:4 --out " +
                                    dir.file("x.raw"))
              .exit_code != 0);
    CHECK(testsup::run_cli(dir, "range --input " + dir.file("a.scow") + " --region 3:2,0:4 --out " +
                                    dir.file("x.raw"))
              .exit_code != 0);
}
