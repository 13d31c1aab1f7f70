#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scow/codec.hpp"
#include "scow/geometry.hpp"
#include "scow/hmmt.hpp"

// On-disk container. One self-describing header carries the schema and the
// compressed min-max tree, so bounds and the synopsis are available without
// touching detail payloads; chunks are independently byte-addressed through
// a directory. Layout is normative and documented in FORMAT.md; all header
// integers are little-endian.

namespace scow::container {

constexpr std::uint8_t format_version = 1;
constexpr std::uint8_t flag_bit_reduction = 0x01;

/// Header, then the chunk directory, then chunks in id order. Returns the
/// total byte count written.
std::uint64_t write_container(const std::string& path, const array_schema& schema,
                              codec::options opt, std::span<const std::uint8_t> tree_bits,
                              const std::vector<std::vector<std::uint8_t>>& chunks);

/// Read handle. Chunk reads are positioned, so one handle serves concurrent
/// readers; the byte counters make read amplification observable.
class reader {
  public:
    explicit reader(const std::string& path);
    ~reader();
    reader(reader&& o) noexcept;
    reader& operator=(reader&&) = delete;
    reader(const reader&) = delete;
    reader& operator=(const reader&) = delete;

    [[nodiscard]] const array_schema& schema() const { return schema_; }
    [[nodiscard]] codec::options options() const { return opt_; }
    [[nodiscard]] const hmmt::topology& topology() const { return topo_; }
    [[nodiscard]] const hmmt::decoded_bounds& bounds() const { return bounds_; }
    [[nodiscard]] std::uint64_t file_bytes() const { return file_size_; }
    [[nodiscard]] std::uint64_t tree_bytes() const { return tree_bytes_; }
    [[nodiscard]] std::uint64_t header_bytes() const { return chunks_start_; }

    /// Compressed bytes of one chunk.
    [[nodiscard]] std::vector<std::uint8_t> read_chunk(std::uint64_t chunk_id) const;

    /// Byte length of one chunk without reading its payload.
    [[nodiscard]] std::uint64_t chunk_byte_length(std::uint64_t chunk_id) const;

    /// Synopsis cells of one chunk (row-major over block_dims), decoded from
    /// a prefix of the chunk: the width headers plus the synopsis payload.
    /// Detail payload bytes are never requested.
    [[nodiscard]] std::vector<std::int32_t> read_synopsis(std::uint64_t chunk_id) const;

    /// Total bytes fetched so far, including the open itself.
    [[nodiscard]] std::uint64_t bytes_read() const { return bytes_read_.load(); }
    [[nodiscard]] std::uint64_t chunks_read() const { return chunks_read_.load(); }

  private:
    struct dir_entry {
        std::uint64_t offset = 0;
        std::uint64_t length = 0;
    };

    void pread_exact(std::uint64_t offset, std::span<std::uint8_t> out) const;
    [[nodiscard]] dir_entry directory_entry(std::uint64_t chunk_id) const;

    int fd_ = -1;
    std::uint64_t file_size_ = 0;
    array_schema schema_;
    codec::options opt_;
    hmmt::topology topo_;
    hmmt::decoded_bounds bounds_;
    std::uint64_t tree_bytes_ = 0;
    std::uint64_t dir_offset_ = 0;
    std::uint64_t chunks_start_ = 0;
    mutable std::atomic<std::uint64_t> bytes_read_{0};
    mutable std::atomic<std::uint64_t> chunks_read_{0};
};

// ---------------------------------------------------------------------------
// whole-array pipelines
// ---------------------------------------------------------------------------

/// Transforms, packs and writes logical cells (row-major, already widened to
/// int32). Returns the container byte count.
std::uint64_t compress_to_file(const std::string& path, std::span<const std::int32_t> logical,
                               const array_schema& schema, codec::options opt);

/// Full decode back to logical cells.
[[nodiscard]] std::vector<std::int32_t> decompress_all(const reader& r, unsigned threads = 1);

} // namespace scow::container
