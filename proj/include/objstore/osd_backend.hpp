// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "objstore/object_model.hpp"
#include "objstore/placement.hpp"

namespace objstore {

// "OBJC" chunk file. Header, all integers little-endian:
//   magic "OBJC" | version u16 = 1 | dtype u8 | rank u8 | part u32 |
//   reserved u32 = 0 | id 16B | chunk_dims rank x u64
// followed directly by the row-major payload.
inline constexpr std::array<char, 4> kChunkMagic{'O', 'B', 'J', 'C'};
inline constexpr std::uint16_t kChunkVersion = 1;
inline constexpr std::size_t kChunkFixedBytes = 32;

constexpr std::size_t chunk_header_size(std::size_t rank) { return kChunkFixedBytes + 8 * rank; }

struct ChunkHeader {
  DType dtype = DType::kI32;
  std::uint32_t part = 0;
  ObjectId id;
  Dims chunk_dims;

  friend bool operator==(const ChunkHeader&, const ChunkHeader&) = default;
};

std::vector<std::byte> encode_chunk_header(const ChunkHeader& h);
/// Throws kCorruptChunk on any malformed or short header.
ChunkHeader decode_chunk_header(std::span<const std::byte> bytes);

inline constexpr std::string_view kMarkerFile = "objstore-emu.marker";
inline constexpr std::string_view kMetaDir = "meta";

/// Root of an emulated object store: one directory per OSD plus meta/.
class OsdStore {
 public:
  /// Creates (or reopens, when the marker already names the same n_osd) the
  /// store at root. Throws kAlreadyInitialized on an n_osd mismatch and
  /// kIoError when root is a non-empty directory that is not a store.
  static OsdStore init(const std::filesystem::path& root, std::uint32_t n_osd);

  /// Opens an existing store. When expected_n_osd is non-zero it must match
  /// the persisted value (kLayoutMismatch otherwise).
  static OsdStore open(const std::filesystem::path& root, std::uint32_t expected_n_osd = 0);

  const std::filesystem::path& root() const { return root_; }
  std::uint32_t n_osd() const { return n_osd_; }

  std::filesystem::path osd_dir(std::uint32_t index) const;
  std::filesystem::path meta_dir() const { return root_ / kMetaDir; }
  std::filesystem::path chunk_path(const ObjectId& id, std::uint32_t part) const;

  /// Publishes one immutable chunk: temp file, fsync, link into place, fsync
  /// directory. Returns header + payload bytes. Throws kChunkExists when the
  /// chunk was already published, kShapeMismatch when the payload length does
  /// not match the shape.
  std::uint64_t write_chunk(const ObjectId& id, std::uint32_t part, const ObjectData& data) const;

  /// Lock-free read. Throws kChunkNotFound or kCorruptChunk.
  ObjectData read_chunk(const ObjectId& id, std::uint32_t part) const;

  bool chunk_exists(const ObjectId& id, std::uint32_t part) const;

 private:
  OsdStore(std::filesystem::path root, std::uint32_t n_osd) : root_(std::move(root)), n_osd_(n_osd) {}

  std::filesystem::path root_;
  std::uint32_t n_osd_ = 1;
};

std::string marker_line(std::uint32_t n_osd);

struct AuditReport {
  std::uint64_t chunks = 0;
  std::vector<std::filesystem::path> misplaced;  // not in the hash-designated OSD dir
  std::vector<std::filesystem::path> corrupt;    // bad header, wrong length, or name/header mismatch
  std::vector<std::filesystem::path> stray;      // anything else in an OSD dir except temp files
  std::uint64_t temp_files = 0;

  bool clean() const { return misplaced.empty() && corrupt.empty() && stray.empty(); }
};

/// Scans every OSD directory and checks each chunk file against the placement
/// function and its own header.
AuditReport audit_store(const OsdStore& store);

/// chunk filename -> FNV-1a-64 of the complete file bytes.
using ChunkDigests = std::map<std::string, std::uint64_t>;

ChunkDigests digest_chunks(const OsdStore& store);

struct DigestDiff {
  std::vector<std::string> changed;
  std::vector<std::string> missing;
  bool clean() const { return changed.empty() && missing.empty(); }
};

/// Chunks present in `before` must still exist with identical bytes. New
/// chunks in `after` are allowed.
DigestDiff compare_digests(const ChunkDigests& before, const ChunkDigests& after);

}  // namespace objstore
