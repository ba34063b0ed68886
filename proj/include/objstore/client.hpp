// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "objstore/metadata_store.hpp"
#include "objstore/object_model.hpp"
#include "objstore/osd_backend.hpp"

namespace objstore {

/// Everything a worker needs to contribute parts to a chunked PUT. It is a
/// plain value: serialize it, hand it to another process, put_chunk from there.
struct SessionToken {
  ObjectId id;
  DType dtype = DType::kI32;
  Shape shape;
  ChunkGrid grid;

  /// Encoded as an unnamed chunked OBJM record.
  std::vector<std::byte> serialize() const;
  static SessionToken deserialize(std::span<const std::byte> bytes);

  friend bool operator==(const SessionToken&, const SessionToken&) = default;
};

/// An in-flight chunked PUT owned by the committing ("master") process.
class PutSession {
 public:
  const ObjectMeta& meta() const { return meta_; }
  std::uint64_t parts_expected() const { return meta_.layout().chunk_count; }
  bool committed() const { return committed_; }
  SessionToken token() const;

 private:
  friend class ObjectStore;
  explicit PutSession(ObjectMeta meta) : meta_(std::move(meta)) {}

  ObjectMeta meta_;
  bool committed_ = false;
};

struct GetOptions {
  /// Number of threads fanning out chunk reads; 1 reads sequentially.
  unsigned read_threads = 1;
};

/// PUT/GET facade over an OsdStore and its MetadataStore. Safe to use from
/// many threads and processes sharing one root.
class ObjectStore {
 public:
  static ObjectStore init(const std::filesystem::path& root, std::uint32_t n_osd);
  static ObjectStore open(const std::filesystem::path& root, std::uint32_t expected_n_osd = 0);

  const OsdStore& osds() const { return osds_; }
  const MetadataStore& metadata() const { return meta_; }

  /// Single-chunk PUT under a fresh id; the new version is visible on return.
  ObjectId put(std::string_view name, const ObjectData& data) const;

  PutSession begin_chunked_put(std::string_view name, DType dtype, const Shape& shape,
                               const Dims& chunk_dims) const;

  /// Writes one part. Throws kPartOutOfRange, kShapeMismatch, kChunkExists.
  std::uint64_t put_chunk(const SessionToken& token, std::uint64_t part, const ObjectData& data) const;

  /// Publishes the session's metadata. With verify_complete set, every part
  /// must exist first (kMissingChunks otherwise, nothing published).
  void commit(PutSession& session, bool verify_complete = true) const;

  ObjectMeta stat(std::string_view name) const { return meta_.lookup_meta(name); }
  std::vector<std::string> list() const { return meta_.list_names(); }

  std::pair<ObjectMeta, ObjectData> get(std::string_view name, const GetOptions& opts = {}) const;
  ObjectData get_chunk(std::string_view name, std::uint64_t part) const;

  /// Reads the version described by meta, whether or not it is still the one
  /// the name points to. Old versions stay readable because chunks are never
  /// deleted.
  ObjectData get_version(const ObjectMeta& meta, const GetOptions& opts = {}) const;

  std::filesystem::path chunk_location(const ObjectMeta& meta, std::uint64_t part) const;

 private:
  explicit ObjectStore(OsdStore osds) : osds_(std::move(osds)), meta_(osds_.meta_dir()) {}

  OsdStore osds_;
  MetadataStore meta_;
};

/// Copies a chunk (row-major, shape grid.chunk_dims) into its place in a full
/// row-major array of shape `full`. Exposed for the reassembly tests.
void place_chunk(const ChunkGrid& grid, const Shape& full, std::size_t elem_bytes,
                 std::uint64_t part, std::span<const std::byte> chunk, std::span<std::byte> out);

/// Inverse of place_chunk: extracts one chunk from a full array.
std::vector<std::byte> extract_chunk(const ChunkGrid& grid, const Shape& full, std::size_t elem_bytes,
                                     std::uint64_t part, std::span<const std::byte> full_bytes);

}  // namespace objstore
