// SPDX-License-Identifier: Apache-2.0

#include "objstore/client.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "objstore/error.hpp"

namespace fs = std::filesystem;

namespace objstore {

std::vector<std::byte> SessionToken::serialize() const {
  ObjectMeta m;
  m.id = id;
  m.dtype = dtype;
  m.shape = shape;
  m.grid = grid;
  return meta_encode(m);
}

SessionToken SessionToken::deserialize(std::span<const std::byte> bytes) {
  auto m = meta_decode(bytes);
  return SessionToken{m.id, m.dtype, m.shape, m.layout()};
}

SessionToken PutSession::token() const { return SessionToken{meta_.id, meta_.dtype, meta_.shape, meta_.layout()}; }

ObjectStore ObjectStore::init(const fs::path& root, std::uint32_t n_osd) {
  return ObjectStore(OsdStore::init(root, n_osd));
}

ObjectStore ObjectStore::open(const fs::path& root, std::uint32_t expected_n_osd) {
  return ObjectStore(OsdStore::open(root, expected_n_osd));
}

ObjectId ObjectStore::put(std::string_view name, const ObjectData& data) const {
  if (name.empty()) throw_error(ErrorCode::kInvariantViolation, "empty object name");
  if (!data.valid()) throw_error(ErrorCode::kShapeMismatch, "payload length does not match shape");
  ObjectMeta meta{std::string(name), ObjectId::generate(), data.dtype, data.shape, std::nullopt};
  osds_.write_chunk(meta.id, 0, data);
  meta_.commit_meta(meta);
  return meta.id;
}

PutSession ObjectStore::begin_chunked_put(std::string_view name, DType dtype, const Shape& shape,
                                          const Dims& chunk_dims) const {
  if (name.empty()) throw_error(ErrorCode::kInvariantViolation, "empty object name");
  auto grid = validate_chunking(shape, chunk_dims);
  if (grid.chunk_count > std::numeric_limits<std::uint32_t>::max())
    throw_error(ErrorCode::kInvariantViolation, "too many chunks");
  return PutSession(ObjectMeta{std::string(name), ObjectId::generate(), dtype, shape, std::move(grid)});
}

std::uint64_t ObjectStore::put_chunk(const SessionToken& token, std::uint64_t part, const ObjectData& data) const {
  if (part >= token.grid.chunk_count)
    throw_error(ErrorCode::kPartOutOfRange,
                std::to_string(part) + " >= chunk_count " + std::to_string(token.grid.chunk_count));
  if (data.dtype != token.dtype || data.shape.dims() != token.grid.chunk_dims)
    throw_error(ErrorCode::kShapeMismatch, "chunk is " + format_dims(data.shape.dims()) + " " +
                                               std::string(dtype_name(data.dtype)) + ", session expects " +
                                               format_dims(token.grid.chunk_dims) + " " +
                                               std::string(dtype_name(token.dtype)));
  return osds_.write_chunk(token.id, static_cast<std::uint32_t>(part), data);
}

void ObjectStore::commit(PutSession& session, bool verify_complete) const {
  if (session.committed_) throw_error(ErrorCode::kAlreadyCommitted, session.meta_.name);
  if (verify_complete) {
    std::uint64_t missing = 0;
    const auto count = session.parts_expected();
    for (std::uint64_t p = 0; p < count; ++p)
      if (!osds_.chunk_exists(session.meta_.id, static_cast<std::uint32_t>(p))) ++missing;
    if (missing)
      throw_error(ErrorCode::kMissingChunks,
                  std::to_string(missing) + " of " + std::to_string(count) + " parts absent for " + session.meta_.name);
  }
  meta_.commit_meta(session.meta_);
  session.committed_ = true;
}

fs::path ObjectStore::chunk_location(const ObjectMeta& meta, std::uint64_t part) const {
  return osds_.chunk_path(meta.id, static_cast<std::uint32_t>(part));
}

// ---- reassembly -------------------------------------------------------------

namespace {

/// Calls fn(chunk_elem_offset, full_elem_offset, run_elems) for every
/// contiguous innermost-axis run of one chunk.
template <typename Fn>
void for_each_run(const ChunkGrid& grid, const Shape& full, std::uint64_t part, Fn&& fn) {
  const std::size_t rank = grid.rank();
  const auto coord = grid.coord_of(part);
  Dims stride(rank, 1);
  for (std::size_t i = rank - 1; i-- > 0;) stride[i] = stride[i + 1] * full[i + 1];

  std::uint64_t base = 0;
  for (std::size_t i = 0; i < rank; ++i) base += coord[i] * grid.chunk_dims[i] * stride[i];

  const std::uint64_t run = grid.chunk_dims[rank - 1];
  Dims idx(rank, 0);  // position within the chunk; last axis stays 0
  std::uint64_t chunk_off = 0;
  for (;;) {
    std::uint64_t full_off = base;
    for (std::size_t i = 0; i + 1 < rank; ++i) full_off += idx[i] * stride[i];
    fn(chunk_off, full_off, run);
    chunk_off += run;
    std::size_t axis = rank - 1;
    while (axis-- > 0) {
      if (++idx[axis] < grid.chunk_dims[axis]) break;
      idx[axis] = 0;
    }
    if (axis == static_cast<std::size_t>(-1)) break;
  }
}

}  // namespace

void place_chunk(const ChunkGrid& grid, const Shape& full, std::size_t elem_bytes, std::uint64_t part,
                 std::span<const std::byte> chunk, std::span<std::byte> out) {
  for_each_run(grid, full, part, [&](std::uint64_t c, std::uint64_t f, std::uint64_t n) {
    std::memcpy(out.data() + f * elem_bytes, chunk.data() + c * elem_bytes, n * elem_bytes);
  });
}

std::vector<std::byte> extract_chunk(const ChunkGrid& grid, const Shape& full, std::size_t elem_bytes,
                                     std::uint64_t part, std::span<const std::byte> full_bytes) {
  std::vector<std::byte> out(grid.chunk_elements() * elem_bytes);
  for_each_run(grid, full, part, [&](std::uint64_t c, std::uint64_t f, std::uint64_t n) {
    std::memcpy(out.data() + c * elem_bytes, full_bytes.data() + f * elem_bytes, n * elem_bytes);
  });
  return out;
}

ObjectData ObjectStore::get_version(const ObjectMeta& meta, const GetOptions& opts) const {
  const auto grid = meta.layout();
  auto check = [&](const ObjectData& chunk, std::uint64_t part) {
    if (chunk.dtype != meta.dtype || chunk.shape.dims() != grid.chunk_dims)
      throw_error(ErrorCode::kCorruptChunk, "chunk " + std::to_string(part) + " of " + meta.id.hex() +
                                                " disagrees with its metadata");
  };

  if (grid.chunk_count == 1) {
    auto chunk = osds_.read_chunk(meta.id, 0);
    check(chunk, 0);
    chunk.shape = meta.shape;
    return chunk;
  }

  ObjectData out(meta.dtype, meta.shape);
  const auto esize = elem_size(meta.dtype);
  auto read_one = [&](std::uint64_t part) {
    auto chunk = osds_.read_chunk(meta.id, static_cast<std::uint32_t>(part));
    check(chunk, part);
    place_chunk(grid, meta.shape, esize, part, chunk.payload, out.payload);
  };

  const auto threads = std::min<std::uint64_t>(std::max(1u, opts.read_threads), grid.chunk_count);
  if (threads <= 1) {
    for (std::uint64_t p = 0; p < grid.chunk_count; ++p) read_one(p);
    return out;
  }

  // Chunks land in disjoint regions of `out`, so order does not matter.
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> pool;
    for (std::uint64_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::uint64_t p; (p = next.fetch_add(1)) < grid.chunk_count;) {
          try {
            read_one(p);
          } catch (...) {
            std::lock_guard lk(failure_mu);
            if (!failure) failure = std::current_exception();
            next = grid.chunk_count;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::pair<ObjectMeta, ObjectData> ObjectStore::get(std::string_view name, const GetOptions& opts) const {
  auto meta = meta_.lookup_meta(name);
  auto data = get_version(meta, opts);
  return {std::move(meta), std::move(data)};
}

ObjectData ObjectStore::get_chunk(std::string_view name, std::uint64_t part) const {
  auto meta = meta_.lookup_meta(name);
  const auto grid = meta.layout();
  if (part >= grid.chunk_count)
    throw_error(ErrorCode::kPartOutOfRange,
                std::to_string(part) + " >= chunk_count " + std::to_string(grid.chunk_count));
  auto chunk = osds_.read_chunk(meta.id, static_cast<std::uint32_t>(part));
  if (chunk.dtype != meta.dtype || chunk.shape.dims() != grid.chunk_dims)
    throw_error(ErrorCode::kCorruptChunk, "chunk disagrees with its metadata");
  return chunk;
}

}  // namespace objstore
