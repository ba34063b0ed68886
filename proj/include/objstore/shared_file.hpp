// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

#include "objstore/object_model.hpp"

namespace objstore {

/// How stripe locks are taken. kFileRange uses open-file-description byte
/// range locks, which exclude other processes and other handles in the same
/// process. kInProcess is the threaded fallback: one mutex per stripe shared
/// by every handle on the same path inside this process.
enum class LockMode { kFileRange, kInProcess };

struct SharedFileConfig {
  std::filesystem::path path;
  DType dtype = DType::kI32;
  Shape shape;
  std::uint32_t n_workers = 1;
  std::uint32_t procs_per_stripe = 32;

  std::uint32_t stripe_count() const;
  std::uint64_t file_bytes() const { return shape.element_count() * elem_size(dtype); }
};

/// stripe_count = max(1, workers / procs_per_stripe)
std::uint32_t stripe_count_for(std::uint32_t n_workers, std::uint32_t procs_per_stripe);

struct ByteRange {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;  // exclusive
  friend bool operator==(const ByteRange&, const ByteRange&) = default;
};

/// Stripe s covers [s*L/n, (s+1)*L/n).
ByteRange stripe_range(std::uint64_t file_bytes, std::uint32_t stripe_count, std::uint32_t stripe);

/// Stripes whose byte range intersects r, ascending.
std::vector<std::uint32_t> stripes_overlapping(std::uint64_t file_bytes, std::uint32_t stripe_count,
                                               ByteRange r);

struct LockEvent {
  enum class Kind { kAcquire, kWrite, kRelease };
  Kind kind;
  std::uint32_t stripe;  // unused for kWrite
  friend bool operator==(const LockEvent&, const LockEvent&) = default;
};

/// One shared data file with its "<path>.cfg" sidecar. The data file is raw
/// row-major payload with no header. A handle is not meant to be shared
/// between threads: open one per writer, as each process would.
class SharedFile {
 public:
  /// Preallocates the file and writes the sidecar. Throws kIoError when the
  /// path already exists.
  static SharedFile create(const SharedFileConfig& config, LockMode mode = LockMode::kFileRange);
  /// Reopens using the sidecar. n_workers is not persisted; pass the writer
  /// count so part -> region mapping is known.
  static SharedFile open(const std::filesystem::path& path, std::uint32_t n_workers,
                         LockMode mode = LockMode::kFileRange);

  SharedFile(SharedFile&&) noexcept;
  SharedFile& operator=(SharedFile&&) noexcept;
  SharedFile(const SharedFile&) = delete;
  SharedFile& operator=(const SharedFile&) = delete;
  ~SharedFile();

  DType dtype() const { return dtype_; }
  const Shape& shape() const { return shape_; }
  std::uint32_t stripe_count() const { return stripe_count_; }
  std::uint32_t n_workers() const { return n_workers_; }
  std::uint64_t file_bytes() const { return shape_.element_count() * elem_size(dtype_); }

  /// Row block written by worker `part`: rows [part*R/P, (part+1)*R/P).
  ByteRange region_of(std::uint32_t part) const;
  /// Shape of one worker's row block.
  Shape region_shape() const;

  /// Takes exclusive locks on every overlapping stripe in ascending order,
  /// writes, fdatasyncs, then releases. Throws kPartOutOfRange, kShapeMismatch.
  std::uint64_t write_region(std::uint32_t part, const ObjectData& data);

  /// Full readback under shared stripe locks.
  ObjectData read_all();

  /// When enabled, every acquire/write/release is appended to the trace.
  void set_tracing(bool on) { tracing_ = on; }
  const std::vector<LockEvent>& trace() const { return trace_; }
  void clear_trace() { trace_.clear(); }

 private:
  SharedFile(int fd, std::filesystem::path path, DType dtype, Shape shape, std::uint32_t n_workers,
             std::uint32_t stripe_count, LockMode mode);

  void lock_stripes(const std::vector<std::uint32_t>& stripes, bool exclusive);
  void lock_one(std::uint32_t stripe, bool exclusive);
  void unlock_stripes(const std::vector<std::uint32_t>& stripes, bool exclusive);

  int fd_ = -1;
  std::filesystem::path path_;
  DType dtype_ = DType::kI32;
  Shape shape_;
  std::uint32_t n_workers_ = 1;
  std::uint32_t stripe_count_ = 1;
  LockMode mode_ = LockMode::kFileRange;
  std::shared_ptr<std::vector<std::shared_mutex>> local_locks_;  // kInProcess only
  bool tracing_ = false;
  std::vector<LockEvent> trace_;
};

std::filesystem::path sidecar_path(const std::filesystem::path& data_path);
/// "dtype=i32 dims=256x4096 stripe_count=2"
std::string sidecar_line(DType dtype, const Shape& shape, std::uint32_t stripe_count);

}  // namespace objstore
