// SPDX-License-Identifier: Apache-2.0

#include "objstore/shared_file.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <utility>

#include "fs_util.hpp"
#include "objstore/error.hpp"

namespace fs = std::filesystem;

namespace objstore {

std::uint32_t stripe_count_for(std::uint32_t n_workers, std::uint32_t procs_per_stripe) {
  if (procs_per_stripe == 0) throw_error(ErrorCode::kConfigInvalid, "procs_per_stripe must be >= 1");
  return std::max<std::uint32_t>(1, n_workers / procs_per_stripe);
}

std::uint32_t SharedFileConfig::stripe_count() const { return stripe_count_for(n_workers, procs_per_stripe); }

ByteRange stripe_range(std::uint64_t file_bytes, std::uint32_t stripe_count, std::uint32_t stripe) {
  using u128 = unsigned __int128;
  auto edge = [&](std::uint64_t s) { return static_cast<std::uint64_t>(u128(s) * file_bytes / stripe_count); };
  return {edge(stripe), edge(stripe + std::uint64_t{1})};
}

std::vector<std::uint32_t> stripes_overlapping(std::uint64_t file_bytes, std::uint32_t stripe_count, ByteRange r) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t s = 0; s < stripe_count; ++s) {
    auto sr = stripe_range(file_bytes, stripe_count, s);
    if (sr.begin < sr.end && sr.begin < r.end && r.begin < sr.end) out.push_back(s);
  }
  return out;
}

fs::path sidecar_path(const fs::path& data_path) {
  auto p = data_path;
  p += ".cfg";
  return p;
}

std::string sidecar_line(DType dtype, const Shape& shape, std::uint32_t stripe_count) {
  return "dtype=" + std::string(dtype_name(dtype)) + " dims=" + format_dims(shape.dims()) +
         " stripe_count=" + std::to_string(stripe_count) + "\n";
}

namespace {

/// Per-path stripe mutexes for LockMode::kInProcess.
std::shared_ptr<std::vector<std::shared_mutex>> local_stripe_locks(const fs::path& path, std::uint32_t n) {
  static std::mutex mu;
  static std::map<std::string, std::weak_ptr<std::vector<std::shared_mutex>>> registry;
  std::lock_guard lk(mu);
  auto key = fs::absolute(path).lexically_normal().string();
  if (auto existing = registry[key].lock(); existing && existing->size() == n) return existing;
  auto fresh = std::make_shared<std::vector<std::shared_mutex>>(n);
  registry[key] = fresh;
  return fresh;
}

void check_workers(const Shape& shape, std::uint32_t n_workers) {
  if (n_workers == 0 || shape.rank() == 0 || shape[0] % n_workers != 0)
    throw_error(ErrorCode::kConfigInvalid, "leading dimension must split evenly across workers");
}

}  // namespace

SharedFile::SharedFile(int fd, fs::path path, DType dtype, Shape shape, std::uint32_t n_workers,
                       std::uint32_t stripe_count, LockMode mode)
    : fd_(fd),
      path_(std::move(path)),
      dtype_(dtype),
      shape_(std::move(shape)),
      n_workers_(n_workers),
      stripe_count_(stripe_count),
      mode_(mode) {
  if (mode_ == LockMode::kInProcess) local_locks_ = local_stripe_locks(path_, stripe_count_);
}

SharedFile::SharedFile(SharedFile&& o) noexcept
    : fd_(std::exchange(o.fd_, -1)),
      path_(std::move(o.path_)),
      dtype_(o.dtype_),
      shape_(std::move(o.shape_)),
      n_workers_(o.n_workers_),
      stripe_count_(o.stripe_count_),
      mode_(o.mode_),
      local_locks_(std::move(o.local_locks_)),
      tracing_(o.tracing_),
      trace_(std::move(o.trace_)) {}

SharedFile& SharedFile::operator=(SharedFile&& o) noexcept {
  if (this != &o) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(o.fd_, -1);
    path_ = std::move(o.path_);
    dtype_ = o.dtype_;
    shape_ = std::move(o.shape_);
    n_workers_ = o.n_workers_;
    stripe_count_ = o.stripe_count_;
    mode_ = o.mode_;
    local_locks_ = std::move(o.local_locks_);
    tracing_ = o.tracing_;
    trace_ = std::move(o.trace_);
  }
  return *this;
}

SharedFile::~SharedFile() {
  if (fd_ >= 0) ::close(fd_);
}

SharedFile SharedFile::create(const SharedFileConfig& config, LockMode mode) {
  check_workers(config.shape, config.n_workers);
  const auto stripes = config.stripe_count();
  const auto bytes = config.file_bytes();

  detail::UniqueFd fd(::open(config.path.c_str(), O_RDWR | O_CREAT | O_EXCL | O_CLOEXEC, 0644));
  if (!fd) throw_errno("create " + config.path.string());
  if (int rc = ::posix_fallocate(fd.get(), 0, static_cast<off_t>(bytes)); rc != 0) {
    // Some filesystems cannot reserve blocks; a sized sparse file still reads as zeros.
    if (rc != EOPNOTSUPP && rc != EINVAL) {
      errno = rc;
      throw_errno("fallocate " + config.path.string());
    }
    if (::ftruncate(fd.get(), static_cast<off_t>(bytes)) != 0) throw_errno("ftruncate " + config.path.string());
  }
  detail::fsync_fd(fd.get(), config.path.string());

  auto dir = config.path.parent_path().empty() ? fs::path(".") : config.path.parent_path();
  auto line = sidecar_line(config.dtype, config.shape, stripes);
  auto tmp = detail::write_temp_file(dir, {detail::as_bytes(line)});
  if (::rename(tmp.c_str(), sidecar_path(config.path).c_str()) != 0) {
    ::unlink(tmp.c_str());
    throw_errno("write sidecar for " + config.path.string());
  }
  detail::fsync_dir(dir);
  return SharedFile(fd.release(), config.path, config.dtype, config.shape, config.n_workers, stripes, mode);
}

SharedFile SharedFile::open(const fs::path& path, std::uint32_t n_workers, LockMode mode) {
  auto bytes = detail::read_file_if_exists(sidecar_path(path));
  if (!bytes) throw_error(ErrorCode::kIoError, "no sidecar for " + path.string());
  std::istringstream in(std::string(reinterpret_cast<const char*>(bytes->data()), bytes->size()));
  std::optional<DType> dtype;
  std::optional<Dims> dims;
  std::uint32_t stripes = 0;
  for (std::string field; in >> field;) {
    auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    auto key = std::string_view(field).substr(0, eq);
    auto value = std::string_view(field).substr(eq + 1);
    if (key == "dtype") dtype = parse_dtype(value);
    if (key == "dims") dims = parse_dims(value);
    if (key == "stripe_count") std::from_chars(value.data(), value.data() + value.size(), stripes);
  }
  if (!dtype || !dims || stripes == 0) throw_error(ErrorCode::kIoError, "malformed sidecar for " + path.string());
  Shape shape(*dims);
  check_workers(shape, n_workers);

  detail::UniqueFd fd(::open(path.c_str(), O_RDWR | O_CLOEXEC));
  if (!fd) throw_errno("open " + path.string());
  return SharedFile(fd.release(), path, *dtype, std::move(shape), n_workers, stripes, mode);
}

ByteRange SharedFile::region_of(std::uint32_t part) const {
  const auto block = file_bytes() / n_workers_;
  return {part * block, (part + std::uint64_t{1}) * block};
}

Shape SharedFile::region_shape() const {
  auto dims = shape_.dims();
  dims[0] /= n_workers_;
  return Shape(std::move(dims));
}

void SharedFile::lock_stripes(const std::vector<std::uint32_t>& stripes, bool exclusive) {
  std::size_t held = 0;
  try {
    for (; held < stripes.size(); ++held) lock_one(stripes[held], exclusive);  // ascending order only
  } catch (...) {
    unlock_stripes({stripes.begin(), stripes.begin() + static_cast<std::ptrdiff_t>(held)}, exclusive);
    throw;
  }
}

void SharedFile::lock_one(std::uint32_t s, bool exclusive) {
  if (mode_ == LockMode::kInProcess) {
    auto& m = (*local_locks_)[s];
    exclusive ? m.lock() : m.lock_shared();
  } else {
    auto r = stripe_range(file_bytes(), stripe_count_, s);
    struct flock fl {};
    fl.l_type = exclusive ? F_WRLCK : F_RDLCK;
    fl.l_whence = SEEK_SET;
    fl.l_start = static_cast<off_t>(r.begin);
    fl.l_len = static_cast<off_t>(r.end - r.begin);
    while (::fcntl(fd_, F_OFD_SETLKW, &fl) != 0) {
      if (errno == EINTR) continue;
      throw_errno("lock stripe " + std::to_string(s) + " of " + path_.string());
    }
  }
  if (tracing_) trace_.push_back({LockEvent::Kind::kAcquire, s});
}

void SharedFile::unlock_stripes(const std::vector<std::uint32_t>& stripes, bool exclusive) {
  for (auto it = stripes.rbegin(); it != stripes.rend(); ++it) {
    const auto s = *it;
    if (mode_ == LockMode::kInProcess) {
      auto& m = (*local_locks_)[s];
      exclusive ? m.unlock() : m.unlock_shared();
    } else {
      auto r = stripe_range(file_bytes(), stripe_count_, s);
      struct flock fl {};
      fl.l_type = F_UNLCK;
      fl.l_whence = SEEK_SET;
      fl.l_start = static_cast<off_t>(r.begin);
      fl.l_len = static_cast<off_t>(r.end - r.begin);
      ::fcntl(fd_, F_OFD_SETLK, &fl);
    }
    if (tracing_) trace_.push_back({LockEvent::Kind::kRelease, s});
  }
}

namespace {

class StripeGuard {
 public:
  explicit StripeGuard(std::function<void()> release) : release_(std::move(release)) {}
  ~StripeGuard() { release_(); }
  StripeGuard(const StripeGuard&) = delete;
  StripeGuard& operator=(const StripeGuard&) = delete;

 private:
  std::function<void()> release_;
};

}  // namespace

std::uint64_t SharedFile::write_region(std::uint32_t part, const ObjectData& data) {
  if (part >= n_workers_)
    throw_error(ErrorCode::kPartOutOfRange, std::to_string(part) + " >= workers " + std::to_string(n_workers_));
  if (data.dtype != dtype_ || data.shape != region_shape() || !data.valid())
    throw_error(ErrorCode::kShapeMismatch, "region is " + format_dims(region_shape().dims()) + " " +
                                               std::string(dtype_name(dtype_)));
  const auto region = region_of(part);
  const auto stripes = stripes_overlapping(file_bytes(), stripe_count_, region);

  lock_stripes(stripes, true);
  StripeGuard guard([&] { unlock_stripes(stripes, true); });
  detail::pwrite_all(fd_, data.payload, region.begin, path_.string());
  if (::fdatasync(fd_) != 0) throw_errno("fdatasync " + path_.string());
  if (tracing_) trace_.push_back({LockEvent::Kind::kWrite, 0});
  return data.payload.size();
}

ObjectData SharedFile::read_all() {
  ObjectData out(dtype_, shape_);
  std::vector<std::uint32_t> all(stripe_count_);
  for (std::uint32_t s = 0; s < stripe_count_; ++s) all[s] = s;
  lock_stripes(all, false);
  StripeGuard guard([&] { unlock_stripes(all, false); });
  detail::pread_all(fd_, out.payload, 0, path_.string());
  return out;
}

}  // namespace objstore
