// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace objstore::detail {

class UniqueFd {
 public:
  UniqueFd() = default;
  explicit UniqueFd(int fd) : fd_(fd) {}
  UniqueFd(UniqueFd&& o) noexcept : fd_(o.release()) {}
  UniqueFd& operator=(UniqueFd&& o) noexcept;
  UniqueFd(const UniqueFd&) = delete;
  UniqueFd& operator=(const UniqueFd&) = delete;
  ~UniqueFd();

  int get() const { return fd_; }
  explicit operator bool() const { return fd_ >= 0; }
  int release() {
    int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void reset();

 private:
  int fd_ = -1;
};

/// Loops over short writes / EINTR. Throws kIoError.
void write_all(int fd, std::span<const std::byte> data, const std::string& what);
void pwrite_all(int fd, std::span<const std::byte> data, std::uint64_t offset, const std::string& what);
void pread_all(int fd, std::span<std::byte> out, std::uint64_t offset, const std::string& what);
std::vector<std::byte> read_fd(int fd, const std::string& what);

/// nullopt when the file does not exist; other failures throw kIoError.
std::optional<std::vector<std::byte>> read_file_if_exists(const std::filesystem::path& p);

void fsync_fd(int fd, const std::string& what);
void fsync_dir(const std::filesystem::path& dir);

/// ".tmp-<random hex>"
std::string temp_name();

/// Creates dir/<temp_name()>, writes parts in order, fsyncs. Returns the path.
std::filesystem::path write_temp_file(const std::filesystem::path& dir,
                                      std::initializer_list<std::span<const std::byte>> parts);

std::span<const std::byte> as_bytes(const std::string& s);

}  // namespace objstore::detail
