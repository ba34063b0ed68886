// SPDX-License-Identifier: Apache-2.0

#include "objstore/metadata_store.hpp"

#include <unistd.h>

#include "fs_util.hpp"
#include "objstore/error.hpp"

namespace fs = std::filesystem;

namespace objstore {

fs::path MetadataStore::entry_path(std::string_view name) const {
  if (name.empty()) throw_error(ErrorCode::kInvariantViolation, "empty object name");
  return dir_ / encode_name(name);
}

void MetadataStore::commit_meta(const ObjectMeta& meta) const {
  const auto target = entry_path(meta.name);
  const auto record = meta_encode(meta);
  auto tmp = detail::write_temp_file(dir_, {record});
  if (::rename(tmp.c_str(), target.c_str()) != 0) {
    const int err = errno;
    ::unlink(tmp.c_str());
    errno = err;
    throw_errno("commit " + target.string());
  }
  detail::fsync_dir(dir_);
}

ObjectMeta MetadataStore::lookup_meta(std::string_view name) const {
  const auto path = entry_path(name);
  // One open + read: a commit racing with us swaps the directory entry, but
  // this descriptor keeps the record it opened.
  auto bytes = detail::read_file_if_exists(path);
  if (!bytes) throw_error(ErrorCode::kObjectNotFound, std::string(name));
  ObjectMeta meta;
  try {
    meta = meta_decode(*bytes);
  } catch (const Error& e) {
    throw_error(ErrorCode::kCorruptMetadata, std::string(name) + ": " + e.what());
  }
  meta.name = std::string(name);
  return meta;
}

std::vector<std::string> MetadataStore::list_names() const {
  std::vector<std::string> names;
  std::error_code ec;
  fs::directory_iterator it(dir_, ec);
  if (ec) throw_error(ErrorCode::kIoError, "list " + dir_.string() + ": " + ec.message());
  for (const auto& entry : it) {
    const auto file = entry.path().filename().string();
    if (file.starts_with('.')) continue;
    if (auto name = decode_name(file)) names.push_back(std::move(*name));
  }
  return names;
}

}  // namespace objstore
