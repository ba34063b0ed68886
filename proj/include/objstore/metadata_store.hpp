// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "objstore/object_model.hpp"

namespace objstore {

/// Name -> ObjectMeta map emulated by one file per key in a directory. A
/// commit is a temp write + fsync + rename + directory fsync; the rename is
/// the visibility event. Lookups never lock and never cache.
class MetadataStore {
 public:
  explicit MetadataStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path entry_path(std::string_view name) const;

  void commit_meta(const ObjectMeta& meta) const;

  /// Throws kObjectNotFound or kCorruptMetadata.
  ObjectMeta lookup_meta(std::string_view name) const;

  /// Committed names in unspecified order; temp files are skipped.
  std::vector<std::string> list_names() const;

 private:
  std::filesystem::path dir_;
};

inline constexpr std::string_view kTempPrefix = ".tmp-";

}  // namespace objstore
