// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "objstore/object_model.hpp"

namespace objstore {

inline constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

constexpr std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                                std::uint64_t state = kFnvOffsetBasis) {
  for (std::uint8_t b : bytes) {
    state ^= b;
    state *= kFnvPrime;
  }
  return state;
}

std::uint64_t fnv1a64(std::span<const std::byte> bytes, std::uint64_t state = kFnvOffsetBasis);

/// FNV-1a-64 over (id bytes || part as u64 little-endian), reduced mod n_osd.
/// Any holder of (id, part) can locate a chunk without a lookup.
std::uint32_t osd_index(const ObjectId& id, std::uint32_t part, std::uint32_t n_osd);

/// "<32 lowercase hex>-<part>.chunk"
std::string chunk_filename(const ObjectId& id, std::uint32_t part);

struct ChunkName {
  ObjectId id;
  std::uint32_t part = 0;
  friend bool operator==(const ChunkName&, const ChunkName&) = default;
};

/// Strict inverse of chunk_filename: rejects uppercase hex, leading zeros in
/// the part, and anything that chunk_filename would not have produced.
std::optional<ChunkName> parse_chunk_filename(std::string_view filename);

}  // namespace objstore
