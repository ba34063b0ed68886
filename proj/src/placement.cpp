// SPDX-License-Identifier: Apache-2.0

#include "objstore/placement.hpp"

#include <algorithm>
#include <charconv>

namespace objstore {

std::uint64_t fnv1a64(std::span<const std::byte> bytes, std::uint64_t state) {
  return fnv1a64(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()),
                 state);
}

std::uint32_t osd_index(const ObjectId& id, std::uint32_t part, std::uint32_t n_osd) {
  std::array<std::uint8_t, 24> key{};
  std::copy(id.bytes().begin(), id.bytes().end(), key.begin());
  const auto wide = static_cast<std::uint64_t>(part);
  for (int i = 0; i < 8; ++i) key[16 + i] = static_cast<std::uint8_t>(wide >> (8 * i));
  return static_cast<std::uint32_t>(fnv1a64(std::span<const std::uint8_t>(key)) % n_osd);
}

std::string chunk_filename(const ObjectId& id, std::uint32_t part) {
  return id.hex() + "-" + std::to_string(part) + ".chunk";
}

std::optional<ChunkName> parse_chunk_filename(std::string_view filename) {
  constexpr std::string_view kSuffix = ".chunk";
  if (filename.size() < 32 + 1 + 1 + kSuffix.size() || !filename.ends_with(kSuffix) || filename[32] != '-')
    return std::nullopt;
  auto id = ObjectId::from_hex(filename.substr(0, 32));
  if (!id) return std::nullopt;
  auto digits = filename.substr(33, filename.size() - 33 - kSuffix.size());
  if (digits.size() > 1 && digits[0] == '0') return std::nullopt;
  std::uint32_t part = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), part);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  return ChunkName{*id, part};
}

}  // namespace objstore
