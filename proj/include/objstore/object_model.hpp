// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <cstring>
#include <type_traits>
#include <vector>

namespace objstore {

enum class DType : std::uint8_t { kI32 = 1, kF32 = 2, kF64 = 3 };

constexpr std::size_t elem_size(DType t) {
  switch (t) {
    case DType::kI32:
    case DType::kF32:
      return 4;
    case DType::kF64:
      return 8;
  }
  return 0;
}

/// Lowercase names used on the command line and in CSV output: i32, f32, f64.
std::string_view dtype_name(DType t);
std::optional<DType> parse_dtype(std::string_view s);
std::optional<DType> dtype_from_code(std::uint8_t code);

/// 128-bit random (version 4) UUID naming one immutable object version.
class ObjectId {
 public:
  using Bytes = std::array<std::uint8_t, 16>;

  constexpr ObjectId() = default;
  constexpr explicit ObjectId(const Bytes& b) : bytes_(b) {}

  static ObjectId generate();
  static std::optional<ObjectId> from_hex(std::string_view hex);

  const Bytes& bytes() const { return bytes_; }
  std::string hex() const;
  bool is_nil() const;

  friend bool operator==(const ObjectId&, const ObjectId&) = default;
  friend auto operator<=>(const ObjectId&, const ObjectId&) = default;

 private:
  Bytes bytes_{};
};

using Dims = std::vector<std::uint64_t>;

/// Array extents. rank >= 1, every dim >= 1, element count fits in 64 bits.
class Shape {
 public:
  Shape() = default;
  /// Throws kInvariantViolation when the dims break the invariants above.
  explicit Shape(Dims dims);

  std::size_t rank() const { return dims_.size(); }
  const Dims& dims() const { return dims_; }
  std::uint64_t operator[](std::size_t i) const { return dims_[i]; }
  std::uint64_t element_count() const;

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  Dims dims_;
};

/// Formats dims as "RxC" style text, e.g. "64x4096".
std::string format_dims(const Dims& dims);
/// Parses "64x4096"; returns nullopt on malformed text or zero entries.
std::optional<Dims> parse_dims(std::string_view text);

/// Regular decomposition of a shape into equal chunks. Part numbers are the
/// row-major enumeration of grid coordinates.
struct ChunkGrid {
  Dims chunk_dims;
  Dims grid_dims;
  std::uint64_t chunk_count = 0;

  std::size_t rank() const { return chunk_dims.size(); }
  std::uint64_t chunk_elements() const;
  Dims coord_of(std::uint64_t part) const;
  std::uint64_t part_of(const Dims& coord) const;

  friend bool operator==(const ChunkGrid&, const ChunkGrid&) = default;
};

/// Throws kRankMismatch or kNonDivisibleChunk; zero entries in chunk_dims are
/// reported as kNonDivisibleChunk.
ChunkGrid validate_chunking(const Shape& shape, const Dims& chunk_dims);

/// The grid an unchunked object implicitly uses: one chunk covering it all.
ChunkGrid single_chunk_grid(const Shape& shape);

struct ObjectMeta {
  std::string name;
  ObjectId id;
  DType dtype = DType::kI32;
  Shape shape;
  std::optional<ChunkGrid> grid;  // present iff the object is chunked

  bool chunked() const { return grid.has_value(); }
  /// grid if chunked, else the single whole-object chunk.
  ChunkGrid layout() const { return grid ? *grid : single_chunk_grid(shape); }
  std::uint64_t byte_size() const { return shape.element_count() * elem_size(dtype); }

  friend bool operator==(const ObjectMeta&, const ObjectMeta&) = default;
};

/// Dense row-major little-endian array.
struct ObjectData {
  DType dtype = DType::kI32;
  Shape shape;
  std::vector<std::byte> payload;

  ObjectData() = default;
  ObjectData(DType t, Shape s);  // zero-filled
  ObjectData(DType t, Shape s, std::vector<std::byte> bytes);

  template <typename T>
  static ObjectData from_values(DType t, Shape s, std::span<const T> values);

  std::uint64_t expected_bytes() const { return shape.element_count() * elem_size(dtype); }
  bool valid() const { return payload.size() == expected_bytes(); }

  friend bool operator==(const ObjectData&, const ObjectData&) = default;
};

template <typename T>
ObjectData ObjectData::from_values(DType t, Shape s, std::span<const T> values) {
  static_assert(std::is_trivially_copyable_v<T>);
  static_assert(std::endian::native == std::endian::little, "payloads are stored little-endian");
  std::vector<std::byte> bytes(values.size_bytes());
  if (!values.empty()) {
    std::memcpy(bytes.data(), values.data(), values.size_bytes());
  }
  return ObjectData(t, std::move(s), std::move(bytes));
}

// "OBJM" metadata record. Layout, all integers little-endian:
//   magic "OBJM" | version u16 = 1 | id 16B | dtype u8 | chunked u8 | rank u8 |
//   reserved u8 = 0 | dims rank x u64 | [chunk_dims rank x u64 | chunk_count u64]
// The name is not part of the record; the metadata filename is the key.
inline constexpr std::array<char, 4> kMetaMagic{'O', 'B', 'J', 'M'};
inline constexpr std::uint16_t kMetaVersion = 1;
inline constexpr std::size_t kMetaFixedBytes = 26;

std::size_t meta_encoded_size(std::size_t rank, bool chunked);
std::vector<std::byte> meta_encode(const ObjectMeta& meta);
/// The returned meta has an empty name. Throws kBadMagic, kUnsupportedVersion,
/// kTruncatedRecord or kInvariantViolation.
ObjectMeta meta_decode(std::span<const std::byte> bytes);

/// Percent-encodes a user key into a safe single path component.
std::string encode_name(std::string_view name);
/// Inverse of encode_name; nullopt when the text is not a valid encoding.
std::optional<std::string> decode_name(std::string_view encoded);

}  // namespace objstore
