// SPDX-License-Identifier: Apache-2.0

#include "objstore/object_model.hpp"

#include <sys/random.h>

#include <cerrno>
#include <charconv>

#include "byte_io.hpp"
#include "objstore/error.hpp"

namespace objstore {

std::string_view dtype_name(DType t) {
  switch (t) {
    case DType::kI32: return "i32";
    case DType::kF32: return "f32";
    case DType::kF64: return "f64";
  }
  return "?";
}

std::optional<DType> parse_dtype(std::string_view s) {
  if (s == "i32" || s == "I32") return DType::kI32;
  if (s == "f32" || s == "F32") return DType::kF32;
  if (s == "f64" || s == "F64") return DType::kF64;
  return std::nullopt;
}

std::optional<DType> dtype_from_code(std::uint8_t code) {
  if (code >= 1 && code <= 3) return static_cast<DType>(code);
  return std::nullopt;
}

// ---- ObjectId ------------------------------------------------------------

ObjectId ObjectId::generate() {
  // getrandom rather than a seeded PRNG: forked workers must never share state.
  Bytes b{};
  std::size_t got = 0;
  while (got < b.size()) {
    ssize_t n = ::getrandom(b.data() + got, b.size() - got, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("getrandom");
    }
    got += static_cast<std::size_t>(n);
  }
  b[6] = static_cast<std::uint8_t>((b[6] & 0x0f) | 0x40);
  b[8] = static_cast<std::uint8_t>((b[8] & 0x3f) | 0x80);
  return ObjectId(b);
}

std::string ObjectId::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(32, '0');
  for (std::size_t i = 0; i < bytes_.size(); ++i) {
    s[2 * i] = kDigits[bytes_[i] >> 4];
    s[2 * i + 1] = kDigits[bytes_[i] & 0x0f];
  }
  return s;
}

std::optional<ObjectId> ObjectId::from_hex(std::string_view hex) {
  if (hex.size() != 32) return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  Bytes b{};
  for (std::size_t i = 0; i < b.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    b[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return ObjectId(b);
}

bool ObjectId::is_nil() const {
  for (auto v : bytes_)
    if (v != 0) return false;
  return true;
}

// ---- Shape / grid --------------------------------------------------------

namespace {

std::optional<std::uint64_t> checked_product(const Dims& dims) {
  std::uint64_t p = 1;
  for (auto d : dims)
    if (__builtin_mul_overflow(p, d, &p)) return std::nullopt;
  return p;
}

}  // namespace

Shape::Shape(Dims dims) : dims_(std::move(dims)) {
  if (dims_.empty() || dims_.size() > 255)
    throw_error(ErrorCode::kInvariantViolation, "rank must be in [1, 255]");
  for (auto d : dims_)
    if (d == 0) throw_error(ErrorCode::kInvariantViolation, "zero dimension");
  if (!checked_product(dims_)) throw_error(ErrorCode::kInvariantViolation, "element count overflows 64 bits");
}

std::uint64_t Shape::element_count() const { return dims_.empty() ? 0 : *checked_product(dims_); }

std::string format_dims(const Dims& dims) {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(dims[i]);
  }
  return s;
}

std::optional<Dims> parse_dims(std::string_view text) {
  Dims out;
  while (true) {
    auto pos = text.find('x');
    auto field = text.substr(0, pos);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || v == 0) return std::nullopt;
    out.push_back(v);
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return out;
}

std::uint64_t ChunkGrid::chunk_elements() const { return checked_product(chunk_dims).value_or(0); }

Dims ChunkGrid::coord_of(std::uint64_t part) const {
  Dims c(grid_dims.size());
  for (std::size_t i = grid_dims.size(); i-- > 0;) {
    c[i] = part % grid_dims[i];
    part /= grid_dims[i];
  }
  return c;
}

std::uint64_t ChunkGrid::part_of(const Dims& coord) const {
  std::uint64_t p = 0;
  for (std::size_t i = 0; i < grid_dims.size(); ++i) p = p * grid_dims[i] + coord[i];
  return p;
}

ChunkGrid validate_chunking(const Shape& shape, const Dims& chunk_dims) {
  if (chunk_dims.size() != shape.rank())
    throw_error(ErrorCode::kRankMismatch,
                "chunk rank " + std::to_string(chunk_dims.size()) + " vs shape rank " + std::to_string(shape.rank()));
  ChunkGrid g;
  g.chunk_dims = chunk_dims;
  g.grid_dims.resize(chunk_dims.size());
  g.chunk_count = 1;
  for (std::size_t i = 0; i < chunk_dims.size(); ++i) {
    if (chunk_dims[i] == 0 || shape[i] % chunk_dims[i] != 0)
      throw_error(ErrorCode::kNonDivisibleChunk, format_dims(chunk_dims) + " into " + format_dims(shape.dims()));
    g.grid_dims[i] = shape[i] / chunk_dims[i];
    g.chunk_count *= g.grid_dims[i];
  }
  return g;
}

ChunkGrid single_chunk_grid(const Shape& shape) {
  return ChunkGrid{shape.dims(), Dims(shape.rank(), 1), 1};
}

// ---- ObjectData ----------------------------------------------------------

ObjectData::ObjectData(DType t, Shape s)
    : dtype(t), shape(std::move(s)), payload(shape.element_count() * elem_size(t)) {}

ObjectData::ObjectData(DType t, Shape s, std::vector<std::byte> bytes)
    : dtype(t), shape(std::move(s)), payload(std::move(bytes)) {
  if (!valid())
    throw_error(ErrorCode::kShapeMismatch, std::to_string(payload.size()) + " payload bytes for shape " +
                                               format_dims(shape.dims()) + " of " + std::string(dtype_name(dtype)));
}

// ---- OBJM codec ----------------------------------------------------------

std::size_t meta_encoded_size(std::size_t rank, bool chunked) {
  return kMetaFixedBytes + 8 * rank + (chunked ? 8 * rank + 8 : 0);
}

std::vector<std::byte> meta_encode(const ObjectMeta& meta) {
  const std::size_t rank = meta.shape.rank();
  detail::ByteWriter w(meta_encoded_size(rank, meta.chunked()));
  w.bytes(kMetaMagic.data(), kMetaMagic.size());
  w.u16(kMetaVersion);
  w.bytes(meta.id.bytes().data(), 16);
  w.u8(static_cast<std::uint8_t>(meta.dtype));
  w.u8(meta.chunked() ? 1 : 0);
  w.u8(static_cast<std::uint8_t>(rank));
  w.u8(0);
  for (auto d : meta.shape.dims()) w.u64(d);
  if (meta.grid) {
    for (auto d : meta.grid->chunk_dims) w.u64(d);
    w.u64(meta.grid->chunk_count);
  }
  return w.take();
}

ObjectMeta meta_decode(std::span<const std::byte> bytes) {
  detail::ByteReader r(bytes);
  std::array<char, 4> magic{};
  if (!r.bytes(magic.data(), magic.size())) throw_error(ErrorCode::kTruncatedRecord, "no magic");
  if (magic != kMetaMagic) throw_error(ErrorCode::kBadMagic, "expected OBJM");
  std::uint16_t version = 0;
  if (!r.u16(version)) throw_error(ErrorCode::kTruncatedRecord, "no version");
  if (version != kMetaVersion) throw_error(ErrorCode::kUnsupportedVersion, std::to_string(version));
  if (bytes.size() < kMetaFixedBytes) throw_error(ErrorCode::kTruncatedRecord, "short fixed header");

  ObjectId::Bytes idb{};
  std::uint8_t code = 0, chunked = 0, rank = 0, reserved = 0;
  r.bytes(idb.data(), idb.size());
  r.u8(code);
  r.u8(chunked);
  r.u8(rank);
  r.u8(reserved);
  if (bytes.size() < meta_encoded_size(rank, chunked != 0))
    throw_error(ErrorCode::kTruncatedRecord, std::to_string(bytes.size()) + " bytes");

  auto dtype = dtype_from_code(code);
  if (!dtype) throw_error(ErrorCode::kInvariantViolation, "dtype code " + std::to_string(code));
  if (chunked > 1 || reserved != 0 || rank == 0)
    throw_error(ErrorCode::kInvariantViolation, "bad flag, reserved byte or rank");
  if (bytes.size() != meta_encoded_size(rank, chunked != 0))
    throw_error(ErrorCode::kInvariantViolation, "trailing bytes");

  ObjectMeta meta;
  meta.id = ObjectId(idb);
  meta.dtype = *dtype;
  Dims dims(rank);
  for (auto& d : dims) r.u64(d);
  meta.shape = Shape(std::move(dims));  // throws kInvariantViolation
  if (chunked) {
    Dims cdims(rank);
    for (auto& d : cdims) r.u64(d);
    std::uint64_t count = 0;
    r.u64(count);
    ChunkGrid g;
    try {
      g = validate_chunking(meta.shape, cdims);
    } catch (const Error& e) {
      throw_error(ErrorCode::kInvariantViolation, e.what());
    }
    if (g.chunk_count != count) throw_error(ErrorCode::kInvariantViolation, "chunk_count disagrees with grid");
    meta.grid = std::move(g);
  }
  return meta;
}

// ---- names ---------------------------------------------------------------

namespace {

bool unreserved(unsigned char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.' ||
         c == '_' || c == '~';
}

}  // namespace

std::string encode_name(std::string_view name) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(name.size());
  for (std::size_t i = 0; i < name.size(); ++i) {
    auto c = static_cast<unsigned char>(name[i]);
    // A leading '.' would hide the entry among temp files (and "." / "..").
    if (unreserved(c) && !(i == 0 && c == '.')) {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0x0f];
    }
  }
  return out;
}

std::optional<std::string> decode_name(std::string_view encoded) {
  auto hexval = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  std::string out;
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    char c = encoded[i];
    if (c == '%') {
      if (i + 2 >= encoded.size()) return std::nullopt;
      int hi = hexval(encoded[i + 1]);
      int lo = hexval(encoded[i + 2]);
      if (hi < 0 || lo < 0) return std::nullopt;
      out += static_cast<char>(hi << 4 | lo);
      i += 2;
    } else if (unreserved(static_cast<unsigned char>(c)) && !(i == 0 && c == '.')) {
      out += c;
    } else {
      return std::nullopt;
    }
  }
  if (out.empty()) return std::nullopt;
  // Only canonical encodings decode, so the mapping stays injective both ways.
  if (encode_name(out) != encoded) return std::nullopt;
  return out;
}

}  // namespace objstore
