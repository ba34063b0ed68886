// SPDX-License-Identifier: Apache-2.0
//
// Little-endian field packing shared by the OBJM and OBJC codecs.

#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

namespace objstore::detail {

class ByteWriter {
 public:
  explicit ByteWriter(std::size_t reserve = 0) { buf_.reserve(reserve); }

  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::byte*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { buf_.push_back(std::byte{v}); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }

  std::vector<std::byte> take() { return std::move(buf_); }

 private:
  void le(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) buf_.push_back(std::byte(static_cast<std::uint8_t>(v >> (8 * i))));
  }

  std::vector<std::byte> buf_;
};

/// Bounds-checked cursor; every getter returns false once the input is short.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::byte> in) : in_(in) {}

  bool bytes(void* out, std::size_t n) {
    if (remaining() < n) return false;
    std::memcpy(out, in_.data() + pos_, n);
    pos_ += n;
    return true;
  }
  bool u8(std::uint8_t& v) { return le(v, 1); }
  bool u16(std::uint16_t& v) { return le(v, 2); }
  bool u32(std::uint32_t& v) { return le(v, 4); }
  bool u64(std::uint64_t& v) { return le(v, 8); }

  std::size_t remaining() const { return in_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  template <typename T>
  bool le(T& v, int width) {
    if (remaining() < static_cast<std::size_t>(width)) return false;
    std::uint64_t acc = 0;
    for (int i = 0; i < width; ++i) acc |= std::uint64_t(std::to_integer<std::uint8_t>(in_[pos_ + i])) << (8 * i);
    pos_ += width;
    v = static_cast<T>(acc);
    return true;
  }

  std::span<const std::byte> in_;
  std::size_t pos_ = 0;
};

}  // namespace objstore::detail
