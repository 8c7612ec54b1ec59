// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

#ifndef ABIRIFT_BYTE_READER_HPP
#define ABIRIFT_BYTE_READER_HPP

#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>

#include "abirift/error.hpp"

namespace abirift::detail {

/// Little-endian cursor over a byte span. Every read is bounds checked and
/// throws Error(overrun_code) instead of reading past the end.
class ByteReader {
public:
  ByteReader(std::span<const std::uint8_t> data, ErrorCode overrun_code)
      : data_(data), overrun_(overrun_code) {}

  std::size_t offset() const { return pos_; }
  std::size_t size() const { return data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }
  bool at_end() const { return pos_ >= data_.size(); }

  void seek(std::size_t pos) {
    if (pos > data_.size())
      fail("seek past end");
    pos_ = pos;
  }

  void skip(std::uint64_t n) {
    need(n);
    pos_ += static_cast<std::size_t>(n);
  }

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint16_t u16() { return static_cast<std::uint16_t>(fixed(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(fixed(4)); }
  std::uint64_t u64() { return fixed(8); }

  /// Unsigned little-endian integer of 1..8 bytes.
  std::uint64_t fixed(std::size_t width) {
    need(width);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i)
      v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += width;
    return v;
  }

  std::uint64_t uleb() {
    std::uint64_t result = 0;
    unsigned shift = 0;
    for (;;) {
      std::uint8_t byte = u8();
      if (shift < 64)
        result |= static_cast<std::uint64_t>(byte & 0x7f) << shift;
      shift += 7;
      if ((byte & 0x80) == 0)
        break;
    }
    return result;
  }

  std::int64_t sleb() {
    std::int64_t result = 0;
    unsigned shift = 0;
    std::uint8_t byte = 0;
    do {
      byte = u8();
      if (shift < 64)
        result |= static_cast<std::int64_t>(
            static_cast<std::uint64_t>(byte & 0x7f) << shift);
      shift += 7;
    } while (byte & 0x80);
    if (shift < 64 && (byte & 0x40))
      result |= -(static_cast<std::int64_t>(1) << shift);
    return result;
  }

  /// NUL-terminated string; the terminator is consumed but not returned.
  std::string_view cstr() {
    const void *hit =
        std::memchr(data_.data() + pos_, 0, data_.size() - pos_);
    if (hit == nullptr)
      fail("unterminated string");
    auto len = static_cast<std::size_t>(static_cast<const std::uint8_t *>(hit) -
                                        (data_.data() + pos_));
    std::string_view s(reinterpret_cast<const char *>(data_.data() + pos_), len);
    pos_ += len + 1;
    return s;
  }

  std::span<const std::uint8_t> bytes(std::uint64_t n) {
    need(n);
    auto s = data_.subspan(pos_, static_cast<std::size_t>(n));
    pos_ += static_cast<std::size_t>(n);
    return s;
  }

private:
  void need(std::uint64_t n) const {
    if (n > data_.size() - pos_)
      fail("read past end of data");
  }
  [[noreturn]] void fail(const char *what) const {
    throw Error(overrun_, what);
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  ErrorCode overrun_;
};

/// NUL-terminated string at `offset` inside a string table, or empty when the
/// offset is out of range.
inline std::string_view string_at(std::span<const std::uint8_t> table,
                                  std::uint64_t offset) {
  if (offset >= table.size())
    return {};
  const auto *begin = table.data() + offset;
  const void *end = std::memchr(begin, 0, table.size() - offset);
  std::size_t len = end ? static_cast<std::size_t>(
                              static_cast<const std::uint8_t *>(end) - begin)
                        : table.size() - offset;
  return {reinterpret_cast<const char *>(begin), len};
}

} // namespace abirift::detail

#endif
