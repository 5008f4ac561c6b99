#pragma once

// Little-endian encoding helpers shared by the CBM and CBF formats.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cbcl/error.hpp"
#include "cbcl/fileio.hpp"

namespace cbcl::detail {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

class ByteWriter {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }

  void put_bytes(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

  void put_crc() { put<std::uint32_t>(crc32(bytes_)); }

  std::vector<std::uint8_t> take() { return std::move(bytes_); }
  std::size_t size() const { return bytes_.size(); }
  void reserve(std::size_t n) { bytes_.reserve(n); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::string_view what)
      : bytes_(bytes), what_(what) {}

  template <typename T>
  T get() {
    static_assert(std::is_trivially_copyable_v<T>);
    require(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string get_string(std::size_t n) {
    require(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  void require(std::size_t n) const {
    if (bytes_.size() - pos_ < n)
      throw Error(ErrorCode::truncated, std::string(what_) + ": truncated at byte " +
                                            std::to_string(pos_) + " (need " + std::to_string(n) +
                                            " more, have " + std::to_string(bytes_.size() - pos_) +
                                            ")");
  }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::string_view what_;
  std::size_t pos_ = 0;
};

/// Consumes the magic. A file that stops partway through a correct magic
/// is truncated; anything else that does not match is not ours.
inline void expect_magic(ByteReader& r, std::string_view magic, std::string_view what) {
  const std::size_t n = std::min(r.remaining(), magic.size());
  const std::string head = r.get_string(n);
  if (head != magic.substr(0, n))
    throw Error(ErrorCode::bad_format,
                std::string(what) + ": bad magic (expected " + std::string(magic) + ")");
  if (n < magic.size())
    throw Error(ErrorCode::truncated, std::string(what) + ": file ends inside the magic");
}

/// Validates the trailing CRC32 and returns the payload without it.
inline std::span<const std::uint8_t> verify_crc(std::span<const std::uint8_t> bytes,
                                                std::string_view what) {
  if (bytes.size() < 4)
    throw Error(ErrorCode::truncated, std::string(what) + ": file too short for checksum");
  const auto payload = bytes.first(bytes.size() - 4);
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + payload.size(), 4);
  const std::uint32_t actual = crc32(payload);
  if (stored != actual)
    throw Error(ErrorCode::checksum_mismatch,
                std::string(what) + ": CRC32 mismatch (stored " + std::to_string(stored) +
                    ", computed " + std::to_string(actual) + ")");
  return payload;
}

}  // namespace cbcl::detail
