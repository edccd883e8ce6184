#pragma once

#include <array>
#include <atomic>
#include <bit>
#include <cerrno>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <unistd.h>

#include "slidegraph/error.hpp"

namespace slidegraph {

namespace fs = std::filesystem;

using Bytes = std::vector<std::byte>;

// FNV-1a, 64-bit. Any single-byte change alters the result: each step is a
// bijection of the running state.
class Fnv1a64 {
 public:
  static constexpr std::uint64_t kOffsetBasis = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  void update(std::span<const std::byte> data) {
    std::uint64_t h = state_;
    for (std::byte b : data) {
      h ^= static_cast<std::uint64_t>(b);
      h *= kPrime;
    }
    state_ = h;
  }

  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = kOffsetBasis;
};

inline std::uint64_t fnv1a64(std::span<const std::byte> data) {
  Fnv1a64 h;
  h.update(data);
  return h.digest();
}

inline std::uint64_t fnv1a64(std::string_view s) {
  return fnv1a64(std::as_bytes(std::span(s.data(), s.size())));
}

namespace detail {

template <class T>
T byteswap(T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<std::byte, sizeof(T)> raw;
  std::memcpy(raw.data(), &value, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(raw[i], raw[sizeof(T) - 1 - i]);
  std::memcpy(&value, raw.data(), sizeof(T));
  return value;
}

template <class T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::big) return byteswap(value);
  return value;
}

}  // namespace detail

/// Appends little-endian values to a byte buffer.
class ByteWriter {
 public:
  template <class T>
    requires std::is_arithmetic_v<T>
  void put(T value) {
    value = detail::to_little(value);
    const auto* p = reinterpret_cast<const std::byte*>(&value);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }

  template <class T>
    requires std::is_arithmetic_v<T>
  void put_array(std::span<const T> values) {
    if constexpr (std::endian::native == std::endian::little) {
      const auto raw = std::as_bytes(values);
      buf_.insert(buf_.end(), raw.begin(), raw.end());
    } else {
      for (T v : values) put(v);
    }
  }

  void put_magic(std::string_view magic) {
    for (char c : magic) buf_.push_back(static_cast<std::byte>(c));
  }

  void reserve(std::size_t n) { buf_.reserve(n); }
  std::size_t size() const { return buf_.size(); }
  const Bytes& bytes() const { return buf_; }
  Bytes take() { return std::move(buf_); }

  /// Appends the FNV-1a checksum of everything written so far.
  void seal() { put(fnv1a64(buf_)); }

 private:
  Bytes buf_;
};

/// Bounds-checked little-endian reader over an in-memory file image.
class ByteReader {
 public:
  ByteReader(std::span<const std::byte> data, std::string context)
      : data_(data), context_(std::move(context)) {}

  template <class T>
    requires std::is_arithmetic_v<T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return detail::to_little(value);
  }

  template <class T>
    requires std::is_arithmetic_v<T>
  std::vector<T> get_array(std::uint64_t count) {
    if (count > remaining() / sizeof(T)) eof();
    std::vector<T> out(count);
    std::memcpy(out.data(), data_.data() + pos_, count * sizeof(T));
    pos_ += count * sizeof(T);
    if constexpr (std::endian::native == std::endian::big) {
      for (auto& v : out) v = detail::byteswap(v);
    }
    return out;
  }

  void expect_magic(std::string_view magic) {
    need(magic.size());
    if (std::memcmp(data_.data() + pos_, magic.data(), magic.size()) != 0) {
      fail(ErrorKind::bad_magic, context_ + ": bad magic, expected \"" + std::string(magic) + "\"");
    }
    pos_ += magic.size();
  }

  void expect_version(std::uint16_t supported) {
    const auto v = get<std::uint16_t>();
    if (v != supported) {
      fail(ErrorKind::unsupported_version,
           context_ + ": unsupported version " + std::to_string(v));
    }
  }

  /// Reads the trailing checksum and compares it with the hash of all bytes
  /// before it. Must be called when exactly 8 bytes remain.
  void verify_checksum() {
    const std::size_t covered = pos_;
    const auto stored = get<std::uint64_t>();
    if (stored != fnv1a64(data_.first(covered))) {
      fail(ErrorKind::checksum, context_ + ": checksum mismatch");
    }
  }

  void expect_end() const {
    if (pos_ != data_.size()) {
      fail(ErrorKind::format, context_ + ": " + std::to_string(data_.size() - pos_) +
                                  " trailing bytes");
    }
  }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  const std::string& context() const { return context_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) eof();
  }
  [[noreturn]] void eof() const {
    fail(ErrorKind::unexpected_eof, context_ + ": unexpected end of file");
  }

  std::span<const std::byte> data_;
  std::size_t pos_ = 0;
  std::string context_;
};

/// Read accounting. A reader that only moves forward keeps `sequential` true.
struct IoCounter {
  std::uint64_t bytes = 0;
  std::uint64_t reads = 0;
  std::uint64_t files = 0;
  bool sequential = true;
};

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    const int err = errno;
    fail(err == ENOENT ? ErrorKind::not_found : ErrorKind::io,
         path.string() + ": " + std::strerror(err));
  }
  return f;
}

/// Reads a whole file front-to-back in fixed-size chunks.
inline Bytes read_file(const fs::path& path, IoCounter* counter = nullptr) {
  constexpr std::size_t kChunk = 1 << 20;
  FilePtr f = open_file(path, "rb");
  Bytes out;
  std::error_code ec;
  if (auto sz = fs::file_size(path, ec); !ec) out.reserve(sz);
  std::uint64_t offset = 0;
  for (;;) {
    const std::size_t old = out.size();
    out.resize(old + kChunk);
    const std::size_t got = std::fread(out.data() + old, 1, kChunk, f.get());
    out.resize(old + got);
    if (counter && got > 0) {
      if (static_cast<std::uint64_t>(std::ftell(f.get())) != offset + got) counter->sequential = false;
      counter->bytes += got;
      counter->reads += 1;
    }
    offset += got;
    if (got < kChunk) {
      if (std::ferror(f.get())) fail(ErrorKind::io, path.string() + ": read error");
      break;
    }
  }
  if (counter) counter->files += 1;
  return out;
}

/// Writes bytes to a temporary sibling and renames it over `path`.
inline void write_file_atomic(const fs::path& path, std::span<const std::byte> data) {
  static std::atomic<std::uint64_t> sequence{0};
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(sequence++);
  {
    FilePtr f = open_file(tmp, "wb");
    if (!data.empty() && std::fwrite(data.data(), 1, data.size(), f.get()) != data.size()) {
      fail(ErrorKind::io, tmp.string() + ": write failed");
    }
    if (std::fflush(f.get()) != 0) fail(ErrorKind::io, tmp.string() + ": flush failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::io, path.string() + ": rename failed: " + ec.message());
}

}  // namespace slidegraph
