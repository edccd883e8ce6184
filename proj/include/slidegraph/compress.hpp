#pragma once

// Block codecs for the edge cache. Three roles:
//   fast        byte-oriented LZ77 (LZ4-style sequences, 64 KiB window)
//   balanced    deflate level 1 (zlib)
//   high_ratio  deflate level 3 (zlib)

#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "slidegraph/binary_io.hpp"
#include "slidegraph/error.hpp"

namespace slidegraph {

enum class Codec { none, fast, balanced, high_ratio };

inline std::string_view to_string(Codec c) {
  switch (c) {
    case Codec::none: return "none";
    case Codec::fast: return "fast-lz";
    case Codec::balanced: return "deflate-1";
    case Codec::high_ratio: return "deflate-3";
  }
  return "?";
}

namespace lz {

inline constexpr std::size_t kMinMatch = 4;
inline constexpr std::size_t kWindow = 65535;
inline constexpr int kHashBits = 14;
// The last bytes are always emitted as literals so the match finder can read
// four bytes at any candidate position.
inline constexpr std::size_t kTailLiterals = 8;

inline std::uint32_t load32(const std::byte* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

inline std::uint32_t hash4(std::uint32_t v) { return (v * 2654435761u) >> (32 - kHashBits); }

inline void put_length(Bytes& out, std::size_t len) {
  while (len >= 255) {
    out.push_back(std::byte{255});
    len -= 255;
  }
  out.push_back(static_cast<std::byte>(len));
}

inline void put_varint(Bytes& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<std::byte>(v | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<std::byte>(v));
}

inline void emit(Bytes& out, const std::byte* literals, std::size_t lit_len, std::size_t offset,
                 std::size_t match_len) {
  const std::size_t ml = match_len ? match_len - kMinMatch : 0;
  const auto token = static_cast<std::uint8_t>((std::min<std::size_t>(lit_len, 15) << 4) |
                                               std::min<std::size_t>(ml, 15));
  out.push_back(std::byte{token});
  if (lit_len >= 15) put_length(out, lit_len - 15);
  out.insert(out.end(), literals, literals + lit_len);
  if (match_len == 0) return;
  out.push_back(static_cast<std::byte>(offset & 0xff));
  out.push_back(static_cast<std::byte>(offset >> 8));
  if (ml >= 15) put_length(out, ml - 15);
}

/// Output: varint uncompressed size, then sequences of
/// [token][literal length ext][literals][offset u16][match length ext].
/// The final sequence carries literals only.
inline Bytes compress(std::span<const std::byte> in) {
  Bytes out;
  out.reserve(in.size() / 2 + 16);
  put_varint(out, in.size());
  const std::byte* base = in.data();
  const std::size_t n = in.size();
  std::vector<std::uint32_t> table(std::size_t{1} << kHashBits, 0);  // position + 1
  std::size_t anchor = 0;
  std::size_t i = 0;
  if (n > kTailLiterals + kMinMatch) {
    const std::size_t limit = n - kTailLiterals;
    while (i < limit) {
      const std::uint32_t seq = load32(base + i);
      const std::uint32_t h = hash4(seq);
      const std::size_t cand = table[h];
      table[h] = static_cast<std::uint32_t>(i + 1);
      if (cand == 0 || i - (cand - 1) > kWindow || load32(base + cand - 1) != seq) {
        ++i;
        continue;
      }
      const std::size_t ref = cand - 1;
      std::size_t len = kMinMatch;
      while (i + len < limit && base[ref + len] == base[i + len]) ++len;
      emit(out, base + anchor, i - anchor, i - ref, len);
      i += len;
      anchor = i;
    }
  }
  emit(out, base + anchor, n - anchor, 0, 0);
  return out;
}

inline std::optional<Bytes> decompress(std::span<const std::byte> in) {
  std::size_t pos = 0;
  auto byte_at = [&](std::size_t p) { return static_cast<std::uint8_t>(in[p]); };
  std::uint64_t size = 0;
  for (int shift = 0;; shift += 7) {
    if (pos >= in.size() || shift > 63) return std::nullopt;
    const auto b = byte_at(pos++);
    size |= static_cast<std::uint64_t>(b & 0x7f) << shift;
    if (!(b & 0x80)) break;
  }
  if (size > (std::uint64_t{1} << 40)) return std::nullopt;
  Bytes out;
  out.reserve(size);
  auto read_length = [&](std::size_t base_len) -> std::optional<std::size_t> {
    std::size_t len = base_len;
    if (base_len != 15) return len;
    for (;;) {
      if (pos >= in.size()) return std::nullopt;
      const auto b = byte_at(pos++);
      len += b;
      if (b != 255) return len;
    }
  };
  while (pos < in.size()) {
    const auto token = byte_at(pos++);
    const auto lit = read_length(token >> 4);
    if (!lit || *lit > in.size() - pos || out.size() + *lit > size) return std::nullopt;
    out.insert(out.end(), in.begin() + pos, in.begin() + pos + *lit);
    pos += *lit;
    if (pos == in.size()) break;  // final literal-only sequence
    if (in.size() - pos < 2) return std::nullopt;
    const std::size_t offset = byte_at(pos) | (std::size_t{byte_at(pos + 1)} << 8);
    pos += 2;
    const auto ml = read_length(token & 0x0f);
    if (!ml) return std::nullopt;
    const std::size_t len = *ml + kMinMatch;
    if (offset == 0 || offset > out.size() || out.size() + len > size) return std::nullopt;
    const std::size_t from = out.size() - offset;
    for (std::size_t k = 0; k < len; ++k) out.push_back(out[from + k]);  // may overlap
  }
  if (out.size() != size) return std::nullopt;
  return out;
}

}  // namespace lz

namespace detail {

inline Bytes deflate(std::span<const std::byte> in, int level) {
  uLongf bound = compressBound(static_cast<uLong>(in.size()));
  Bytes out(8 + bound);
  const std::uint64_t size = in.size();
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::byte>(size >> (8 * i));
  const int rc = compress2(reinterpret_cast<Bytef*>(out.data() + 8), &bound,
                           reinterpret_cast<const Bytef*>(in.data()), static_cast<uLong>(in.size()), level);
  if (rc != Z_OK) fail(ErrorKind::invariant, "zlib compress2 failed: " + std::to_string(rc));
  out.resize(8 + bound);
  return out;
}

inline std::optional<Bytes> inflate(std::span<const std::byte> in) {
  if (in.size() < 8) return std::nullopt;
  std::uint64_t size = 0;
  for (int i = 0; i < 8; ++i) size |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  if (size > (std::uint64_t{1} << 40)) return std::nullopt;
  Bytes out(size);
  uLongf got = static_cast<uLongf>(size);
  const int rc = uncompress(reinterpret_cast<Bytef*>(out.data()), &got,
                            reinterpret_cast<const Bytef*>(in.data() + 8), static_cast<uLong>(in.size() - 8));
  if (rc != Z_OK || got != size) return std::nullopt;
  return out;
}

}  // namespace detail

inline Bytes compress(Codec codec, std::span<const std::byte> in) {
  switch (codec) {
    case Codec::none: return Bytes(in.begin(), in.end());
    case Codec::fast: return lz::compress(in);
    case Codec::balanced: return detail::deflate(in, 1);
    case Codec::high_ratio: return detail::deflate(in, 3);
  }
  fail(ErrorKind::invariant, "unknown codec");
}

/// std::nullopt when the payload is corrupt.
inline std::optional<Bytes> decompress(Codec codec, std::span<const std::byte> in) {
  switch (codec) {
    case Codec::none: return Bytes(in.begin(), in.end());
    case Codec::fast: return lz::decompress(in);
    case Codec::balanced:
    case Codec::high_ratio: return detail::inflate(in);
  }
  return std::nullopt;
}

}  // namespace slidegraph
