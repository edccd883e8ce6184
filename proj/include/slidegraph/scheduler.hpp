#pragma once

// Selective scheduling: a Bloom filter per shard over the source vertices of
// its edges. A shard none of whose sources changed in the previous iteration
// cannot produce an update and is skipped.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "slidegraph/binary_io.hpp"
#include "slidegraph/graph.hpp"
#include "slidegraph/storage.hpp"

namespace slidegraph {

inline constexpr double kDefaultBitsPerKey = 10.0;
inline constexpr std::uint32_t kDefaultHashCount = 7;
inline constexpr double kDefaultActivationThreshold = 0.001;
inline constexpr std::uint64_t kDefaultSeed = 0x9e3779b97f4a7c15ULL;

inline constexpr std::string_view kFilterMagic = "GMPF";

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

}  // namespace detail

class BloomFilter {
 public:
  BloomFilter() = default;

  /// Sized for `expected_keys` at `bits_per_key`; m is rounded up to whole
  /// 64-bit words and is 0 when no keys are expected.
  BloomFilter(std::uint64_t expected_keys, double bits_per_key, std::uint32_t hash_count,
              std::uint64_t seed = kDefaultSeed)
      : hash_count_(std::max<std::uint32_t>(1, hash_count)), seed_(seed) {
    const auto bits = static_cast<std::uint64_t>(std::ceil(static_cast<double>(expected_keys) * bits_per_key));
    words_.assign((bits + 63) / 64, 0);
  }

  void insert(std::uint64_t key) {
    if (words_.empty()) fail(ErrorKind::invariant, "insert into zero-size Bloom filter");
    const auto [h1, h2] = hashes(key);
    const std::uint64_t m = num_bits();
    for (std::uint32_t i = 0; i < hash_count_; ++i) {
      const std::uint64_t bit = (h1 + i * h2) % m;
      words_[bit >> 6] |= std::uint64_t{1} << (bit & 63);
    }
    ++inserted_;
  }

  bool test(std::uint64_t key) const {
    if (words_.empty()) return false;
    const auto [h1, h2] = hashes(key);
    const std::uint64_t m = num_bits();
    for (std::uint32_t i = 0; i < hash_count_; ++i) {
      const std::uint64_t bit = (h1 + i * h2) % m;
      if (!(words_[bit >> 6] >> (bit & 63) & 1)) return false;
    }
    return true;
  }

  std::uint64_t num_bits() const { return words_.size() * 64; }
  std::uint32_t hash_count() const { return hash_count_; }
  std::uint64_t inserted() const { return inserted_; }
  std::uint64_t seed() const { return seed_; }
  std::span<const std::uint64_t> words() const { return words_; }

  static BloomFilter from_parts(std::vector<std::uint64_t> words, std::uint32_t hash_count,
                                std::uint64_t inserted, std::uint64_t seed) {
    BloomFilter f;
    f.words_ = std::move(words);
    f.hash_count_ = hash_count;
    f.inserted_ = inserted;
    f.seed_ = seed;
    return f;
  }

  friend bool operator==(const BloomFilter&, const BloomFilter&) = default;

 private:
  std::pair<std::uint64_t, std::uint64_t> hashes(std::uint64_t key) const {
    const std::uint64_t h1 = detail::mix64(key ^ seed_);
    const std::uint64_t h2 = detail::mix64(key ^ detail::mix64(seed_ + 0x632be59bd9b4e019ULL)) | 1;
    return {h1, h2};
  }

  std::vector<std::uint64_t> words_;
  std::uint32_t hash_count_ = kDefaultHashCount;
  std::uint64_t inserted_ = 0;
  std::uint64_t seed_ = kDefaultSeed;
};

struct ShardFilter {
  std::uint32_t shard_id = 0;
  BloomFilter bloom;

  bool test(VertexId v) const { return bloom.test(v); }
};

/// Filter over the distinct source vertices of a shard.
inline ShardFilter build_filter(const ShardCSR& shard, double bits_per_key = kDefaultBitsPerKey,
                                std::uint32_t hash_count = kDefaultHashCount,
                                std::uint64_t seed = kDefaultSeed) {
  std::vector<VertexId> sources(shard.col);
  std::sort(sources.begin(), sources.end());
  sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
  ShardFilter f{shard.header.shard_id, BloomFilter(sources.size(), bits_per_key, hash_count, seed)};
  for (VertexId v : sources) f.bloom.insert(v);
  return f;
}

struct ProbeResult {
  bool hit = false;
  std::uint64_t probes = 0;
};

/// Probes active vertices in order, stopping at the first positive.
inline ProbeResult probe_active(std::span<const VertexId> active, const ShardFilter& filter) {
  ProbeResult r;
  for (VertexId v : active) {
    ++r.probes;
    if (filter.test(v)) {
      r.hit = true;
      break;
    }
  }
  return r;
}

/// Whether a shard must be loaded this iteration. Above the activation
/// threshold every shard is processed; below it only shards whose filter
/// reports an active source.
inline bool should_process(const ShardFilter& filter, std::span<const VertexId> active, double active_ratio,
                           double threshold = kDefaultActivationThreshold) {
  if (active_ratio > threshold) return true;
  return probe_active(active, filter).hit;
}

// filter-<k>.bin: "GMPF" ver m:u64 k:u32 inserted:u64 bits[m/64]:u64 checksum:u64

inline fs::path filter_path(const fs::path& dir, std::uint32_t k) {
  return dir / ("filter-" + std::to_string(k) + ".bin");
}

inline void write_filter(const ShardFilter& f, const fs::path& path) {
  ByteWriter w;
  w.put_magic(kFilterMagic);
  w.put<std::uint16_t>(kFormatVersion);
  w.put<std::uint64_t>(f.bloom.num_bits());
  w.put<std::uint32_t>(f.bloom.hash_count());
  w.put<std::uint64_t>(f.bloom.inserted());
  w.put_array<std::uint64_t>(f.bloom.words());
  w.seal();
  write_file_atomic(path, w.bytes());
}

/// The seed is not part of the file; callers only reuse filters built with the
/// default seed.
inline ShardFilter read_filter(const fs::path& path, std::uint32_t shard_id, std::uint64_t seed = kDefaultSeed) {
  const Bytes bytes = read_file(path);
  ByteReader r(bytes, path.string());
  r.expect_magic(kFilterMagic);
  r.expect_version(kFormatVersion);
  const auto m = r.get<std::uint64_t>();
  const auto k = r.get<std::uint32_t>();
  const auto inserted = r.get<std::uint64_t>();
  if (m % 64 != 0) fail(ErrorKind::format, path.string() + ": bit count not a multiple of 64");
  auto words = r.get_array<std::uint64_t>(m / 64);
  r.verify_checksum();
  r.expect_end();
  return {shard_id, BloomFilter::from_parts(std::move(words), k, inserted, seed)};
}

/// Bits a filter built with these parameters would have for `keys` keys.
inline std::uint64_t expected_filter_bits(std::uint64_t keys, double bits_per_key) {
  const auto bits = static_cast<std::uint64_t>(std::ceil(static_cast<double>(keys) * bits_per_key));
  return (bits + 63) / 64 * 64;
}

}  // namespace slidegraph
