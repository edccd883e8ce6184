#pragma once

#include <atomic>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <unistd.h>

#include "slidegraph/compress.hpp"
#include "slidegraph/error.hpp"

namespace slidegraph {

/// 0 leaves caching to the OS page cache; 1-4 keep shards in memory with
/// increasingly aggressive compression.
enum class CacheMode : int { page_cache = 0, raw = 1, fast = 2, balanced = 3, high_ratio = 4 };

inline Codec codec_of(CacheMode mode) {
  switch (mode) {
    case CacheMode::page_cache:
    case CacheMode::raw: return Codec::none;
    case CacheMode::fast: return Codec::fast;
    case CacheMode::balanced: return Codec::balanced;
    case CacheMode::high_ratio: return Codec::high_ratio;
  }
  return Codec::none;
}

/// Compression ratio assumed when choosing a mode.
inline std::uint64_t assumed_ratio(CacheMode mode) {
  switch (mode) {
    case CacheMode::page_cache:
    case CacheMode::raw: return 1;
    case CacheMode::fast: return 2;
    case CacheMode::balanced: return 4;
    case CacheMode::high_ratio: return 5;
  }
  return 1;
}

inline std::optional<CacheMode> parse_cache_mode(int m) {
  if (m < 0 || m > 4) return std::nullopt;
  return static_cast<CacheMode>(m);
}

/// Lowest mode whose assumed ratio fits all shard bytes into the budget, or the
/// highest-ratio mode when none does.
inline CacheMode select_mode(std::uint64_t total_shard_bytes, std::uint64_t budget) {
  for (int m = 1; m <= 4; ++m) {
    const auto mode = static_cast<CacheMode>(m);
    if (static_cast<unsigned __int128>(total_shard_bytes) <=
        static_cast<unsigned __int128>(budget) * assumed_ratio(mode)) {
      return mode;
    }
  }
  return CacheMode::high_ratio;
}

struct CacheEntry {
  std::uint32_t shard_id = 0;
  Codec codec = Codec::none;
  Bytes payload;
  std::uint64_t uncompressed_size = 0;
};

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t evictions = 0;
  std::uint64_t integrity_failures = 0;
  std::uint64_t hit_bytes = 0;   // shard bytes served from memory
  std::uint64_t miss_bytes = 0;  // shard bytes that had to come from disk
  std::uint64_t resident_bytes = 0;
  std::uint64_t budget_bytes = 0;
  std::uint64_t entries = 0;

  double theta() const {
    const auto total = hit_bytes + miss_bytes;
    return total == 0 ? 0.0 : static_cast<double>(miss_bytes) / static_cast<double>(total);
  }
};

/// Fraction of needed shard bytes read from disk (0 = everything cached).
inline double measure_theta(const CacheStats& stats) { return stats.theta(); }

/// Compressed edge cache. Without LRU, shards are kept first-come-first-kept
/// until the budget is full and never evicted.
///
/// get() may be called from any number of workers at once. After every miss
/// the caller hands the bytes it read from disk to admit(), which accounts
/// them as miss traffic and stores them if they fit.
class EdgeCache {
 public:
  EdgeCache(CacheMode mode, std::uint64_t budget_bytes, std::size_t num_shards, bool lru = false)
      : mode_(mode), codec_(codec_of(mode)), budget_(budget_bytes), lru_(lru), slots_(num_shards) {}

  CacheMode mode() const { return mode_; }
  std::uint64_t budget() const { return budget_; }

  std::optional<Bytes> get(std::uint32_t shard_id) {
    std::shared_ptr<const CacheEntry> entry;
    {
      std::shared_lock lock(mutex_);
      if (shard_id < slots_.size()) entry = slots_[shard_id];
    }
    if (!entry) {
      misses_.fetch_add(1, std::memory_order_relaxed);
      return std::nullopt;
    }
    auto payload = decompress(entry->codec, entry->payload);
    if (!payload || payload->size() != entry->uncompressed_size) {
      integrity_failures_.fetch_add(1, std::memory_order_relaxed);
      misses_.fetch_add(1, std::memory_order_relaxed);
      drop(shard_id, entry);
      return std::nullopt;
    }
    hits_.fetch_add(1, std::memory_order_relaxed);
    hit_bytes_.fetch_add(payload->size(), std::memory_order_relaxed);
    if (lru_) touch(shard_id);
    return payload;
  }

  /// Returns true when the shard is now resident.
  bool admit(std::uint32_t shard_id, std::span<const std::byte> bytes) {
    miss_bytes_.fetch_add(bytes.size(), std::memory_order_relaxed);
    if (mode_ == CacheMode::page_cache || shard_id >= slots_.size()) return false;
    {
      std::shared_lock lock(mutex_);
      if (slots_[shard_id]) return true;
      if (!lru_ && resident_ >= budget_) return false;
    }
    auto entry = std::make_shared<CacheEntry>();
    entry->shard_id = shard_id;
    entry->codec = codec_;
    entry->payload = compress(codec_, bytes);
    entry->payload.shrink_to_fit();
    entry->uncompressed_size = bytes.size();
    const std::uint64_t size = entry->payload.size();

    std::unique_lock lock(mutex_);
    if (slots_[shard_id]) return true;
    if (size > budget_) return false;
    if (resident_ + size > budget_ && lru_) {
      std::lock_guard order_lock(lru_mutex_);
      while (resident_ + size > budget_ && !lru_order_.empty()) {
        const auto victim = lru_order_.back();
        lru_order_.pop_back();
        lru_pos_.erase(victim);
        resident_ -= slots_[victim]->payload.size();
        slots_[victim].reset();
        ++evictions_;
      }
    }
    if (resident_ + size > budget_) return false;
    resident_ += size;
    slots_[shard_id] = std::move(entry);
    if (lru_) {
      std::lock_guard order_lock(lru_mutex_);
      lru_order_.push_front(shard_id);
      lru_pos_[shard_id] = lru_order_.begin();
    }
    return true;
  }

  bool contains(std::uint32_t shard_id) const {
    std::shared_lock lock(mutex_);
    return shard_id < slots_.size() && slots_[shard_id] != nullptr;
  }

  /// Snapshot of the cached entry, for inspection.
  std::shared_ptr<const CacheEntry> entry(std::uint32_t shard_id) const {
    std::shared_lock lock(mutex_);
    return shard_id < slots_.size() ? slots_[shard_id] : nullptr;
  }

  CacheStats stats() const {
    CacheStats s;
    s.hits = hits_.load();
    s.misses = misses_.load();
    s.integrity_failures = integrity_failures_.load();
    s.hit_bytes = hit_bytes_.load();
    s.miss_bytes = miss_bytes_.load();
    s.budget_bytes = budget_;
    std::shared_lock lock(mutex_);
    s.evictions = evictions_;
    s.resident_bytes = resident_;
    for (const auto& e : slots_) s.entries += e != nullptr;
    return s;
  }

  /// Clears traffic counters, e.g. after the warm-up iteration.
  void reset_counters() {
    hits_ = 0;
    misses_ = 0;
    hit_bytes_ = 0;
    miss_bytes_ = 0;
  }

  /// Test hook: flips one byte of a resident payload.
  void corrupt_for_testing(std::uint32_t shard_id, std::size_t offset) {
    std::unique_lock lock(mutex_);
    if (!slots_[shard_id]) return;
    auto copy = std::make_shared<CacheEntry>(*slots_[shard_id]);
    copy->payload[offset % copy->payload.size()] ^= std::byte{0xff};
    slots_[shard_id] = std::move(copy);
  }

 private:
  void drop(std::uint32_t shard_id, const std::shared_ptr<const CacheEntry>& expected) {
    std::unique_lock lock(mutex_);
    if (slots_[shard_id] != expected) return;
    resident_ -= slots_[shard_id]->payload.size();
    slots_[shard_id].reset();
    if (lru_) {
      std::lock_guard order_lock(lru_mutex_);
      if (auto it = lru_pos_.find(shard_id); it != lru_pos_.end()) {
        lru_order_.erase(it->second);
        lru_pos_.erase(it);
      }
    }
  }

  void touch(std::uint32_t shard_id) {
    std::lock_guard order_lock(lru_mutex_);
    if (auto it = lru_pos_.find(shard_id); it != lru_pos_.end()) {
      lru_order_.splice(lru_order_.begin(), lru_order_, it->second);
    }
  }

  CacheMode mode_;
  Codec codec_;
  std::uint64_t budget_;
  bool lru_;

  mutable std::shared_mutex mutex_;
  std::vector<std::shared_ptr<const CacheEntry>> slots_;
  std::uint64_t resident_ = 0;
  std::uint64_t evictions_ = 0;

  std::mutex lru_mutex_;  // order only; nested inside mutex_ when both are held
  std::list<std::uint32_t> lru_order_;
  std::unordered_map<std::uint32_t, std::list<std::uint32_t>::iterator> lru_pos_;

  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
  std::atomic<std::uint64_t> integrity_failures_{0};
  std::atomic<std::uint64_t> hit_bytes_{0};
  std::atomic<std::uint64_t> miss_bytes_{0};
};

inline std::uint64_t physical_memory_bytes() {
  const long pages = ::sysconf(_SC_PHYS_PAGES);
  const long page_size = ::sysconf(_SC_PAGE_SIZE);
  if (pages <= 0 || page_size <= 0) return 0;
  return static_cast<std::uint64_t>(pages) * static_cast<std::uint64_t>(page_size);
}

/// Physical memory minus what the run keeps resident anyway, times 0.9.
inline std::uint64_t default_cache_budget(std::uint64_t resident_bytes) {
  const auto total = physical_memory_bytes();
  if (total <= resident_bytes) return 0;
  return static_cast<std::uint64_t>(static_cast<double>(total - resident_bytes) * 0.9);
}

}  // namespace slidegraph
