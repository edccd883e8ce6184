#pragma once

// Vertex-centric sliding window executor.
//
// All vertex values live in memory in two arrays: `src` (values of the last
// completed iteration, read-only during an iteration) and `dst` (values being
// produced). Each iteration streams the edge shards; a worker owns one shard
// at a time and writes only the dst slots of that shard's interval, so no
// locks or atomics guard vertex data. After every shard is done the arrays are
// swapped and the changed vertices form the next active set.

#include <algorithm>
#include <chrono>
#include <concepts>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slidegraph/cache.hpp"
#include "slidegraph/graph.hpp"
#include "slidegraph/scheduler.hpp"
#include "slidegraph/storage.hpp"
#include "slidegraph/worker_pool.hpp"

namespace slidegraph {

template <class T>
struct UpdateResult {
  T value;
  bool changed;
};

/// A vertex program supplies the value type of a vertex slot, an init that
/// fills both arrays and returns the initially active vertices (ascending),
/// and a pull-style update that sees only the previous iteration's values.
template <class P>
concept VertexProgram =
    requires(P& program, const P& cprogram, std::span<typename P::value_type> values, const DegreeTable& degrees,
             VertexId v, std::span<const VertexId> sources, std::span<const double> weights,
             std::span<const typename P::value_type> src_values) {
      typename P::value_type;
      { program.init(values, values, degrees) } -> std::convertible_to<std::vector<VertexId>>;
      {
        cprogram.update(v, sources, weights, src_values, degrees)
      } -> std::same_as<UpdateResult<typename P::value_type>>;
    };

template <class T>
struct VertexState {
  std::vector<T> src_values;
  std::vector<T> dst_values;
  std::vector<std::uint8_t> active;
  std::uint64_t active_count = 0;

  explicit VertexState(std::uint64_t num_vertices)
      : src_values(num_vertices), dst_values(num_vertices), active(num_vertices, 0) {}

  std::uint64_t num_vertices() const { return src_values.size(); }

  /// Active vertices in ascending order.
  std::vector<VertexId> active_list() const {
    std::vector<VertexId> out;
    out.reserve(active_count);
    for (VertexId v = 0; v < active.size(); ++v) {
      if (active[v]) out.push_back(v);
    }
    return out;
  }
};

/// Runs `program.update` for every vertex of the shard's interval and writes
/// dst slots of that interval only. Unchanged vertices carry their src value.
template <VertexProgram P>
std::uint64_t process_shard(const ShardCSR& shard, VertexState<typename P::value_type>& state, const P& program,
                            const DegreeTable& degrees, std::span<std::uint8_t> changed) {
  const auto& h = shard.header;
  if (h.start > h.end || h.end >= state.num_vertices() || changed.size() != state.num_vertices()) {
    fail(ErrorKind::invariant, "shard " + std::to_string(h.shard_id) + " interval outside [0, |V|)");
  }
  const std::span<const typename P::value_type> src(state.src_values);
  std::uint64_t updated = 0;
  for (VertexId v = h.start; v <= h.end; ++v) {
    const auto r = program.update(v, shard.in_neighbors(v), shard.in_weights(v), src, degrees);
    state.dst_values[v] = r.changed ? r.value : src[v];
    changed[v] = r.changed ? 1 : 0;
    updated += r.changed;
  }
  return updated;
}

/// Iteration barrier: the changed vertices become the active set and dst
/// becomes the next iteration's src. Returns |active| / |V|.
template <class T>
double swap_and_tally(VertexState<T>& state, std::span<const std::uint8_t> changed) {
  std::uint64_t count = 0;
  for (std::size_t v = 0; v < changed.size(); ++v) {
    state.active[v] = changed[v];
    count += changed[v];
  }
  state.active_count = count;
  state.src_values.swap(state.dst_values);
  return state.num_vertices() == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(state.num_vertices());
}

struct IterationStats {
  std::uint64_t iteration = 0;         // 1-based
  double scheduling_ratio = 0;         // active ratio seen by the shard gate
  double active_ratio = 0;             // fraction of vertices changed by this iteration
  std::uint64_t active_vertices = 0;
  std::uint64_t shards_loaded = 0;
  std::uint64_t shards_skipped = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  std::uint64_t bytes_read_disk = 0;
  std::uint64_t bytes_needed = 0;      // shard bytes processed, from disk or cache
  std::uint64_t filters_built = 0;
  std::uint64_t filter_probes = 0;
  double wall_time = 0;                // seconds
};

struct EngineOptions {
  unsigned workers = default_worker_count();
  std::uint64_t max_iterations = 200;
  bool selective = true;
  double activation_threshold = kDefaultActivationThreshold;
  std::optional<CacheMode> cache_mode;         // nullopt: choose from the budget
  std::optional<std::uint64_t> cache_budget;   // nullopt: derive from physical memory
  bool cache_lru = false;
  double bits_per_key = kDefaultBitsPerKey;
  std::uint32_t hash_count = kDefaultHashCount;
  std::uint64_t seed = kDefaultSeed;
  bool persist_filters = true;
  std::function<void(const IterationStats&)> on_iteration;
};

template <class T>
struct RunResult {
  std::vector<T> values;
  std::vector<IterationStats> iterations;
  bool converged = false;  // stopped because no vertex was active
};

class Engine {
 public:
  Engine(fs::path workdir, EngineOptions options) : workdir_(std::move(workdir)), options_(std::move(options)) {
    if (options_.workers < 1) fail(ErrorKind::usage, "workers must be >= 1");
    if (options_.activation_threshold < 0 || options_.activation_threshold > 1) {
      fail(ErrorKind::usage, "activation threshold must be in [0, 1]");
    }
    auto [meta, degrees] = read_meta(workdir_);
    meta_ = std::move(meta);
    degrees_ = std::move(degrees);
    const auto shards = meta_.num_shards();

    shard_bytes_.resize(shards);
    std::uint64_t largest = 0;
    for (std::uint32_t k = 0; k < shards; ++k) {
      std::error_code ec;
      shard_bytes_[k] = fs::file_size(shard_path(workdir_, k), ec);
      if (ec) fail(ErrorKind::not_found, shard_path(workdir_, k).string() + ": " + ec.message());
      total_shard_bytes_ += shard_bytes_[k];
      largest = std::max(largest, shard_bytes_[k]);
    }

    std::uint64_t budget = 0;
    if (options_.cache_budget) {
      budget = *options_.cache_budget;
    } else {
      // vertex arrays, degree table, filters, one shard buffer per worker
      const std::uint64_t resident = 2 * 8 * meta_.num_vertices + 16 * meta_.num_vertices +
                                     static_cast<std::uint64_t>(meta_.num_edges * options_.bits_per_key / 8) +
                                     2 * largest * options_.workers;
      budget = default_cache_budget(resident);
    }
    const CacheMode mode = options_.cache_mode.value_or(select_mode(total_shard_bytes_, budget));
    cache_ = std::make_unique<EdgeCache>(mode, budget, shards, options_.cache_lru);

    filters_.resize(shards);
    if (options_.selective && options_.seed == kDefaultSeed) load_filters();
    pool_ = std::make_unique<WorkerPool>(options_.workers);
  }

  const GraphMeta& meta() const { return meta_; }
  const DegreeTable& degrees() const { return degrees_; }
  const EngineOptions& options() const { return options_; }
  const fs::path& workdir() const { return workdir_; }
  EdgeCache& cache() { return *cache_; }
  const EdgeCache& cache() const { return *cache_; }
  std::uint64_t total_shard_bytes() const { return total_shard_bytes_; }
  std::uint64_t shard_bytes(std::uint32_t k) const { return shard_bytes_[k]; }
  bool has_filter(std::uint32_t k) const { return filters_[k].has_value(); }

  template <VertexProgram P>
  RunResult<typename P::value_type> run(P& program) {
    using T = typename P::value_type;
    const auto n = meta_.num_vertices;
    const auto shards = meta_.num_shards();
    VertexState<T> state(n);
    std::vector<std::uint8_t> changed(n, 0);

    for (VertexId v : program.init(std::span<T>(state.src_values), std::span<T>(state.dst_values), degrees_)) {
      if (v >= n) fail(ErrorKind::usage, "initial active vertex " + std::to_string(v) + " out of range");
      state.active[v] = 1;
    }
    state.active_count = std::count(state.active.begin(), state.active.end(), std::uint8_t{1});
    double ratio = n == 0 ? 0.0 : static_cast<double>(state.active_count) / static_cast<double>(n);

    RunResult<T> result;
    std::vector<ShardOutcome> outcome(shards);
    std::vector<VertexId> active;

    for (std::uint64_t iter = 1; state.active_count > 0 && iter <= options_.max_iterations; ++iter) {
      const auto t0 = std::chrono::steady_clock::now();
      const double gate_ratio = ratio;
      const bool gated = options_.selective && gate_ratio <= options_.activation_threshold;
      if (gated) active = state.active_list();
      std::fill(outcome.begin(), outcome.end(), ShardOutcome{});

      pool_->parallel_for(shards, [&](std::size_t i, unsigned) {
        const auto k = static_cast<std::uint32_t>(i);
        auto& out = outcome[k];
        if (gated && filters_[k]) {
          const auto probe = probe_active(active, *filters_[k]);
          out.probes = probe.probes;
          if (!probe.hit) {
            const auto iv = meta_.intervals[k];
            std::copy(state.src_values.begin() + iv.start, state.src_values.begin() + iv.end + 1,
                      state.dst_values.begin() + iv.start);
            std::fill(changed.begin() + iv.start, changed.begin() + iv.end + 1, std::uint8_t{0});
            return;
          }
        }
        const ShardCSR shard = load_shard(k, out);
        if (shard.header.interval() != meta_.intervals[k]) {
          fail(ErrorKind::format, shard_path(workdir_, k).string() + ": interval does not match metadata");
        }
        if (options_.selective && !filters_[k]) {
          filters_[k] = build_filter(shard, options_.bits_per_key, options_.hash_count, options_.seed);
          out.filter_built = true;
          if (options_.persist_filters && options_.seed == kDefaultSeed) {
            try {
              write_filter(*filters_[k], filter_path(workdir_, k));
            } catch (const Error&) {
              // read-only workdir: keep the in-memory filter
            }
          }
        }
        out.loaded = true;
        try {
          process_shard(shard, state, program, degrees_, changed);
        } catch (const Error& e) {
          throw Error(e.kind(), "shard " + std::to_string(k) + ": " + e.what());
        }
      });

      ratio = swap_and_tally(state, changed);

      IterationStats s;
      s.iteration = iter;
      s.scheduling_ratio = gate_ratio;
      s.active_ratio = ratio;
      s.active_vertices = state.active_count;
      for (const auto& o : outcome) {
        s.shards_loaded += o.loaded;
        s.cache_hits += o.loaded && o.hit;
        s.cache_misses += o.loaded && !o.hit;
        s.bytes_read_disk += o.disk_bytes;
        s.bytes_needed += o.needed_bytes;
        s.filters_built += o.filter_built;
        s.filter_probes += o.probes;
      }
      s.shards_skipped = shards - s.shards_loaded;
      s.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (options_.on_iteration) options_.on_iteration(s);
      result.iterations.push_back(s);
    }
    result.converged = state.active_count == 0;
    result.values = std::move(state.src_values);
    return result;
  }

 private:
  struct ShardOutcome {
    bool loaded = false;
    bool hit = false;
    bool filter_built = false;
    std::uint64_t disk_bytes = 0;
    std::uint64_t needed_bytes = 0;
    std::uint64_t probes = 0;
  };

  ShardCSR load_shard(std::uint32_t k, ShardOutcome& out) {
    const fs::path path = shard_path(workdir_, k);
    if (auto cached = cache_->get(k)) {
      out.hit = true;
      out.needed_bytes = cached->size();
      return decode_shard(*cached, path.string(), /*verify_checksum=*/false);
    }
    IoCounter io;
    Bytes bytes = read_file(path, &io);
    out.disk_bytes = io.bytes;
    out.needed_bytes = bytes.size();
    ShardCSR shard = decode_shard(bytes, path.string());
    cache_->admit(k, bytes);
    return shard;
  }

  void load_filters() {
    for (std::uint32_t k = 0; k < meta_.num_shards(); ++k) {
      const fs::path path = filter_path(workdir_, k);
      std::error_code ec;
      if (!fs::exists(path, ec)) continue;
      // A filter older than its shard belongs to an earlier preprocessing run.
      if (fs::last_write_time(path, ec) < fs::last_write_time(shard_path(workdir_, k), ec)) continue;
      try {
        auto f = read_filter(path, k, options_.seed);
        if (f.bloom.hash_count() != options_.hash_count ||
            f.bloom.num_bits() != expected_filter_bits(f.bloom.inserted(), options_.bits_per_key)) {
          continue;
        }
        filters_[k] = std::move(f);
      } catch (const Error&) {
        // unreadable filter: rebuilt on first load
      }
    }
  }

  fs::path workdir_;
  EngineOptions options_;
  GraphMeta meta_;
  DegreeTable degrees_;
  std::vector<std::uint64_t> shard_bytes_;
  std::uint64_t total_shard_bytes_ = 0;
  std::unique_ptr<EdgeCache> cache_;
  std::vector<std::optional<ShardFilter>> filters_;
  std::unique_ptr<WorkerPool> pool_;
};

/// One-shot convenience wrapper.
template <VertexProgram P>
RunResult<typename P::value_type> run(const fs::path& workdir, P& program, EngineOptions options = {}) {
  Engine engine(workdir, std::move(options));
  return engine.run(program);
}

}  // namespace slidegraph
