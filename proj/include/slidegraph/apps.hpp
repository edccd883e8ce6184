#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

#include "slidegraph/engine.hpp"

namespace slidegraph {

// ---------------------------------------------------------------------------
// PageRank: rank(v) = base/|V| + damping * sum_{u in in(v)} rank(u)/d_out(u)

struct PageRank {
  using value_type = double;

  double base = 0.15;
  double damping = 0.85;
  // When set, a vertex counts as changed only if its rank moved by more than
  // epsilon; otherwise any change of the stored value counts.
  std::optional<double> epsilon;

  std::vector<VertexId> init(std::span<double> src, std::span<double> dst, const DegreeTable& degrees) const {
    const auto n = degrees.num_vertices();
    const double initial = 1.0 / static_cast<double>(n);
    std::fill(src.begin(), src.end(), initial);
    std::fill(dst.begin(), dst.end(), initial);
    std::vector<VertexId> all(n);
    for (VertexId v = 0; v < n; ++v) all[v] = v;
    return all;
  }

  UpdateResult<double> update(VertexId v, std::span<const VertexId> sources, std::span<const double>,
                              std::span<const double> src, const DegreeTable& degrees) const {
    double sum = 0;
    for (VertexId u : sources) sum += src[u] / static_cast<double>(degrees.out_degree[u]);
    const double rank = base / static_cast<double>(src.size()) + damping * sum;
    const bool changed = epsilon ? std::abs(rank - src[v]) > *epsilon : rank != src[v];
    return {rank, changed};
  }
};

// ---------------------------------------------------------------------------
// SSSP: dist(v) = min(dist(v), min_{u in in(v)} dist(u) + w(u, v))

template <class Distance>
constexpr Distance unreachable() {
  if constexpr (std::is_floating_point_v<Distance>) {
    return std::numeric_limits<Distance>::infinity();
  } else {
    return std::numeric_limits<Distance>::max();
  }
}

/// `Distance` is std::int64_t (weights rounded to the nearest integer) or
/// double. Unweighted graphs use weight 1.
template <class Distance = std::int64_t>
class Sssp {
 public:
  using value_type = Distance;
  static_assert(std::is_same_v<Distance, std::int64_t> || std::is_same_v<Distance, double>);

  explicit Sssp(VertexId source) : source_(source) {}

  VertexId source() const { return source_; }

  std::vector<VertexId> init(std::span<Distance> src, std::span<Distance> dst, const DegreeTable& degrees) const {
    if (source_ >= degrees.num_vertices()) {
      fail(ErrorKind::usage, "source vertex " + std::to_string(source_) + " out of range");
    }
    std::fill(src.begin(), src.end(), unreachable<Distance>());
    std::fill(dst.begin(), dst.end(), unreachable<Distance>());
    src[source_] = dst[source_] = 0;
    return {source_};
  }

  UpdateResult<Distance> update(VertexId v, std::span<const VertexId> sources, std::span<const double> weights,
                                std::span<const Distance> src, const DegreeTable&) const {
    constexpr Distance inf = unreachable<Distance>();
    Distance best = inf;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      const Distance du = src[sources[i]];
      if (du == inf) continue;
      const Distance w = weights.empty() ? Distance{1} : to_distance(weights[i]);
      const Distance candidate = (w >= inf - du) ? inf : du + w;
      best = std::min(best, candidate);
    }
    const Distance value = std::min(best, src[v]);
    return {value, value != src[v]};
  }

  /// Number of weights that had to be rounded so far.
  std::uint64_t rounded_weights() const { return rounded_->load(); }

 private:
  Distance to_distance(double w) const {
    if constexpr (std::is_floating_point_v<Distance>) {
      return w;
    } else {
      const auto r = std::llround(w);
      if (static_cast<double>(r) != w) rounded_->fetch_add(1, std::memory_order_relaxed);
      return r;
    }
  }

  VertexId source_;
  std::shared_ptr<std::atomic<std::uint64_t>> rounded_ = std::make_shared<std::atomic<std::uint64_t>>(0);
};

// ---------------------------------------------------------------------------
// Connected components by min-label propagation. Expects a symmetrized graph.

struct ConnectedComponents {
  using value_type = std::int64_t;

  std::vector<VertexId> init(std::span<std::int64_t> src, std::span<std::int64_t> dst,
                             const DegreeTable& degrees) const {
    const auto n = degrees.num_vertices();
    std::vector<VertexId> all(n);
    for (VertexId v = 0; v < n; ++v) {
      src[v] = dst[v] = static_cast<std::int64_t>(v);
      all[v] = v;
    }
    return all;
  }

  UpdateResult<std::int64_t> update(VertexId v, std::span<const VertexId> sources, std::span<const double>,
                                    std::span<const std::int64_t> src, const DegreeTable&) const {
    std::int64_t label = src[v];
    for (VertexId u : sources) label = std::min(label, src[u]);
    return {label, label != src[v]};
  }
};

}  // namespace slidegraph
