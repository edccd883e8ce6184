#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slidegraph/error.hpp"

namespace slidegraph {

/// Dense vertex identifier in [0, |V|).
using VertexId = std::uint64_t;

struct Edge {
  VertexId src = 0;
  VertexId dst = 0;
  // Absent for unweighted graphs, where every edge weighs 1.
  std::optional<double> weight;

  double effective_weight() const { return weight.value_or(1.0); }

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Inclusive vertex range [start, end] owned by one shard.
struct VertexInterval {
  VertexId start = 0;
  VertexId end = 0;

  std::uint64_t size() const { return end - start + 1; }
  bool contains(VertexId v) const { return start <= v && v <= end; }

  friend bool operator==(const VertexInterval&, const VertexInterval&) = default;
};

struct GraphMeta {
  std::uint64_t num_vertices = 0;
  std::uint64_t num_edges = 0;
  std::vector<VertexInterval> intervals;  // one per shard
  bool weighted = false;

  std::uint32_t num_shards() const {
    return static_cast<std::uint32_t>(intervals.size());
  }

  friend bool operator==(const GraphMeta&, const GraphMeta&) = default;
};

struct DegreeTable {
  std::vector<std::uint64_t> in_degree;
  std::vector<std::uint64_t> out_degree;

  std::uint64_t num_vertices() const { return in_degree.size(); }

  friend bool operator==(const DegreeTable&, const DegreeTable&) = default;
};

/// Returns std::nullopt when every GraphMeta invariant holds, otherwise a
/// description of the first violated one.
inline std::optional<std::string> validate_meta(const GraphMeta& meta) {
  const auto& iv = meta.intervals;
  if (meta.num_vertices == 0) {
    return iv.empty() ? std::optional<std::string>("graph has no vertices")
                      : std::optional<std::string>("intervals given for a graph with no vertices");
  }
  if (iv.empty()) return "no intervals";
  if (iv.front().start != 0) {
    return "first interval starts at " + std::to_string(iv.front().start) + ", expected 0";
  }
  for (std::size_t k = 0; k < iv.size(); ++k) {
    if (iv[k].start > iv[k].end) {
      return "interval " + std::to_string(k) + " has start > end";
    }
    if (k == 0) continue;
    const VertexId expected = iv[k - 1].end + 1;
    if (iv[k].start < expected) {
      return "overlap at vertex " + std::to_string(iv[k].start) + " between intervals " +
             std::to_string(k - 1) + " and " + std::to_string(k);
    }
    if (iv[k].start > expected) {
      return "gap at vertex " + std::to_string(expected) + " between intervals " +
             std::to_string(k - 1) + " and " + std::to_string(k);
    }
  }
  if (iv.back().end != meta.num_vertices - 1) {
    return "last interval ends at " + std::to_string(iv.back().end) + ", expected " +
           std::to_string(meta.num_vertices - 1);
  }
  return std::nullopt;
}

/// Index of the interval containing v. Intervals must be sorted and contiguous.
inline std::uint32_t owner_shard(std::span<const VertexInterval> intervals, VertexId v) {
  auto it = std::upper_bound(intervals.begin(), intervals.end(), v,
                             [](VertexId x, const VertexInterval& iv) { return x < iv.start; });
  if (it == intervals.begin() || !std::prev(it)->contains(v)) {
    fail(ErrorKind::data, "unowned destination " + std::to_string(v));
  }
  return static_cast<std::uint32_t>(std::distance(intervals.begin(), it) - 1);
}

}  // namespace slidegraph
