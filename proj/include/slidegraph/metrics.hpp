#pragma once

// Per-iteration metrics as JSON lines (one record per iteration, stable field
// names) plus a CSV rendering for plotting.

#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "slidegraph/engine.hpp"

namespace slidegraph {

inline nlohmann::ordered_json to_json(const IterationStats& s) {
  nlohmann::ordered_json j;
  j["iteration"] = s.iteration;
  j["scheduling_ratio"] = s.scheduling_ratio;
  j["active_ratio"] = s.active_ratio;
  j["active_vertices"] = s.active_vertices;
  j["shards_loaded"] = s.shards_loaded;
  j["shards_skipped"] = s.shards_skipped;
  j["cache_hits"] = s.cache_hits;
  j["cache_misses"] = s.cache_misses;
  j["bytes_read_disk"] = s.bytes_read_disk;
  j["bytes_needed"] = s.bytes_needed;
  j["filters_built"] = s.filters_built;
  j["filter_probes"] = s.filter_probes;
  j["wall_time"] = s.wall_time;
  return j;
}

inline IterationStats iteration_from_json(const nlohmann::json& j) {
  IterationStats s;
  s.iteration = j.at("iteration").get<std::uint64_t>();
  s.scheduling_ratio = j.value("scheduling_ratio", 0.0);
  s.active_ratio = j.at("active_ratio").get<double>();
  s.active_vertices = j.value("active_vertices", std::uint64_t{0});
  s.shards_loaded = j.at("shards_loaded").get<std::uint64_t>();
  s.shards_skipped = j.at("shards_skipped").get<std::uint64_t>();
  s.cache_hits = j.value("cache_hits", std::uint64_t{0});
  s.cache_misses = j.value("cache_misses", std::uint64_t{0});
  s.bytes_read_disk = j.at("bytes_read_disk").get<std::uint64_t>();
  s.bytes_needed = j.value("bytes_needed", std::uint64_t{0});
  s.filters_built = j.value("filters_built", std::uint64_t{0});
  s.filter_probes = j.value("filter_probes", std::uint64_t{0});
  s.wall_time = j.at("wall_time").get<double>();
  return s;
}

inline std::vector<IterationStats> read_metrics(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::not_found, path.string() + ": cannot open metrics file");
  std::vector<IterationStats> out;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(iteration_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::data, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline std::string metrics_csv(std::span<const IterationStats> stats) {
  std::string out =
      "iteration,scheduling_ratio,active_ratio,active_vertices,shards_loaded,shards_skipped,cache_hits,"
      "cache_misses,bytes_read_disk,bytes_needed,filters_built,filter_probes,wall_time\n";
  for (const auto& s : stats) {
    const auto j = to_json(s);
    bool first = true;
    for (const auto& [key, value] : j.items()) {
      if (!first) out += ',';
      out += value.dump();
      first = false;
    }
    out += '\n';
  }
  return out;
}

/// Steady-state theta from a metrics stream: disk bytes over needed bytes,
/// skipping the warm-up iteration.
inline double theta_from_metrics(std::span<const IterationStats> stats) {
  if (stats.size() < 2) fail(ErrorKind::data, "insufficient data: need at least 2 iterations");
  double disk = 0, needed = 0;
  for (const auto& s : stats.subspan(1)) {
    disk += static_cast<double>(s.bytes_read_disk);
    needed += static_cast<double>(s.bytes_needed);
  }
  return needed == 0 ? 0.0 : disk / needed;
}

}  // namespace slidegraph
