#pragma once

// Edge list -> destination-grouped CSR shards, in three passes:
//   1. count in-degrees and cut the vertex range into intervals,
//   2. scatter every edge into the temporary file of the shard owning its
//      destination,
//   3. sort each temporary file by (dst, src) and rewrite it as CSR.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slidegraph/binary_io.hpp"
#include "slidegraph/graph.hpp"
#include "slidegraph/storage.hpp"
#include "slidegraph/worker_pool.hpp"

namespace slidegraph {

inline constexpr std::uint64_t kDefaultThresholdEdges = 20'000'000;
inline constexpr std::size_t kDefaultScatterBufferBytes = 4u << 20;

struct IntervalPlan {
  std::uint64_t threshold_edge_num = kDefaultThresholdEdges;
  std::vector<VertexInterval> intervals;
};

/// Cuts [0, |V|) into contiguous intervals holding at most `threshold` in-edges
/// each. Cuts happen only at vertex boundaries, so a vertex whose in-degree
/// alone exceeds the threshold gets an interval of its own.
inline IntervalPlan compute_intervals(std::span<const std::uint64_t> in_degree, std::uint64_t threshold) {
  if (in_degree.empty()) fail(ErrorKind::data, "empty graph");
  if (threshold < 1) fail(ErrorKind::usage, "threshold_edge_num must be >= 1");
  IntervalPlan plan;
  plan.threshold_edge_num = threshold;
  VertexId start = 0;
  std::uint64_t edge_num = 0;
  for (VertexId v = 0; v < in_degree.size(); ++v) {
    edge_num += in_degree[v];
    if (edge_num > threshold && v > start) {
      plan.intervals.push_back({start, v - 1});
      start = v;
      edge_num = in_degree[v];
    }
  }
  plan.intervals.push_back({start, in_degree.size() - 1});
  return plan;
}

/// A callable that feeds every edge to its argument exactly once.
using EdgeVisitor = std::function<void(const Edge&)>;
using EdgeSource = std::function<void(const EdgeVisitor&)>;

inline EdgeSource edges_from(std::span<const Edge> edges) {
  return [edges](const EdgeVisitor& visit) {
    for (const auto& e : edges) visit(e);
  };
}

inline DegreeTable count_degrees(const EdgeSource& source, std::uint64_t num_vertices) {
  DegreeTable d;
  d.in_degree.assign(num_vertices, 0);
  d.out_degree.assign(num_vertices, 0);
  source([&](const Edge& e) {
    if (e.src >= num_vertices || e.dst >= num_vertices) {
      fail(ErrorKind::data, "vertex id out of range: (" + std::to_string(e.src) + ", " +
                                std::to_string(e.dst) + ") with |V|=" + std::to_string(num_vertices));
    }
    ++d.out_degree[e.src];
    ++d.in_degree[e.dst];
  });
  return d;
}

// ---------------------------------------------------------------------------
// Input parsing

enum class InputFormat { automatic, text, binary };

/// Raw edge as read from input, with a 1-based record number for diagnostics.
struct InputEdge {
  std::uint64_t src;
  std::uint64_t dst;
  std::optional<double> weight;
  std::uint64_t record;
};

namespace detail {

inline bool is_separator(char c) { return c == ' ' || c == '\t' || c == ',' || c == '\r'; }

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_separator(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_separator(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] inline void bad_record(const fs::path& path, std::uint64_t record, const std::string& why) {
  fail(ErrorKind::data, path.string() + ":" + std::to_string(record) + ": " + why);
}

inline void check_weight(const fs::path& path, std::uint64_t record, double w) {
  if (!(w >= 0.0) || !std::isfinite(w)) bad_record(path, record, "edge weight must be finite and non-negative");
}

}  // namespace detail

/// Streams edges of a text ("src dst [weight]", whitespace or comma separated,
/// blank lines and '#' comments skipped) or binary (u64 src, u64 dst[, f64
/// weight] little-endian records) edge list.
inline void read_edge_list(const fs::path& path, InputFormat format, bool weighted,
                           const std::function<void(const InputEdge&)>& visit,
                           std::uint64_t* bytes_read = nullptr) {
  if (format == InputFormat::automatic) {
    format = path.extension() == ".bin" ? InputFormat::binary : InputFormat::text;
  }
  if (format == InputFormat::binary) {
    const std::size_t record_size = weighted ? 24 : 16;
    FilePtr f = open_file(path, "rb");
    std::vector<std::byte> buf(record_size * 65536);
    std::uint64_t record = 0;
    for (;;) {
      const std::size_t got = std::fread(buf.data(), 1, buf.size(), f.get());
      if (bytes_read) *bytes_read += got;
      if (got % record_size != 0 && got < buf.size()) {
        fail(ErrorKind::data, path.string() + ": binary edge file size is not a multiple of " +
                                  std::to_string(record_size));
      }
      ByteReader r(std::span<const std::byte>(buf.data(), got), path.string());
      while (r.remaining() >= record_size) {
        InputEdge e{r.get<std::uint64_t>(), r.get<std::uint64_t>(), std::nullopt, ++record};
        if (weighted) {
          e.weight = r.get<double>();
          detail::check_weight(path, record, *e.weight);
        }
        visit(e);
      }
      if (got < buf.size()) break;
    }
    return;
  }

  std::ifstream in(path);
  if (!in) fail(fs::exists(path) ? ErrorKind::io : ErrorKind::not_found, path.string() + ": cannot open");
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (bytes_read) *bytes_read += line.size() + 1;
    const auto fields = detail::split_fields(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    if (fields.size() < 2) detail::bad_record(path, lineno, "expected \"src dst [weight]\"");
    InputEdge e{0, 0, std::nullopt, lineno};
    for (int i = 0; i < 2; ++i) {
      auto& out = i == 0 ? e.src : e.dst;
      const auto f = fields[i];
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), out);
      if (ec != std::errc() || p != f.data() + f.size()) {
        detail::bad_record(path, lineno, "invalid vertex id \"" + std::string(f) + "\"");
      }
    }
    if (weighted) {
      if (fields.size() < 3) detail::bad_record(path, lineno, "missing edge weight");
      double w = 0;
      const auto f = fields[2];
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), w);
      if (ec != std::errc() || p != f.data() + f.size()) {
        detail::bad_record(path, lineno, "invalid edge weight \"" + std::string(f) + "\"");
      }
      detail::check_weight(path, lineno, w);
      e.weight = w;
    }
    visit(e);
  }
  if (in.bad()) fail(ErrorKind::io, path.string() + ": read error");
}

// ---------------------------------------------------------------------------
// Scatter and CSR conversion

inline fs::path scatter_path(const fs::path& dir, std::uint32_t k) {
  return dir / ("scatter-" + std::to_string(k) + ".tmp");
}

struct ScatterResult {
  std::vector<fs::path> files;
  std::vector<std::uint64_t> edge_counts;
  std::uint64_t bytes_written = 0;
};

/// Appends every edge to the temporary file of the shard owning its
/// destination. Per-shard buffers are flushed when they reach `buffer_bytes`.
inline ScatterResult scatter_edges(const EdgeSource& source, const IntervalPlan& plan, const fs::path& workdir,
                                   bool weighted, std::size_t buffer_bytes = kDefaultScatterBufferBytes) {
  const auto shards = static_cast<std::uint32_t>(plan.intervals.size());
  const std::size_t record_size = weighted ? 24 : 16;
  buffer_bytes = std::max(buffer_bytes, record_size);
  ScatterResult result;
  result.edge_counts.assign(shards, 0);
  for (std::uint32_t k = 0; k < shards; ++k) {
    result.files.push_back(scatter_path(workdir, k));
    open_file(result.files.back(), "wb");
  }
  std::vector<ByteWriter> buffers(shards);
  auto flush = [&](std::uint32_t k) {
    const auto& data = buffers[k].bytes();
    if (data.empty()) return;
    FilePtr f = open_file(result.files[k], "ab");
    if (std::fwrite(data.data(), 1, data.size(), f.get()) != data.size()) {
      fail(ErrorKind::io, result.files[k].string() + ": write failed");
    }
    result.bytes_written += data.size();
    buffers[k] = ByteWriter();
  };
  source([&](const Edge& e) {
    const auto k = owner_shard(plan.intervals, e.dst);
    auto& buf = buffers[k];
    buf.put<std::uint64_t>(e.src);
    buf.put<std::uint64_t>(e.dst);
    if (weighted) buf.put<double>(e.effective_weight());
    ++result.edge_counts[k];
    if (buf.size() >= buffer_bytes) flush(k);
  });
  for (std::uint32_t k = 0; k < shards; ++k) flush(k);
  return result;
}

/// Builds the CSR form of one shard from unsorted (src, dst, w) edges whose
/// destinations all lie in `interval`. Sources within a row ascend.
inline ShardCSR build_shard(std::uint32_t shard_id, VertexInterval interval, std::vector<Edge> edges,
                            bool weighted) {
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.dst != b.dst ? a.dst < b.dst : a.src < b.src;
  });
  ShardCSR s;
  s.header = {shard_id, interval.start, interval.end, edges.size(), weighted};
  s.row.assign(interval.size() + 1, 0);
  s.col.reserve(edges.size());
  if (weighted) s.val.reserve(edges.size());
  for (const auto& e : edges) {
    if (!interval.contains(e.dst)) fail(ErrorKind::invariant, "edge outside shard interval");
    ++s.row[e.dst - interval.start + 1];
    s.col.push_back(e.src);
    if (weighted) s.val.push_back(e.effective_weight());
  }
  std::partial_sum(s.row.begin(), s.row.end(), s.row.begin());
  return s;
}

struct BuildResult {
  std::vector<std::uint64_t> shard_bytes;
  std::uint64_t bytes_read = 0;
  std::uint64_t bytes_written = 0;
};

/// Converts the scatter files in `workdir` to shard-<k>.bin, in parallel across
/// shards, and removes the temporaries.
inline BuildResult build_csr_shards(const fs::path& workdir, const IntervalPlan& plan, bool weighted,
                                    unsigned workers = 1, bool verify = false) {
  const auto shards = static_cast<std::uint32_t>(plan.intervals.size());
  BuildResult result;
  result.shard_bytes.assign(shards, 0);
  std::vector<std::uint64_t> read_bytes(shards, 0);
  WorkerPool pool(workers);
  pool.parallel_for(shards, [&](std::size_t i, unsigned) {
    const auto k = static_cast<std::uint32_t>(i);
    const fs::path tmp = scatter_path(workdir, k);
    const Bytes raw = read_file(tmp);
    read_bytes[k] = raw.size();
    const std::size_t record_size = weighted ? 24 : 16;
    if (raw.size() % record_size != 0) fail(ErrorKind::format, tmp.string() + ": truncated scatter file");
    std::vector<Edge> edges;
    edges.reserve(raw.size() / record_size);
    ByteReader r(raw, tmp.string());
    while (r.remaining() > 0) {
      Edge e;
      e.src = r.get<std::uint64_t>();
      e.dst = r.get<std::uint64_t>();
      if (weighted) e.weight = r.get<double>();
      edges.push_back(e);
    }
    const ShardCSR shard = build_shard(k, plan.intervals[k], std::move(edges), weighted);
    const fs::path out = shard_path(workdir, k);
    const Bytes encoded = encode_shard(shard);
    write_file_atomic(out, encoded);
    if (verify && fnv1a64(read_file(out)) != fnv1a64(encoded)) {
      fail(ErrorKind::checksum, out.string() + ": checksum mismatch on rewrite");
    }
    result.shard_bytes[k] = encoded.size();
    fs::remove(tmp);
  });
  for (std::uint32_t k = 0; k < shards; ++k) {
    result.bytes_read += read_bytes[k];
    result.bytes_written += result.shard_bytes[k];
  }
  return result;
}

// ---------------------------------------------------------------------------
// Driver

struct PreprocessOptions {
  fs::path input;
  fs::path workdir;
  InputFormat format = InputFormat::automatic;
  std::uint64_t threshold_edges = kDefaultThresholdEdges;
  bool symmetrize = false;
  bool weighted = false;
  std::size_t scatter_buffer_bytes = kDefaultScatterBufferBytes;
  unsigned workers = 1;
  bool verify = false;
};

struct PreprocessSummary {
  GraphMeta meta;
  bool remapped = false;
  std::uint64_t input_edges = 0;  // before symmetrization
  std::uint64_t bytes_read = 0;
  std::uint64_t bytes_written = 0;
  std::uint64_t total_shard_bytes = 0;
};

/// Settings recorded next to the shards so later runs can check that the
/// workdir suits the application (e.g. CC needs a symmetrized graph).
struct WorkdirInfo {
  bool symmetrized = false;
  bool weighted = false;
  bool remapped = false;
  std::uint64_t threshold_edges = kDefaultThresholdEdges;
};

inline fs::path workdir_info_path(const fs::path& dir) { return dir / "preprocess.json"; }

inline void write_workdir_info(const WorkdirInfo& info, const fs::path& dir) {
  nlohmann::ordered_json j;
  j["symmetrized"] = info.symmetrized;
  j["weighted"] = info.weighted;
  j["remapped"] = info.remapped;
  j["threshold_edges"] = info.threshold_edges;
  const std::string text = j.dump(2) + "\n";
  write_file_atomic(workdir_info_path(dir), std::as_bytes(std::span(text.data(), text.size())));
}

inline WorkdirInfo read_workdir_info(const fs::path& dir) {
  WorkdirInfo info;
  const auto path = workdir_info_path(dir);
  if (!fs::exists(path)) return info;
  try {
    std::ifstream in(path);
    const auto j = nlohmann::json::parse(in);
    info.symmetrized = j.value("symmetrized", false);
    info.weighted = j.value("weighted", false);
    info.remapped = j.value("remapped", false);
    info.threshold_edges = j.value("threshold_edges", kDefaultThresholdEdges);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, path.string() + ": " + e.what());
  }
  return info;
}

/// Removes outputs of an earlier run that the new one would not overwrite.
inline void clear_workdir(const fs::path& dir) {
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    const bool ours = (name.starts_with("shard-") || name.starts_with("filter-") ||
                       name.starts_with("scatter-")) ||
                      name == "meta.bin" || name == "degrees.bin" || name == "vertexmap.bin" ||
                      name == "values.bin" || name == "preprocess.json";
    if (ours && entry.is_regular_file()) fs::remove(entry.path());
  }
}

namespace detail {
struct SparseIds {};
}  // namespace detail

inline PreprocessSummary preprocess(const PreprocessOptions& opt) {
  PreprocessSummary summary;
  std::uint64_t input_bytes = 0;
  // Dense id -> original id; stays empty while input ids are contiguous.
  std::vector<std::uint64_t> ids;

  auto dense = [&](std::uint64_t original) -> VertexId {
    if (ids.empty()) return original;
    return static_cast<VertexId>(std::lower_bound(ids.begin(), ids.end(), original) - ids.begin());
  };
  const EdgeSource source = [&](const EdgeVisitor& visit) {
    read_edge_list(opt.input, opt.format, opt.weighted, [&](const InputEdge& in) {
      Edge e{dense(in.src), dense(in.dst), in.weight};
      visit(e);
      if (opt.symmetrize && e.src != e.dst) visit(Edge{e.dst, e.src, e.weight});
    }, &input_bytes);
  };

  // Step 1: degrees, indexed by original id while ids stay reasonably small.
  DegreeTable degrees;
  try {
    read_edge_list(opt.input, opt.format, opt.weighted, [&](const InputEdge& e) {
      ++summary.input_edges;
      const auto top = std::max(e.src, e.dst);
      if (top >= degrees.in_degree.size()) {
        if (top >= (std::uint64_t{1} << 24) + 8 * summary.input_edges) throw detail::SparseIds{};
        degrees.in_degree.resize(top + 1, 0);
        degrees.out_degree.resize(top + 1, 0);
      }
      ++degrees.out_degree[e.src];
      ++degrees.in_degree[e.dst];
      if (opt.symmetrize && e.src != e.dst) {
        ++degrees.out_degree[e.dst];
        ++degrees.in_degree[e.src];
      }
    }, &input_bytes);
    if (summary.input_edges == 0) fail(ErrorKind::data, "empty graph");
    const auto n = degrees.in_degree.size();
    for (std::uint64_t v = 0; v < n; ++v) {
      if (degrees.in_degree[v] + degrees.out_degree[v] == 0) {
        summary.remapped = true;
        break;
      }
    }
    if (summary.remapped) {
      DegreeTable compact;
      for (std::uint64_t v = 0; v < n; ++v) {
        if (degrees.in_degree[v] + degrees.out_degree[v] == 0) continue;
        ids.push_back(v);
        compact.in_degree.push_back(degrees.in_degree[v]);
        compact.out_degree.push_back(degrees.out_degree[v]);
      }
      degrees = std::move(compact);
    }
  } catch (const detail::SparseIds&) {
    // Huge id space: collect the distinct ids, then count in a second scan.
    summary.input_edges = 0;
    std::size_t sorted_prefix = 0;
    auto compact = [&] {
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
      sorted_prefix = ids.size();
    };
    read_edge_list(opt.input, opt.format, opt.weighted, [&](const InputEdge& e) {
      ids.push_back(e.src);
      ids.push_back(e.dst);
      ++summary.input_edges;
      if (ids.size() > 2 * sorted_prefix + (1u << 20)) compact();
    }, &input_bytes);
    compact();
    summary.remapped = true;
    degrees = count_degrees(source, ids.size());
  }
  const std::uint64_t num_vertices = degrees.num_vertices();
  const IntervalPlan plan = compute_intervals(degrees.in_degree, opt.threshold_edges);

  fs::create_directories(opt.workdir);
  clear_workdir(opt.workdir);

  // Step 2: scatter.
  const ScatterResult scattered =
      scatter_edges(source, plan, opt.workdir, opt.weighted, opt.scatter_buffer_bytes);

  // Step 3: CSR.
  const BuildResult built = build_csr_shards(opt.workdir, plan, opt.weighted, opt.workers, opt.verify);

  summary.meta.num_vertices = num_vertices;
  summary.meta.num_edges = std::accumulate(scattered.edge_counts.begin(), scattered.edge_counts.end(),
                                           std::uint64_t{0});
  summary.meta.intervals = plan.intervals;
  summary.meta.weighted = opt.weighted;
  write_meta(summary.meta, degrees, opt.workdir);
  if (summary.remapped) write_vertex_map(ids, opt.workdir);
  write_workdir_info({opt.symmetrize, opt.weighted, summary.remapped, opt.threshold_edges}, opt.workdir);

  summary.bytes_read = input_bytes + built.bytes_read;
  summary.bytes_written = scattered.bytes_written + built.bytes_written;
  summary.total_shard_bytes = built.bytes_written;
  return summary;
}

}  // namespace slidegraph
