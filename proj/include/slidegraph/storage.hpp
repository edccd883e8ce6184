#pragma once

// On-disk formats. All integers little-endian; every file starts with a
// four-byte magic and a u16 format version.
//
//   shard-<k>.bin   "GMPS" ver flags(bit0=weighted) shard_id:u32 start:u64 end:u64
//                   edge_count:u64 row[(end-start+2)]:u64 col[edge_count]:u64
//                   val[edge_count]:f64 (weighted only) checksum:u64
//   meta.bin        "GMPM" ver |V|:u64 |E|:u64 P:u32 weighted:u8 P x (start:u64 end:u64)
//   degrees.bin     "GMPD" ver |V| x in:u64 |V| x out:u64
//   vertexmap.bin   "GMPR" ver count:u64 original_id[count]:u64 checksum:u64
//   values.bin      "GMPV" ver kind:u8(0=f64,1=i64) |V|:u64 values[|V|] checksum:u64
//
// Checksums are FNV-1a 64 over every byte preceding the checksum field.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "slidegraph/binary_io.hpp"
#include "slidegraph/graph.hpp"

namespace slidegraph {

inline constexpr std::uint16_t kFormatVersion = 1;

inline constexpr std::string_view kShardMagic = "GMPS";
inline constexpr std::string_view kMetaMagic = "GMPM";
inline constexpr std::string_view kDegreesMagic = "GMPD";
inline constexpr std::string_view kVertexMapMagic = "GMPR";
inline constexpr std::string_view kValuesMagic = "GMPV";

inline constexpr std::uint16_t kShardFlagWeighted = 0x1;

inline fs::path shard_path(const fs::path& dir, std::uint32_t k) {
  return dir / ("shard-" + std::to_string(k) + ".bin");
}
inline fs::path meta_path(const fs::path& dir) { return dir / "meta.bin"; }
inline fs::path degrees_path(const fs::path& dir) { return dir / "degrees.bin"; }
inline fs::path vertexmap_path(const fs::path& dir) { return dir / "vertexmap.bin"; }
inline fs::path values_path(const fs::path& dir) { return dir / "values.bin"; }

struct ShardHeader {
  std::uint32_t shard_id = 0;
  VertexId start = 0;
  VertexId end = 0;
  std::uint64_t edge_count = 0;
  bool weighted = false;

  VertexInterval interval() const { return {start, end}; }

  friend bool operator==(const ShardHeader&, const ShardHeader&) = default;
};

/// In-edges of one vertex interval in CSR form. `col` holds source vertices,
/// grouped by destination; `val` is empty for unweighted graphs.
struct ShardCSR {
  ShardHeader header;
  std::vector<std::uint64_t> row;
  std::vector<VertexId> col;
  std::vector<double> val;

  std::uint64_t num_vertices() const { return header.end - header.start + 1; }

  /// Sources of the in-edges of global vertex v.
  std::span<const VertexId> in_neighbors(VertexId v) const {
    const auto local = v - header.start;
    return std::span(col).subspan(row[local], row[local + 1] - row[local]);
  }

  /// Weights aligned with in_neighbors(v); empty when unweighted.
  std::span<const double> in_weights(VertexId v) const {
    if (val.empty()) return {};
    const auto local = v - header.start;
    return std::span(val).subspan(row[local], row[local + 1] - row[local]);
  }

  friend bool operator==(const ShardCSR&, const ShardCSR&) = default;
};

/// Throws ErrorKind::format if a shard's CSR invariants do not hold.
inline void check_shard(const ShardCSR& s, const std::string& context = "shard") {
  const auto& h = s.header;
  if (h.start > h.end) fail(ErrorKind::format, context + ": start > end");
  if (s.row.size() != h.end - h.start + 2) fail(ErrorKind::format, context + ": row length mismatch");
  if (s.row.front() != 0) fail(ErrorKind::format, context + ": row[0] != 0");
  for (std::size_t r = 0; r + 1 < s.row.size(); ++r) {
    if (s.row[r] > s.row[r + 1]) {
      fail(ErrorKind::format, context + ": row not monotone at " + std::to_string(r));
    }
  }
  if (s.row.back() != h.edge_count) fail(ErrorKind::format, context + ": row[last] != edge_count");
  if (s.col.size() != h.edge_count) fail(ErrorKind::format, context + ": col length mismatch");
  if (h.weighted ? s.val.size() != h.edge_count : !s.val.empty()) {
    fail(ErrorKind::format, context + ": val length mismatch");
  }
}

inline std::uint64_t encoded_shard_size(const ShardHeader& h) {
  const std::uint64_t fixed = 4 + 2 + 2 + 4 + 8 + 8 + 8 + 8;
  return fixed + 8 * (h.end - h.start + 2) + 8 * h.edge_count * (h.weighted ? 2 : 1);
}

inline Bytes encode_shard(const ShardCSR& s) {
  check_shard(s);
  ByteWriter w;
  w.reserve(encoded_shard_size(s.header));
  w.put_magic(kShardMagic);
  w.put<std::uint16_t>(kFormatVersion);
  w.put<std::uint16_t>(s.header.weighted ? kShardFlagWeighted : 0);
  w.put<std::uint32_t>(s.header.shard_id);
  w.put<std::uint64_t>(s.header.start);
  w.put<std::uint64_t>(s.header.end);
  w.put<std::uint64_t>(s.header.edge_count);
  w.put_array<std::uint64_t>(s.row);
  w.put_array<std::uint64_t>(s.col);
  if (s.header.weighted) w.put_array<double>(s.val);
  w.seal();
  return w.take();
}

inline ShardCSR decode_shard(std::span<const std::byte> data, const std::string& context = "shard",
                             bool verify_checksum = true) {
  ByteReader r(data, context);
  r.expect_magic(kShardMagic);
  r.expect_version(kFormatVersion);
  ShardCSR s;
  const auto flags = r.get<std::uint16_t>();
  if (flags & ~kShardFlagWeighted) fail(ErrorKind::format, context + ": unknown flags");
  s.header.weighted = (flags & kShardFlagWeighted) != 0;
  s.header.shard_id = r.get<std::uint32_t>();
  s.header.start = r.get<std::uint64_t>();
  s.header.end = r.get<std::uint64_t>();
  s.header.edge_count = r.get<std::uint64_t>();
  if (s.header.start > s.header.end) fail(ErrorKind::format, context + ": start > end");
  // The header fixes the file size; reject truncation before allocating.
  const std::uint64_t limit = data.size() / 8;
  if (s.header.end - s.header.start >= limit || s.header.edge_count >= limit ||
      encoded_shard_size(s.header) > data.size()) {
    fail(ErrorKind::unexpected_eof, context + ": unexpected end of file");
  }
  s.row = r.get_array<std::uint64_t>(s.header.end - s.header.start + 2);
  s.col = r.get_array<std::uint64_t>(s.header.edge_count);
  if (s.header.weighted) s.val = r.get_array<double>(s.header.edge_count);
  if (verify_checksum) {
    r.verify_checksum();
  } else {
    r.get<std::uint64_t>();
  }
  r.expect_end();
  check_shard(s, context);
  return s;
}

inline std::uint64_t write_shard(const ShardCSR& shard, const fs::path& path) {
  const Bytes bytes = encode_shard(shard);
  write_file_atomic(path, bytes);
  return bytes.size();
}

inline ShardCSR read_shard(const fs::path& path, IoCounter* counter = nullptr) {
  const Bytes bytes = read_file(path, counter);
  return decode_shard(bytes, path.string());
}

/// Header fields only; the payload is neither read nor verified.
inline ShardHeader read_shard_header(const fs::path& path) {
  constexpr std::size_t kHeaderBytes = 4 + 2 + 2 + 4 + 8 + 8 + 8;
  FilePtr f = open_file(path, "rb");
  Bytes raw(kHeaderBytes);
  raw.resize(std::fread(raw.data(), 1, kHeaderBytes, f.get()));
  ByteReader r(raw, path.string());
  r.expect_magic(kShardMagic);
  r.expect_version(kFormatVersion);
  ShardHeader h;
  h.weighted = (r.get<std::uint16_t>() & kShardFlagWeighted) != 0;
  h.shard_id = r.get<std::uint32_t>();
  h.start = r.get<std::uint64_t>();
  h.end = r.get<std::uint64_t>();
  h.edge_count = r.get<std::uint64_t>();
  return h;
}

inline void write_meta(const GraphMeta& meta, const DegreeTable& degrees, const fs::path& dir) {
  if (auto bad = validate_meta(meta)) fail(ErrorKind::invariant, "write_meta: " + *bad);
  if (degrees.in_degree.size() != meta.num_vertices || degrees.out_degree.size() != meta.num_vertices) {
    fail(ErrorKind::invariant, "write_meta: degree table size != |V|");
  }
  ByteWriter m;
  m.put_magic(kMetaMagic);
  m.put<std::uint16_t>(kFormatVersion);
  m.put<std::uint64_t>(meta.num_vertices);
  m.put<std::uint64_t>(meta.num_edges);
  m.put<std::uint32_t>(meta.num_shards());
  m.put<std::uint8_t>(meta.weighted ? 1 : 0);
  for (const auto& iv : meta.intervals) {
    m.put<std::uint64_t>(iv.start);
    m.put<std::uint64_t>(iv.end);
  }
  write_file_atomic(meta_path(dir), m.bytes());

  ByteWriter d;
  d.reserve(6 + 16 * meta.num_vertices);
  d.put_magic(kDegreesMagic);
  d.put<std::uint16_t>(kFormatVersion);
  d.put_array<std::uint64_t>(degrees.in_degree);
  d.put_array<std::uint64_t>(degrees.out_degree);
  write_file_atomic(degrees_path(dir), d.bytes());
}

inline GraphMeta read_meta_only(const fs::path& dir) {
  const auto path = meta_path(dir);
  if (!fs::exists(path)) fail(ErrorKind::not_found, dir.string() + ": metadata not found");
  const Bytes bytes = read_file(path);
  ByteReader r(bytes, path.string());
  r.expect_magic(kMetaMagic);
  r.expect_version(kFormatVersion);
  GraphMeta meta;
  meta.num_vertices = r.get<std::uint64_t>();
  meta.num_edges = r.get<std::uint64_t>();
  const auto shards = r.get<std::uint32_t>();
  const auto weighted = r.get<std::uint8_t>();
  if (weighted > 1) fail(ErrorKind::format, path.string() + ": bad weighted flag");
  meta.weighted = weighted == 1;
  if (shards > r.remaining() / 16) {
    fail(ErrorKind::unexpected_eof, path.string() + ": unexpected end of file");
  }
  meta.intervals.reserve(shards);
  for (std::uint32_t k = 0; k < shards; ++k) {
    VertexInterval iv;
    iv.start = r.get<std::uint64_t>();
    iv.end = r.get<std::uint64_t>();
    meta.intervals.push_back(iv);
  }
  r.expect_end();
  if (auto bad = validate_meta(meta)) fail(ErrorKind::format, path.string() + ": " + *bad);
  return meta;
}

inline std::pair<GraphMeta, DegreeTable> read_meta(const fs::path& dir) {
  GraphMeta meta = read_meta_only(dir);
  const auto path = degrees_path(dir);
  if (!fs::exists(path)) fail(ErrorKind::not_found, dir.string() + ": degree table not found");
  const Bytes bytes = read_file(path);
  ByteReader r(bytes, path.string());
  r.expect_magic(kDegreesMagic);
  r.expect_version(kFormatVersion);
  DegreeTable degrees;
  degrees.in_degree = r.get_array<std::uint64_t>(meta.num_vertices);
  degrees.out_degree = r.get_array<std::uint64_t>(meta.num_vertices);
  r.expect_end();
  return {std::move(meta), std::move(degrees)};
}

/// Dense id -> original id. Written only when input ids were not contiguous.
inline void write_vertex_map(std::span<const std::uint64_t> original_ids, const fs::path& dir) {
  ByteWriter w;
  w.put_magic(kVertexMapMagic);
  w.put<std::uint16_t>(kFormatVersion);
  w.put<std::uint64_t>(original_ids.size());
  w.put_array<std::uint64_t>(original_ids);
  w.seal();
  write_file_atomic(vertexmap_path(dir), w.bytes());
}

/// Empty when the workdir has no remap (ids are already dense).
inline std::vector<std::uint64_t> read_vertex_map(const fs::path& dir) {
  const auto path = vertexmap_path(dir);
  if (!fs::exists(path)) return {};
  const Bytes bytes = read_file(path);
  ByteReader r(bytes, path.string());
  r.expect_magic(kVertexMapMagic);
  r.expect_version(kFormatVersion);
  auto ids = r.get_array<std::uint64_t>(r.get<std::uint64_t>());
  r.verify_checksum();
  r.expect_end();
  return ids;
}

enum class ValueKind : std::uint8_t { real = 0, integer = 1 };

template <class T>
constexpr ValueKind value_kind_of() {
  static_assert(std::is_same_v<T, double> || std::is_same_v<T, std::int64_t>,
                "vertex value slots are 8-byte reals or 8-byte integers");
  return std::is_same_v<T, double> ? ValueKind::real : ValueKind::integer;
}

template <class T>
void write_values(std::span<const T> values, const fs::path& path) {
  ByteWriter w;
  w.reserve(23 + 8 * values.size());
  w.put_magic(kValuesMagic);
  w.put<std::uint16_t>(kFormatVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(value_kind_of<T>()));
  w.put<std::uint64_t>(values.size());
  w.put_array<T>(values);
  w.seal();
  write_file_atomic(path, w.bytes());
}

template <class T>
std::vector<T> read_values(const fs::path& path) {
  const Bytes bytes = read_file(path);
  ByteReader r(bytes, path.string());
  r.expect_magic(kValuesMagic);
  r.expect_version(kFormatVersion);
  if (r.get<std::uint8_t>() != static_cast<std::uint8_t>(value_kind_of<T>())) {
    fail(ErrorKind::format, path.string() + ": value kind mismatch");
  }
  auto values = r.get_array<T>(r.get<std::uint64_t>());
  r.verify_checksum();
  r.expect_end();
  return values;
}

}  // namespace slidegraph
