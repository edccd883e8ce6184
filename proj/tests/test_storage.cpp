#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "slidegraph/preprocess.hpp"
#include "slidegraph/storage.hpp"

using namespace slidegraph;

namespace {

ShardCSR random_shard(std::mt19937_64& rng, bool weighted) {
  std::uniform_int_distribution<std::uint64_t> width(1, 40), start(0, 1000), deg(0, 6);
  ShardCSR s;
  s.header.shard_id = static_cast<std::uint32_t>(rng() % 100);
  s.header.start = start(rng);
  s.header.end = s.header.start + width(rng) - 1;
  s.header.weighted = weighted;
  s.row.push_back(0);
  for (VertexId v = s.header.start; v <= s.header.end; ++v) {
    const auto d = deg(rng);
    for (std::uint64_t i = 0; i < d; ++i) {
      s.col.push_back(rng() % 5000);
      if (weighted) s.val.push_back(static_cast<double>(rng() % 1000) / 8.0);
    }
    s.row.push_back(s.col.size());
  }
  s.header.edge_count = s.col.size();
  return s;
}

ErrorKind error_kind(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::usage;
}

}  // namespace

TEST(Shard, RoundTripIsByteIdentical) {
  oracle::TempDir dir;
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const auto s = random_shard(rng, i % 2 == 0);
    write_shard(s, dir / "a.bin");
    const auto back = read_shard(dir / "a.bin");
    EXPECT_EQ(back, s);
    write_shard(back, dir / "b.bin");
    EXPECT_EQ(oracle::slurp(dir / "a.bin"), oracle::slurp(dir / "b.bin"));
  }
}

TEST(Shard, EveryPayloadByteFlipIsDetected) {
  std::mt19937_64 rng(11);
  const auto s = random_shard(rng, true);
  const auto bytes = encode_shard(s);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    auto bad = bytes;
    bad[i] ^= std::byte{0x5a};
    EXPECT_THROW(decode_shard(bad), Error) << "offset " << i;
  }
}

TEST(Shard, ChecksumMismatchIsReportedAsSuch) {
  std::mt19937_64 rng(3);
  const auto s = random_shard(rng, false);
  auto bytes = encode_shard(s);
  bytes[bytes.size() - 12] ^= std::byte{1};  // inside col
  EXPECT_EQ(error_kind([&] { decode_shard(bytes); }), ErrorKind::checksum);
}

TEST(Shard, TruncationAndVersion) {
  std::mt19937_64 rng(5);
  const auto bytes = encode_shard(random_shard(rng, false));
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{20}, bytes.size() - 1}) {
    std::span<const std::byte> part(bytes.data(), cut);
    EXPECT_EQ(error_kind([&] { decode_shard(part); }), ErrorKind::unexpected_eof) << cut;
  }
  auto v999 = bytes;
  v999[4] = std::byte{0xe7};
  v999[5] = std::byte{0x03};
  EXPECT_EQ(error_kind([&] { decode_shard(v999); }), ErrorKind::unsupported_version);
  auto magic = bytes;
  magic[0] = std::byte{'X'};
  EXPECT_EQ(error_kind([&] { decode_shard(magic); }), ErrorKind::bad_magic);
}

TEST(Shard, CsrExampleFromGroupedEdges) {
  const auto s = build_shard(0, {0, 1}, {{1, 0, {}}, {3, 0, {}}, {2, 1, {}}}, false);
  EXPECT_EQ(s.row, (std::vector<std::uint64_t>{0, 2, 3}));
  EXPECT_EQ(s.col, (std::vector<VertexId>{1, 3, 2}));
  EXPECT_TRUE(s.val.empty());
}

TEST(Shard, FourRowMatrixRowOffsets) {
  // Rows 0..3 hold 2, 2, 3 and 2 entries; the last row spans col[7], col[8].
  std::vector<Edge> edges;
  const std::vector<std::vector<VertexId>> rows{{4, 9}, {1, 6}, {0, 2, 8}, {3, 5}};
  for (VertexId r = 0; r < rows.size(); ++r) {
    for (auto c : rows[r]) edges.push_back({c, r, {}});
  }
  const auto s = build_shard(0, {0, 3}, edges, false);
  EXPECT_EQ(s.row, (std::vector<std::uint64_t>{0, 2, 4, 7, 9}));
  EXPECT_EQ(s.col[7], 3u);
  EXPECT_EQ(s.col[8], 5u);
  EXPECT_EQ(std::vector<VertexId>(s.in_neighbors(3).begin(), s.in_neighbors(3).end()), rows[3]);
}

TEST(Shard, EmptyShardHasZeroRows) {
  const auto s = build_shard(2, {5, 8}, {}, false);
  EXPECT_EQ(s.row, (std::vector<std::uint64_t>(5, 0)));
  EXPECT_TRUE(s.col.empty());
  EXPECT_EQ(decode_shard(encode_shard(s)), s);
}

TEST(Meta, RoundTripAndMissing) {
  oracle::TempDir dir;
  GraphMeta m;
  m.num_vertices = 7;
  m.num_edges = 4;
  m.intervals = {{0, 2}, {3, 5}, {6, 6}};
  m.weighted = true;
  DegreeTable d{{1, 0, 1, 0, 1, 0, 1}, {0, 1, 0, 1, 0, 1, 1}};
  write_meta(m, d, dir.path);
  const auto [m2, d2] = read_meta(dir.path);
  EXPECT_EQ(m2.num_vertices, 7u);
  EXPECT_EQ(m2.num_edges, 4u);
  EXPECT_EQ(m2.intervals, m.intervals);
  EXPECT_TRUE(m2.weighted);
  EXPECT_EQ(d2.in_degree, d.in_degree);
  EXPECT_EQ(d2.out_degree, d.out_degree);

  oracle::TempDir empty;
  try {
    read_meta(empty.path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::not_found);
    EXPECT_NE(std::string(e.what()).find("metadata not found"), std::string::npos);
  }
}

TEST(Meta, RejectsInconsistentIntervals) {
  oracle::TempDir dir;
  GraphMeta m;
  m.num_vertices = 7;
  m.num_edges = 0;
  m.intervals = {{0, 2}, {4, 6}};
  DegreeTable d{std::vector<std::uint64_t>(7, 0), std::vector<std::uint64_t>(7, 0)};
  EXPECT_THROW(write_meta(m, d, dir.path), Error);
}

TEST(VertexMap, RoundTrip) {
  oracle::TempDir dir;
  EXPECT_TRUE(read_vertex_map(dir.path).empty());
  const std::vector<std::uint64_t> ids{3, 10, 1000000007};
  write_vertex_map(ids, dir.path);
  EXPECT_EQ(read_vertex_map(dir.path), ids);
}

TEST(Values, RoundTripBothKinds) {
  oracle::TempDir dir;
  const std::vector<double> reals{0.5, 1e300, -0.0};
  write_values<double>(reals, dir / "r.bin");
  EXPECT_EQ(read_values<double>(dir / "r.bin"), reals);
  const std::vector<std::int64_t> ints{1, INT64_MAX, -3};
  write_values<std::int64_t>(ints, dir / "i.bin");
  EXPECT_EQ(read_values<std::int64_t>(dir / "i.bin"), ints);
  EXPECT_THROW(read_values<double>(dir / "i.bin"), Error);
}
