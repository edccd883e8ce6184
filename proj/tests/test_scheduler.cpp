#include <gtest/gtest.h>

#include <random>
#include <unordered_set>

#include "oracles.hpp"
#include "slidegraph/preprocess.hpp"
#include "slidegraph/scheduler.hpp"

using namespace slidegraph;

namespace {

ShardCSR shard_with_sources(std::vector<VertexId> sources) {
  std::vector<Edge> edges;
  for (auto s : sources) edges.push_back({s, 0, {}});
  return build_shard(0, {0, 0}, edges, false);
}

}  // namespace

TEST(Bloom, NoFalseNegativesOnShardSources) {
  const auto f = build_filter(shard_with_sources({1, 3, 2}));
  EXPECT_TRUE(f.test(1));
  EXPECT_TRUE(f.test(2));
  EXPECT_TRUE(f.test(3));
  EXPECT_EQ(f.bloom.inserted(), 3u);
}

TEST(Bloom, EmptyShardTestsFalseEverywhere) {
  const auto f = build_filter(build_shard(0, {0, 9}, {}, false));
  for (VertexId v = 0; v < 1000; ++v) EXPECT_FALSE(f.test(v));
}

TEST(Bloom, FalsePositiveRateAtTenBitsPerKey) {
  std::mt19937_64 rng(2024);
  std::unordered_set<std::uint64_t> keys;
  while (keys.size() < 10000) keys.insert(rng());
  BloomFilter f(keys.size(), 10, 7);
  for (auto k : keys) f.insert(k);
  for (auto k : keys) ASSERT_TRUE(f.test(k));
  std::uint64_t probes = 0, fp = 0;
  while (probes < 100000) {
    const auto k = rng();
    if (keys.count(k)) continue;
    ++probes;
    fp += f.test(k);
  }
  const double rate = static_cast<double>(fp) / static_cast<double>(probes);
  EXPECT_LE(rate, 0.02) << rate;
}

TEST(Bloom, DeterministicAndSeedDependent) {
  BloomFilter a(100, 10, 7), b(100, 10, 7), c(100, 10, 7, 12345);
  for (std::uint64_t k = 0; k < 100; ++k) {
    a.insert(k * 31);
    b.insert(k * 31);
    c.insert(k * 31);
  }
  EXPECT_EQ(a, b);
  EXPECT_NE(a.words()[0] ^ a.words()[1], c.words()[0] ^ c.words()[1]);
}

TEST(ShouldProcess, Examples) {
  const auto f = build_filter(shard_with_sources({4, 6}));
  const std::vector<VertexId> none;
  const std::vector<VertexId> unrelated{100, 200};
  EXPECT_TRUE(should_process(f, unrelated, 0.5, 0.001));
  EXPECT_FALSE(should_process(f, none, 0.0, 0.001));
  const std::vector<VertexId> active{4, 6};
  EXPECT_TRUE(should_process(f, active, 0.0005, 0.001));
}

TEST(ProbeOrder, ShortCircuitsAndMatchesExhaustive) {
  const auto f = build_filter(shard_with_sources({4, 6}));
  const std::vector<VertexId> first_member{4, 100, 200};
  const auto r1 = probe_active(first_member, f);
  EXPECT_TRUE(r1.hit);
  EXPECT_EQ(r1.probes, 1u);

  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<VertexId> src(rng() % 20);
    for (auto& s : src) s = rng() % 500;
    const auto filter = build_filter(shard_with_sources(src));
    std::vector<VertexId> active(rng() % 30);
    for (auto& a : active) a = rng() % 500;
    std::sort(active.begin(), active.end());
    bool exhaustive = false;
    for (auto a : active) exhaustive |= filter.test(a);
    const auto r = probe_active(active, filter);
    EXPECT_EQ(r.hit, exhaustive);
    if (!r.hit) EXPECT_EQ(r.probes, active.size());
    bool member = false;
    for (auto a : active) member |= std::find(src.begin(), src.end(), a) != src.end();
    if (member) EXPECT_TRUE(r.hit);
  }
}

TEST(FilterFile, RoundTripAndCorruption) {
  oracle::TempDir dir;
  const auto f = build_filter(shard_with_sources({1, 5, 9, 12}));
  write_filter(f, dir / "f.bin");
  const auto back = read_filter(dir / "f.bin", 0);
  EXPECT_EQ(back.bloom, f.bloom);
  EXPECT_EQ(back.bloom.num_bits(), expected_filter_bits(4, kDefaultBitsPerKey));
  auto bytes = oracle::slurp(dir / "f.bin");
  bytes[bytes.size() - 10] ^= 1;
  std::ofstream(dir / "f.bin", std::ios::binary) << bytes;
  EXPECT_THROW(read_filter(dir / "f.bin", 0), Error);
}
