#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "slidegraph/apps.hpp"
#include "slidegraph/engine.hpp"

using namespace slidegraph;

namespace {

struct Frozen {
  using value_type = std::int64_t;
  std::vector<VertexId> init(std::span<std::int64_t> src, std::span<std::int64_t> dst, const DegreeTable& d) const {
    std::fill(src.begin(), src.end(), 3);
    std::fill(dst.begin(), dst.end(), 3);
    std::vector<VertexId> all(d.num_vertices());
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  UpdateResult<std::int64_t> update(VertexId v, std::span<const VertexId>, std::span<const double>,
                                    std::span<const std::int64_t> src, const DegreeTable&) const {
    return {src[v], false};
  }
};

EngineOptions options(unsigned workers = 1) {
  EngineOptions o;
  o.workers = workers;
  o.cache_budget = 1 << 26;
  return o;
}

}  // namespace

TEST(Engine, SevenVertexFixtureFirstIteration) {
  const auto w = fixture::make(oracle::seven_vertex_fixture(), 5);
  const auto meta = read_meta_only(w->path());
  EXPECT_EQ(meta.intervals, (std::vector<VertexInterval>{{0, 1}, {2, 3}, {4, 6}}));
  const auto s0 = read_shard(shard_path(w->path(), 0));
  EXPECT_EQ(std::vector<VertexId>(s0.in_neighbors(0).begin(), s0.in_neighbors(0).end()),
            (std::vector<VertexId>{1, 3}));

  auto opt = options();
  opt.max_iterations = 1;
  PageRank pr;
  const auto r = run(w->path(), pr, opt);
  const auto [m, deg] = read_meta(w->path());
  const double init = 1.0 / 7;
  EXPECT_NEAR(init, 0.14, 0.005);
  const double expected = 0.15 / 7 + 0.85 * (init / deg.out_degree[1] + init / deg.out_degree[3]);
  EXPECT_EQ(r.values[0], expected);
}

TEST(Engine, FourCycleOneIteration) {
  const auto w = fixture::make({{0, 1, {}}, {1, 2, {}}, {2, 3, {}}, {3, 0, {}}}, 2);
  auto opt = options(2);
  opt.max_iterations = 1;
  PageRank pr;
  const auto r = run(w->path(), pr, opt);
  for (double v : r.values) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Engine, FixedPointProgramStopsAfterOneIteration) {
  const auto w = fixture::make(oracle::random_graph(50, 200, 1), 30);
  Frozen f;
  const auto r = run(w->path(), f, options());
  EXPECT_EQ(r.iterations.size(), 1u);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations[0].active_vertices, 0u);
  for (auto v : r.values) EXPECT_EQ(v, 3);
}

TEST(Engine, MatchesReferencePageRankExactly) {
  auto edges = oracle::random_graph(400, 3000, 8);
  const auto w = fixture::make(edges, 200);
  const auto n = oracle::densify(edges);
  auto opt = options(3);
  opt.max_iterations = 30;
  PageRank pr;
  const auto r = run(w->path(), pr, opt);
  const auto ref = oracle::pagerank(n, edges, 30);
  ASSERT_EQ(r.values.size(), ref.size());
  for (std::size_t v = 0; v < n; ++v) ASSERT_EQ(r.values[v], ref[v]) << v;
}

TEST(Engine, IterationStatsAreConsistent) {
  const auto w = fixture::make(oracle::random_graph(500, 4000, 4, true), 300, true);
  const auto P = read_meta_only(w->path()).num_shards();
  Sssp<> sssp(0);
  std::vector<IterationStats> seen;
  auto opt = options(2);
  opt.on_iteration = [&](const IterationStats& s) { seen.push_back(s); };
  const auto r = run(w->path(), sssp, opt);
  ASSERT_EQ(seen.size(), r.iterations.size());
  for (std::size_t i = 0; i < seen.size(); ++i) {
    const auto& s = seen[i];
    EXPECT_EQ(s.iteration, i + 1);
    EXPECT_EQ(s.shards_loaded + s.shards_skipped, P);
    EXPECT_EQ(s.cache_hits + s.cache_misses, s.shards_loaded);
    EXPECT_GE(s.active_ratio, 0.0);
    EXPECT_LE(s.active_ratio, 1.0);
    if (s.scheduling_ratio > kDefaultActivationThreshold) EXPECT_EQ(s.shards_skipped, 0u);
  }
  EXPECT_EQ(seen[0].filters_built, P);
}

TEST(Engine, WorkerCountDoesNotChangeResults) {
  const auto w = fixture::make(oracle::power_law_graph(1000, 8000, 1.0, 12), 500);
  PageRank pr;
  std::vector<std::vector<double>> results;
  for (unsigned workers : {1u, 2u, 7u}) {
    auto opt = options(workers);
    opt.max_iterations = 20;
    results.push_back(run(w->path(), pr, opt).values);
  }
  EXPECT_EQ(results[0], results[1]);
  EXPECT_EQ(results[0], results[2]);
}

TEST(Engine, FiltersPersistAndAreReused) {
  const auto w = fixture::make(oracle::random_graph(300, 1500, 2, true), 200, true);
  const auto P = read_meta_only(w->path()).num_shards();
  Sssp<> sssp(0);
  const auto first = run(w->path(), sssp, options());
  for (std::uint32_t k = 0; k < P; ++k) EXPECT_TRUE(fs::exists(filter_path(w->path(), k)));
  Engine again(w->path(), options());
  for (std::uint32_t k = 0; k < P; ++k) EXPECT_TRUE(again.has_filter(k));
  const auto second = again.run(sssp);
  EXPECT_EQ(second.iterations[0].filters_built, 0u);
  EXPECT_EQ(first.values, second.values);

  auto other = options();
  other.seed = 17;
  Engine seeded(w->path(), other);
  EXPECT_FALSE(seeded.has_filter(0));
  EXPECT_EQ(seeded.run(sssp).values, first.values);
}

TEST(Engine, CorruptShardAbortsWithContext) {
  const auto w = fixture::make(oracle::random_graph(100, 500, 3), 100);
  {
    std::fstream f(shard_path(w->path(), 1), std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(60);
    f.put('\x7f');
  }
  PageRank pr;
  try {
    run(w->path(), pr, options());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::checksum);
    EXPECT_NE(std::string(e.what()).find("shard-1"), std::string::npos) << e.what();
  }
}

TEST(ProcessShard, EmptyAdjacencyGivesBaseRank) {
  const auto shard = build_shard(0, {0, 2}, {{1, 0, {}}}, false);
  DegreeTable deg{{1, 0, 0}, {0, 1, 0}};
  VertexState<double> state(3);
  std::fill(state.src_values.begin(), state.src_values.end(), 1.0 / 3);
  std::vector<std::uint8_t> changed(3);
  PageRank pr;
  process_shard(shard, state, pr, deg, changed);
  EXPECT_EQ(state.dst_values[1], 0.15 / 3);
  EXPECT_EQ(state.dst_values[2], 0.15 / 3);
}

TEST(ProcessShard, UnreachableNeighborsKeepValue) {
  const auto shard = build_shard(0, {0, 1}, {{0, 1, 4.0}}, true);
  DegreeTable deg{{0, 1}, {1, 0}};
  VertexState<std::int64_t> state(2);
  state.src_values = {unreachable<std::int64_t>(), 9};
  std::vector<std::uint8_t> changed(2);
  Sssp<> sssp(0);
  EXPECT_EQ(process_shard(shard, state, sssp, deg, changed), 0u);
  EXPECT_EQ(state.dst_values[1], 9);
  EXPECT_EQ(changed[1], 0);
}

TEST(ProcessShard, ComponentLabelTakesMinimum) {
  const auto shard = build_shard(0, {7, 7}, {{3, 7, {}}, {4, 7, {}}, {5, 7, {}}}, false);
  DegreeTable deg{std::vector<std::uint64_t>(10, 1), std::vector<std::uint64_t>(10, 1)};
  VertexState<std::int64_t> state(10);
  state.src_values = {0, 1, 2, 5, 2, 9, 6, 7, 8, 9};
  std::vector<std::uint8_t> changed(10);
  ConnectedComponents cc;
  EXPECT_EQ(process_shard(shard, state, cc, deg, changed), 1u);
  EXPECT_EQ(state.dst_values[7], 2);
  EXPECT_EQ(changed[7], 1);
}

TEST(ProcessShard, IntervalOutsideGraphIsInvariantViolation) {
  const auto shard = build_shard(0, {2, 4}, {}, false);
  DegreeTable deg{{0, 0, 0}, {0, 0, 0}};
  VertexState<std::int64_t> state(3);
  std::vector<std::uint8_t> changed(3);
  ConnectedComponents cc;
  try {
    process_shard(shard, state, cc, deg, changed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invariant);
  }
}

TEST(SwapAndTally, Ratios) {
  VertexState<double> state(1000);
  state.dst_values[5] = 1.5;
  std::vector<std::uint8_t> changed(1000, 0);
  EXPECT_EQ(swap_and_tally(state, changed), 0.0);
  changed[1] = changed[2] = changed[3] = 1;
  EXPECT_DOUBLE_EQ(swap_and_tally(state, changed), 0.003);
  EXPECT_EQ(state.active_list(), (std::vector<VertexId>{1, 2, 3}));
  EXPECT_EQ(state.src_values[5], 0.0);  // swapped twice
  std::fill(changed.begin(), changed.end(), 1);
  EXPECT_EQ(swap_and_tally(state, changed), 1.0);
  EXPECT_EQ(state.src_values[5], 1.5);
}

TEST(WorkerPool, CoversEveryIndexOnceAndPropagatesErrors) {
  WorkerPool pool(4);
  std::vector<std::atomic<int>> hits(1000);
  pool.parallel_for(hits.size(), [&](std::size_t i, unsigned) { ++hits[i]; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(pool.parallel_for(10, [](std::size_t i, unsigned) {
    if (i == 3) throw std::runtime_error("boom");
  }),
               std::runtime_error);
  int count = 0;
  pool.parallel_for(0, [&](std::size_t, unsigned) { ++count; });
  EXPECT_EQ(count, 0);
}
