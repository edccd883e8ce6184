#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "slidegraph/apps.hpp"
#include "slidegraph/engine.hpp"

using namespace slidegraph;

namespace {

EngineOptions options(std::uint64_t max_iterations = 200) {
  EngineOptions o;
  o.workers = 2;
  o.max_iterations = max_iterations;
  o.cache_budget = 1 << 26;
  return o;
}

constexpr auto kInf = unreachable<std::int64_t>();

}  // namespace

TEST(Sssp, ChainOneIterationAtATime) {
  const auto w = fixture::make({{0, 1, 1.0}, {1, 2, 1.0}}, 1, true);
  Sssp<> sssp(0);
  EXPECT_EQ(run(w->path(), sssp, options(1)).values, (std::vector<std::int64_t>{0, 1, kInf}));
  EXPECT_EQ(run(w->path(), sssp, options(2)).values, (std::vector<std::int64_t>{0, 1, 2}));
  EXPECT_EQ(oracle::bellman_ford(3, {{0, 1, 1.0}, {1, 2, 1.0}}, 0), (std::vector<double>{0, 1, 2}));
}

TEST(Sssp, UnreachableStaysInfiniteAndSourceStaysZero) {
  const auto w = fixture::make({{0, 1, 3.0}, {2, 3, 1.0}, {1, 0, 1.0}}, 2, true);
  Sssp<> sssp(0);
  const auto r = run(w->path(), sssp, options());
  EXPECT_EQ(r.values, (std::vector<std::int64_t>{0, 3, kInf, kInf}));
  EXPECT_TRUE(r.converged);
}

TEST(Sssp, SaturatesInsteadOfOverflowing) {
  Sssp<> sssp(0);
  DegreeTable deg{{0, 1}, {1, 0}};
  const std::vector<VertexId> src{0};
  const std::vector<double> w{5};
  const std::vector<std::int64_t> values{kInf - 2, kInf};
  const auto r = sssp.update(1, src, w, values, deg);
  EXPECT_EQ(r.value, kInf);
  EXPECT_FALSE(r.changed);
}

TEST(Sssp, RoundsFractionalWeightsAndCounts) {
  Sssp<> sssp(0);
  DegreeTable deg{{0, 1}, {1, 0}};
  const std::vector<VertexId> src{0};
  const std::vector<double> w{2.6};
  const std::vector<std::int64_t> values{0, kInf};
  EXPECT_EQ(sssp.update(1, src, w, values, deg).value, 3);
  EXPECT_EQ(sssp.rounded_weights(), 1u);
  Sssp<double> real(0);
  const std::vector<double> dv{0, unreachable<double>()};
  EXPECT_EQ(real.update(1, src, w, dv, deg).value, 2.6);
}

TEST(Sssp, RealValuedMatchesBellmanFord) {
  auto edges = oracle::random_graph(200, 1500, 31, true);
  for (auto& e : edges) *e.weight = *e.weight / 4.0 + 0.125;
  const auto w = fixture::make(edges, 100, true);
  const auto n = oracle::densify(edges);
  Sssp<double> sssp(0);
  const auto r = run(w->path(), sssp, options());
  EXPECT_EQ(r.values, oracle::bellman_ford(n, edges, 0));
}

TEST(Sssp, SourceOutOfRange) {
  const auto w = fixture::make({{0, 1, {}}}, 2);
  Sssp<> sssp(5);
  EXPECT_THROW(run(w->path(), sssp, options()), Error);
}

TEST(Cc, TwoComponents) {
  const auto w = fixture::make({{0, 1, {}}, {2, 2, {}}}, 1, false, true);
  ConnectedComponents cc;
  EXPECT_EQ(run(w->path(), cc, options()).values, (std::vector<std::int64_t>{0, 0, 2}));
}

TEST(Cc, EdgelessGraphTerminatesAfterOneIteration) {
  const auto w = fixture::make({{0, 0, {}}, {1, 1, {}}, {2, 2, {}}}, 1, false, true);
  ConnectedComponents cc;
  const auto r = run(w->path(), cc, options());
  EXPECT_EQ(r.values, (std::vector<std::int64_t>{0, 1, 2}));
  EXPECT_EQ(r.iterations.size(), 1u);
}

TEST(Cc, PathConvergesWithinTwoIterations) {
  const auto w = fixture::make({{2, 1, {}}, {1, 0, {}}}, 10, false, true);
  ConnectedComponents cc;
  EXPECT_EQ(run(w->path(), cc, options(2)).values, (std::vector<std::int64_t>{0, 0, 0}));
}

TEST(Cc, LabelsNeverIncreaseAndStayBelowId) {
  auto edges = oracle::random_graph(300, 400, 14);
  const auto w = fixture::make(edges, 50, false, true);
  const auto n = read_meta_only(w->path()).num_vertices;
  ConnectedComponents cc;
  std::vector<std::vector<std::int64_t>> history;
  for (std::uint64_t it = 1; it <= 6; ++it) history.push_back(run(w->path(), cc, options(it)).values);
  for (std::size_t i = 0; i < history.size(); ++i) {
    for (std::uint64_t v = 0; v < n; ++v) {
      EXPECT_LE(history[i][v], static_cast<std::int64_t>(v));
      if (i > 0) EXPECT_LE(history[i][v], history[i - 1][v]);
    }
  }
}

TEST(PageRank, NoInNeighborsGivesBase) {
  PageRank pr;
  DegreeTable deg{{0, 0}, {0, 0}};
  const std::vector<double> values{0.5, 0.5};
  EXPECT_EQ(pr.update(0, {}, {}, values, deg).value, 0.15 / 2);
}

TEST(PageRank, EpsilonControlsChangeDetection) {
  PageRank pr;
  pr.epsilon = 0.1;
  DegreeTable deg{{1, 1}, {1, 1}};
  const std::vector<VertexId> src{1};
  const std::vector<double> values{0.45, 0.5};
  const auto r = pr.update(0, src, {}, values, deg);
  EXPECT_FALSE(r.changed);
  pr.epsilon.reset();
  EXPECT_TRUE(pr.update(0, src, {}, values, deg).changed);
}

TEST(PageRank, MassIsOneWhenEveryVertexHasOutEdges) {
  const auto w = fixture::make({{0, 1, {}}, {1, 2, {}}, {2, 0, {}}, {2, 1, {}}}, 2);
  PageRank pr;
  const auto r = run(w->path(), pr, options(15));
  double sum = 0;
  for (double v : r.values) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}
