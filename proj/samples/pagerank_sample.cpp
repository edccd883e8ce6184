// Preprocesses an edge list into a temporary workdir and prints PageRank.
//
//   pagerank_sample [edge-list] [iterations]

#include <cstdio>
#include <filesystem>
#include <string>

#include "slidegraph/slidegraph.hpp"

namespace sg = slidegraph;

int main(int argc, char** argv) {
  const std::filesystem::path input = argc > 1 ? argv[1] : SAMPLE_DIR "/tiny.txt";
  const std::uint64_t iterations = argc > 2 ? std::stoull(argv[2]) : 20;
  const auto workdir = std::filesystem::temp_directory_path() / "slidegraph-sample";

  try {
    sg::PreprocessOptions pre;
    pre.input = input;
    pre.workdir = workdir;
    pre.threshold_edges = 2;
    const auto summary = sg::preprocess(pre);
    std::printf("%llu vertices, %llu edges, %u shards\n",
                static_cast<unsigned long long>(summary.meta.num_vertices),
                static_cast<unsigned long long>(summary.meta.num_edges), summary.meta.num_shards());

    sg::EngineOptions opt;
    opt.max_iterations = iterations;
    sg::PageRank pagerank;
    const auto result = sg::run(workdir, pagerank, opt);
    for (std::size_t v = 0; v < result.values.size(); ++v) std::printf("%zu %.6f\n", v, result.values[v]);
  } catch (const sg::Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  std::filesystem::remove_all(workdir);
}
