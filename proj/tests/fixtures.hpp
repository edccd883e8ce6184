#pragma once

// Builds preprocessed workdirs from in-memory edge lists.

#include "oracles.hpp"
#include "slidegraph/preprocess.hpp"

namespace fixture {

namespace fs = std::filesystem;

struct Workdir {
  oracle::TempDir tmp;
  slidegraph::PreprocessSummary summary;

  fs::path path() const { return tmp.path / "w"; }
};

inline std::unique_ptr<Workdir> make(const std::vector<slidegraph::Edge>& edges, std::uint64_t threshold,
                                     bool weighted = false, bool symmetrize = false) {
  auto w = std::make_unique<Workdir>();
  oracle::write_edge_list(w->tmp / "edges.txt", edges);
  slidegraph::PreprocessOptions opt;
  opt.input = w->tmp / "edges.txt";
  opt.workdir = w->path();
  opt.threshold_edges = threshold;
  opt.weighted = weighted;
  opt.symmetrize = symmetrize;
  w->summary = slidegraph::preprocess(opt);
  return w;
}

}  // namespace fixture
