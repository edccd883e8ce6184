#pragma once

// Per-iteration disk traffic, memory footprint and preprocessing I/O of five
// out-of-core computation models (all assume every edge is processed each
// iteration):
//   PSW  parallel sliding windows        ESG  edge-centric scatter-gather
//   VSP  vertex-centric streamlined      DSW  dual sliding windows
//   VSW  vertex-centric sliding window (this engine)

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slidegraph/engine.hpp"
#include "slidegraph/error.hpp"

namespace slidegraph {

enum class Model { psw, esg, vsp, dsw, vsw };

inline constexpr std::array<Model, 5> kAllModels = {Model::psw, Model::esg, Model::vsp, Model::dsw, Model::vsw};

inline std::string_view to_string(Model m) {
  switch (m) {
    case Model::psw: return "PSW";
    case Model::esg: return "ESG";
    case Model::vsp: return "VSP";
    case Model::dsw: return "DSW";
    case Model::vsw: return "VSW";
  }
  return "?";
}

struct CostParams {
  double vertex_bytes = 8;  // C
  double edge_bytes = 8;    // D
  double vertices = 0;      // |V|
  double edges = 0;         // |E|
  double partitions = 1;    // P
  double workers = 1;       // N
  double theta = 1;         // fraction of edge bytes read from disk per iteration

  double avg_degree() const { return edges / vertices; }

  /// Expected number of partitions a vertex's edges touch: (1 - e^(-d_avg/P)) P.
  double delta() const { return (1.0 - std::exp(-avg_degree() / partitions)) * partitions; }
};

inline void validate(const CostParams& p) {
  if (!(p.vertex_bytes > 0 && p.edge_bytes > 0 && p.vertices > 0 && p.edges > 0 && p.partitions > 0 &&
        p.workers > 0)) {
    fail(ErrorKind::usage, "cost model parameters C, D, V, E, P, N must be positive");
  }
  if (!(p.theta >= 0 && p.theta <= 1)) fail(ErrorKind::usage, "theta must be in [0, 1]");
}

struct CostRow {
  Model model = Model::vsw;
  double read_bytes = 0;
  double write_bytes = 0;
  double memory_bytes = 0;
  double preprocess_io_bytes = 0;
};

inline CostRow cost(Model model, const CostParams& p) {
  validate(p);
  const double C = p.vertex_bytes, D = p.edge_bytes, V = p.vertices, E = p.edges, P = p.partitions;
  CostRow r;
  r.model = model;
  switch (model) {
    case Model::psw:
      r.read_bytes = C * V + 2 * (C + D) * E;
      r.write_bytes = C * V + 2 * (C + D) * E;
      r.memory_bytes = (C * V + 2 * (C + D) * E) / P;
      r.preprocess_io_bytes = (C + 5 * D) * E;
      break;
    case Model::esg:
      r.read_bytes = C * V + (C + D) * E;
      r.write_bytes = C * V + C * E;
      r.memory_bytes = C * V / P;
      r.preprocess_io_bytes = 2 * D * E;
      break;
    case Model::vsp: {
      const double delta = p.delta();
      r.read_bytes = C * (1 + delta) * V + D * E;
      r.write_bytes = C * V;
      r.memory_bytes = C * (2 + delta) * V / P;
      r.preprocess_io_bytes = 4 * D * E;
      break;
    }
    case Model::dsw: {
      const double root = std::sqrt(P);
      r.read_bytes = C * root * V + D * E;
      r.write_bytes = C * root * V;
      r.memory_bytes = 2 * C * V / root;
      r.preprocess_io_bytes = 6 * D * E;
      break;
    }
    case Model::vsw:
      r.read_bytes = p.theta * D * E;
      r.write_bytes = 0;
      r.memory_bytes = 2 * C * V + p.workers * D * E / P;
      r.preprocess_io_bytes = 5 * D * E;
      break;
  }
  return r;
}

struct Comparison {
  std::vector<CostRow> rows;  // in kAllModels order
  // Models attaining the minimum of each column (ties included).
  std::vector<Model> min_read, min_write, min_memory, min_preprocess;
};

inline Comparison compare(const CostParams& p) {
  Comparison c;
  for (Model m : kAllModels) c.rows.push_back(cost(m, p));
  auto argmin = [&](double CostRow::*field) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : c.rows) best = std::min(best, r.*field);
    std::vector<Model> out;
    for (const auto& r : c.rows) {
      if (r.*field == best) out.push_back(r.model);
    }
    return out;
  };
  c.min_read = argmin(&CostRow::read_bytes);
  c.min_write = argmin(&CostRow::write_bytes);
  c.min_memory = argmin(&CostRow::memory_bytes);
  c.min_preprocess = argmin(&CostRow::preprocess_io_bytes);
  return c;
}

/// "1.76 GB"-style rendering with SI prefixes.
inline std::string format_bytes(double bytes) {
  static constexpr std::array<std::string_view, 7> units = {"B", "kB", "MB", "GB", "TB", "PB", "EB"};
  std::size_t u = 0;
  double v = bytes;
  while (std::abs(v) >= 1000 && u + 1 < units.size()) {
    v /= 1000;
    ++u;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, u == 0 ? "%.0f %s" : "%.3g %s", v, std::string(units[u]).c_str());
  return buf;
}

/// Aligned text table (minimum of each column marked with '*') or CSV in raw bytes.
inline std::string render(const Comparison& c, bool csv) {
  auto is_min = [](const std::vector<Model>& mins, Model m) {
    return std::find(mins.begin(), mins.end(), m) != mins.end();
  };
  std::string out;
  char line[256];
  if (csv) {
    out += "model,read_bytes,write_bytes,memory_bytes,preprocess_io_bytes\n";
    for (const auto& r : c.rows) {
      std::snprintf(line, sizeof line, "%s,%.17g,%.17g,%.17g,%.17g\n", std::string(to_string(r.model)).c_str(),
                    r.read_bytes, r.write_bytes, r.memory_bytes, r.preprocess_io_bytes);
      out += line;
    }
    return out;
  }
  std::snprintf(line, sizeof line, "%-6s %14s %14s %14s %14s\n", "model", "read/iter", "write/iter", "memory",
                "preprocess");
  out += line;
  auto cell = [&](double v, bool min) { return format_bytes(v) + (min ? " *" : "  "); };
  for (const auto& r : c.rows) {
    std::snprintf(line, sizeof line, "%-6s %14s %14s %14s %14s\n", std::string(to_string(r.model)).c_str(),
                  cell(r.read_bytes, is_min(c.min_read, r.model)).c_str(),
                  cell(r.write_bytes, is_min(c.min_write, r.model)).c_str(),
                  cell(r.memory_bytes, is_min(c.min_memory, r.model)).c_str(),
                  cell(r.preprocess_io_bytes, is_min(c.min_preprocess, r.model)).c_str());
    out += line;
  }
  return out;
}

struct Deviation {
  double measured_bytes = 0;  // mean disk bytes per steady-state iteration
  double model_bytes = 0;     // theta * D * |E|
  double relative_error = 0;
  std::uint64_t iterations = 0;
};

/// Compares the engine's disk reads after the warm-up iteration against the
/// VSW read formula.
inline Deviation measured_vs_model(std::span<const IterationStats> stats, const CostParams& p) {
  if (stats.size() < 2) fail(ErrorKind::data, "insufficient data: need at least 2 iterations");
  Deviation d;
  double total = 0;
  for (const auto& s : stats.subspan(1)) total += static_cast<double>(s.bytes_read_disk);
  d.iterations = stats.size() - 1;
  d.measured_bytes = total / static_cast<double>(d.iterations);
  d.model_bytes = cost(Model::vsw, p).read_bytes;
  if (d.model_bytes == 0) {
    d.relative_error = d.measured_bytes == 0 ? 0 : std::numeric_limits<double>::infinity();
  } else {
    d.relative_error = std::abs(d.measured_bytes - d.model_bytes) / d.model_bytes;
  }
  return d;
}

}  // namespace slidegraph
