#pragma once

// Command-line front end: preprocess, run, stats, costmodel.
//
// Settings come from, in decreasing priority: command-line flags, GRAPHMP_*
// environment variables, an INI file named by --config, built-in defaults.
// Exit codes: 0 ok, 1 usage, 2 data/io, 3 internal invariant violation.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slidegraph/apps.hpp"
#include "slidegraph/costmodel.hpp"
#include "slidegraph/engine.hpp"
#include "slidegraph/metrics.hpp"
#include "slidegraph/preprocess.hpp"
#include "slidegraph/storage.hpp"

namespace slidegraph {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitInvariant = 3 };

inline int exit_code_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return kExitUsage;
    case ErrorKind::invariant: return kExitInvariant;
    default: return kExitData;
  }
}

struct RunConfig {
  std::string subcommand;
  std::string config;
  int verbosity = 0;

  // shared
  std::string workdir;
  unsigned workers = 0;  // 0: one per logical core

  // preprocess
  std::string input;
  std::string format = "auto";
  std::uint64_t threshold_edges = kDefaultThresholdEdges;
  bool symmetrize = false;
  bool weighted = false;
  bool verify = false;
  std::uint64_t scatter_buffer = kDefaultScatterBufferBytes;

  // run
  std::string app = "pagerank";
  std::optional<std::uint64_t> source;
  std::uint64_t max_iter = 200;
  std::string cache = "auto";
  std::optional<std::uint64_t> cache_budget;
  bool lru = false;
  std::string selective = "on";
  double activation_threshold = kDefaultActivationThreshold;
  std::uint64_t seed = kDefaultSeed;
  bool real_weights = false;
  double pr_base = 0.15;
  double pr_damping = 0.85;
  std::optional<double> epsilon;
  std::string values_out;
  std::string text_out;
  std::string metrics_out;
  std::string metrics_csv;

  // costmodel
  CostParams cost;
  std::string theta_from;
  bool csv = false;
};

namespace cli_detail {

inline std::string env_name(std::string_view long_name) {
  std::string out = "GRAPHMP_";
  for (char c : long_name) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

// Registers an option and, on the final pass, its GRAPHMP_* variable.
template <class T>
CLI::Option* add(CLI::App& app, bool env, const std::string& name, T& var, const std::string& help) {
  auto* o = app.add_option(name, var, help);
  if (env) {
    o->envname(env_name(name.substr(name.rfind("--") + 2)));
  }
  return o;
}

inline CLI::Option* flag(CLI::App& app, bool env, const std::string& name, bool& var, const std::string& help) {
  auto* o = app.add_flag(name, var, help);
  if (env) o->envname(env_name(name.substr(name.find("--") + 2)));
  return o;
}

inline void define(CLI::App& app, RunConfig& cfg, bool env) {
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", cfg.config, "INI file with default settings");
  app.add_flag("-v,--verbose", cfg.verbosity, "log each iteration to stderr");

  auto* pre = app.add_subcommand("preprocess", "shard an edge list into a workdir");
  add(*pre, env, env ? "input,--input" : "--input", cfg.input, "edge list (text or binary)");
  add(*pre, env, "--workdir", cfg.workdir, "output directory");
  add(*pre, env, "--format", cfg.format, "auto|text|binary");
  add(*pre, env, "--threshold-edges", cfg.threshold_edges, "edges per shard before a cut");
  flag(*pre, env, "--symmetrize", cfg.symmetrize, "add the reverse of every edge");
  flag(*pre, env, "--weighted", cfg.weighted, "third column holds edge weights");
  flag(*pre, env, "--verify", cfg.verify, "re-read every shard after writing");
  add(*pre, env, "--scatter-buffer", cfg.scatter_buffer, "bytes buffered per shard while scattering");
  add(*pre, env, "--workers", cfg.workers, "threads for CSR building");

  auto* run = app.add_subcommand("run", "run an application over a workdir");
  add(*run, env, "--workdir", cfg.workdir, "preprocessed directory");
  add(*run, env, "--app", cfg.app, "pagerank|sssp|cc");
  add(*run, env, "--source", cfg.source, "sssp source vertex (input id)");
  add(*run, env, "--max-iter", cfg.max_iter, "iteration limit");
  add(*run, env, "--workers", cfg.workers, "worker threads");
  add(*run, env, "--cache", cfg.cache, "auto or mode 0-4");
  add(*run, env, "--cache-budget", cfg.cache_budget, "cache budget in bytes");
  flag(*run, env, "--lru", cfg.lru, "evict least recently used shards when full");
  add(*run, env, "--selective", cfg.selective, "on|off");
  add(*run, env, "--activation-threshold", cfg.activation_threshold, "active ratio above which no shard is skipped");
  add(*run, env, "--seed", cfg.seed, "bloom filter hash seed");
  flag(*run, env, "--real-weights", cfg.real_weights, "sssp with real-valued distances");
  add(*run, env, "--pr-base", cfg.pr_base, "pagerank teleport term numerator");
  add(*run, env, "--pr-damping", cfg.pr_damping, "pagerank damping factor");
  add(*run, env, "--epsilon", cfg.epsilon, "pagerank change tolerance");
  add(*run, env, "--values", cfg.values_out, "binary values file (default <workdir>/values.bin)");
  add(*run, env, "--text", cfg.text_out, "text dump: one 'vertex<TAB>value' line per vertex");
  add(*run, env, "--metrics", cfg.metrics_out, "JSON-lines metrics (default <workdir>/metrics.jsonl)");
  add(*run, env, "--metrics-csv", cfg.metrics_csv, "metrics as CSV");

  auto* stats = app.add_subcommand("stats", "print the shard histogram of a workdir");
  add(*stats, env, "--workdir", cfg.workdir, "preprocessed directory");

  auto* cost = app.add_subcommand("costmodel", "compare per-iteration I/O of five out-of-core models");
  add(*cost, env, "-C,--C,--vertex-bytes", cfg.cost.vertex_bytes, "bytes per vertex value");
  add(*cost, env, "-D,--D,--edge-bytes", cfg.cost.edge_bytes, "bytes per edge");
  add(*cost, env, "-V,--V,--vertices", cfg.cost.vertices, "vertex count");
  add(*cost, env, "-E,--E,--edges", cfg.cost.edges, "edge count");
  add(*cost, env, "-P,--P,--partitions", cfg.cost.partitions, "partition count");
  add(*cost, env, "-N,--N,--workers", cfg.cost.workers, "worker count");
  add(*cost, env, "--theta", cfg.cost.theta, "fraction of edge bytes read from disk");
  add(*cost, env, "--theta-from", cfg.theta_from, "derive theta from a metrics file");
  add(*cost, env, "--workdir", cfg.workdir, "take |V|, |E| and P from a workdir");
  flag(*cost, env, "--csv", cfg.csv, "CSV output");

  for (auto* sub : {pre, run, stats, cost}) sub->allow_extras(!env);
}

// Turns INI entries into command-line tokens for the first pass.
inline std::vector<std::string> config_args(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) fail(ErrorKind::usage, path + ": cannot open config file");
  std::vector<std::string> args;
  for (const auto& item : CLI::ConfigINI().from_file(path)) {
    if (item.name == "++" || item.name == "--") continue;
    std::string name = item.name;
    std::replace(name.begin(), name.end(), '_', '-');
    if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
      if (item.inputs[0] == "true") args.push_back("--" + name);
      continue;
    }
    args.push_back("--" + name);
    args.insert(args.end(), item.inputs.begin(), item.inputs.end());
  }
  return args;
}

inline void parse(CLI::App& app, std::vector<std::string> args) {
  std::reverse(args.begin(), args.end());
  app.parse(std::move(args));
}

inline void require(bool ok, const std::string& message) {
  if (!ok) fail(ErrorKind::usage, message);
}

inline void validate(const RunConfig& c, const CLI::App& app) {
  const auto* sub = app.get_subcommand(c.subcommand);
  if (c.subcommand == "preprocess") {
    require(!c.input.empty(), "preprocess: an input edge list is required");
    require(!c.workdir.empty(), "preprocess: --workdir is required");
    require(c.format == "auto" || c.format == "text" || c.format == "binary", "--format must be auto, text or binary");
    require(c.threshold_edges >= 1, "--threshold-edges must be >= 1");
    require(c.scatter_buffer >= 64, "--scatter-buffer must be >= 64");
  } else if (c.subcommand == "run") {
    require(!c.workdir.empty(), "run: --workdir is required");
    require(c.app == "pagerank" || c.app == "sssp" || c.app == "cc", "--app must be pagerank, sssp or cc");
    require(c.app != "sssp" || c.source.has_value(), "sssp needs --source");
    require(c.app == "sssp" || !c.source.has_value(), "--source only applies to sssp");
    require(c.app == "sssp" || !c.real_weights, "--real-weights only applies to sssp");
    require(c.app == "pagerank" || !c.epsilon.has_value(), "--epsilon only applies to pagerank");
    require(c.cache == "auto" || (c.cache.size() == 1 && c.cache[0] >= '0' && c.cache[0] <= '4'),
            "--cache must be auto or 0-4");
    require(!(c.cache == "0" && c.cache_budget.has_value()), "--cache 0 and --cache-budget are mutually exclusive");
    require(c.selective == "on" || c.selective == "off", "--selective must be on or off");
    require(c.activation_threshold >= 0 && c.activation_threshold <= 1, "--activation-threshold must be in [0, 1]");
    require(c.max_iter >= 1, "--max-iter must be >= 1");
  } else if (c.subcommand == "stats") {
    require(!c.workdir.empty(), "stats: --workdir is required");
  } else if (c.subcommand == "costmodel") {
    require(!(sub->count("--theta") && !c.theta_from.empty()), "--theta and --theta-from are mutually exclusive");
  }
}

inline InputFormat parse_format(const std::string& f) {
  if (f == "text") return InputFormat::text;
  if (f == "binary") return InputFormat::binary;
  return InputFormat::automatic;
}

inline unsigned workers_of(const RunConfig& c) { return c.workers ? c.workers : default_worker_count(); }

inline int cmd_preprocess(const RunConfig& c, std::ostream& out) {
  PreprocessOptions opt;
  opt.input = c.input;
  opt.workdir = c.workdir;
  opt.format = parse_format(c.format);
  opt.threshold_edges = c.threshold_edges;
  opt.symmetrize = c.symmetrize;
  opt.weighted = c.weighted;
  opt.scatter_buffer_bytes = c.scatter_buffer;
  opt.workers = workers_of(c);
  opt.verify = c.verify;
  const auto start = std::chrono::steady_clock::now();
  const auto s = preprocess(opt);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out << "|V|=" << s.meta.num_vertices << " |E|=" << s.meta.num_edges << " P=" << s.meta.num_shards()
      << " bytes_written=" << s.bytes_written << " shard_bytes=" << s.total_shard_bytes
      << " bytes_read=" << s.bytes_read << (s.remapped ? " remapped=yes" : "") << " time=" << secs << "s\n";
  return kExitOk;
}

template <class T>
std::string format_value(T v) {
  if constexpr (std::is_same_v<T, double>) {
    if (std::isinf(v)) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  } else {
    if (v == unreachable<std::int64_t>()) return "inf";
    return std::to_string(v);
  }
}

template <class T>
void write_text_values(std::span<const T> values, std::span<const std::uint64_t> ids, const fs::path& path) {
  std::string text;
  for (std::size_t v = 0; v < values.size(); ++v) {
    text += std::to_string(ids.empty() ? v : ids[v]);
    text += '\t';
    text += format_value(values[v]);
    text += '\n';
  }
  write_file_atomic(path, std::as_bytes(std::span(text.data(), text.size())));
}

template <VertexProgram P>
int execute(const RunConfig& c, P& program, EngineOptions opt, std::ostream& out, std::ostream& err,
            std::span<const std::uint64_t> ids) {
  using T = typename P::value_type;
  const fs::path workdir = c.workdir;
  const fs::path metrics_path = c.metrics_out.empty() ? workdir / "metrics.jsonl" : fs::path(c.metrics_out);
  std::ofstream metrics(metrics_path, std::ios::trunc);
  if (!metrics) fail(ErrorKind::io, metrics_path.string() + ": cannot open for writing");
  opt.on_iteration = [&](const IterationStats& s) {
    metrics << to_json(s).dump() << '\n';
    if (c.verbosity > 0) {
      err << "iter " << s.iteration << " active=" << s.active_ratio << " loaded=" << s.shards_loaded
          << " skipped=" << s.shards_skipped << " disk=" << s.bytes_read_disk << " time=" << s.wall_time << "s\n";
    }
  };
  Engine engine(workdir, std::move(opt));
  const auto result = engine.run(program);
  metrics.close();

  const fs::path vpath = c.values_out.empty() ? values_path(workdir) : fs::path(c.values_out);
  write_values<T>(result.values, vpath);
  if (!c.text_out.empty()) write_text_values<T>(result.values, ids, c.text_out);
  if (!c.metrics_csv.empty()) {
    const auto csv = metrics_csv(result.iterations);
    write_file_atomic(c.metrics_csv, std::as_bytes(std::span(csv.data(), csv.size())));
  }
  double total = 0;
  for (const auto& s : result.iterations) total += s.wall_time;
  const auto cs = engine.cache().stats();
  out << "app=" << c.app << " iterations=" << result.iterations.size()
      << " converged=" << (result.converged ? "yes" : "no") << " cache_mode=" << static_cast<int>(engine.cache().mode())
      << " theta=" << cs.theta() << " time=" << total << "s values=" << vpath.string() << '\n';
  return kExitOk;
}

inline int cmd_run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const fs::path workdir = c.workdir;
  const auto meta = read_meta_only(workdir);
  const auto info = read_workdir_info(workdir);
  if (c.app == "cc" && !info.symmetrized) {
    fail(ErrorKind::data, "cc needs a symmetrized workdir; preprocess with --symmetrize");
  }
  const auto ids = read_vertex_map(workdir);

  EngineOptions opt;
  opt.workers = workers_of(c);
  opt.max_iterations = c.max_iter;
  opt.selective = c.selective == "on";
  opt.activation_threshold = c.activation_threshold;
  if (c.cache != "auto") opt.cache_mode = parse_cache_mode(c.cache[0] - '0');
  opt.cache_budget = c.cache_budget;
  opt.cache_lru = c.lru;
  opt.seed = c.seed;

  if (c.app == "pagerank") {
    PageRank pr;
    pr.base = c.pr_base;
    pr.damping = c.pr_damping;
    pr.epsilon = c.epsilon;
    return execute(c, pr, std::move(opt), out, err, ids);
  }
  if (c.app == "cc") {
    ConnectedComponents cc;
    return execute(c, cc, std::move(opt), out, err, ids);
  }
  VertexId source = *c.source;
  if (!ids.empty()) {
    const auto it = std::lower_bound(ids.begin(), ids.end(), *c.source);
    if (it == ids.end() || *it != *c.source) {
      fail(ErrorKind::usage, "source vertex " + std::to_string(*c.source) + " does not occur in the graph");
    }
    source = static_cast<VertexId>(it - ids.begin());
  } else if (source >= meta.num_vertices) {
    fail(ErrorKind::usage, "source vertex " + std::to_string(source) + " out of range");
  }
  if (c.real_weights) {
    Sssp<double> sssp(source);
    return execute(c, sssp, std::move(opt), out, err, ids);
  }
  Sssp<std::int64_t> sssp(source);
  const int rc = execute(c, sssp, std::move(opt), out, err, ids);
  if (sssp.rounded_weights() > 0) {
    err << "warning: " << sssp.rounded_weights()
        << " edge weight reads were rounded to integers; use --real-weights to keep fractions\n";
  }
  return rc;
}

inline int cmd_stats(const RunConfig& c, std::ostream& out) {
  const fs::path workdir = c.workdir;
  const auto [meta, degrees] = read_meta(workdir);
  const auto info = read_workdir_info(workdir);
  std::uint64_t max_in = 0;
  for (auto d : degrees.in_degree) max_in = std::max(max_in, d);

  char line[160];
  out << "|V|=" << meta.num_vertices << " |E|=" << meta.num_edges << " P=" << meta.num_shards()
      << (meta.weighted ? " weighted" : "") << (info.symmetrized ? " symmetrized" : "") << '\n';
  std::snprintf(line, sizeof line, "%6s %12s %12s %10s %12s %12s\n", "shard", "start", "end", "width", "edges",
                "bytes");
  out << line;
  std::uint64_t lo = UINT64_MAX, hi = 0, total = 0;
  for (std::uint32_t k = 0; k < meta.num_shards(); ++k) {
    const auto h = read_shard_header(shard_path(workdir, k));
    if (h.shard_id != k || h.start != meta.intervals[k].start || h.end != meta.intervals[k].end) {
      fail(ErrorKind::data, shard_path(workdir, k).string() + ": header disagrees with metadata");
    }
    const auto bytes = fs::file_size(shard_path(workdir, k));
    std::snprintf(line, sizeof line, "%6u %12llu %12llu %10llu %12llu %12llu\n", k,
                  static_cast<unsigned long long>(h.start), static_cast<unsigned long long>(h.end),
                  static_cast<unsigned long long>(h.end - h.start + 1),
                  static_cast<unsigned long long>(h.edge_count), static_cast<unsigned long long>(bytes));
    out << line;
    lo = std::min(lo, h.edge_count);
    hi = std::max(hi, h.edge_count);
    total += h.edge_count;
  }
  const double mean = static_cast<double>(total) / static_cast<double>(meta.num_shards());
  out << "edges/shard min=" << lo << " max=" << hi << " mean=" << mean << '\n';
  const auto bound = info.threshold_edges + max_in;
  out << "threshold=" << info.threshold_edges << " max_in_degree=" << max_in << " bound=" << bound
      << " within_bound=" << (hi <= bound ? "yes" : "no") << '\n';
  return kExitOk;
}

inline int cmd_costmodel(const RunConfig& c, const CLI::App& sub, std::ostream& out) {
  CostParams p = c.cost;
  if (!c.workdir.empty()) {
    const auto meta = read_meta_only(c.workdir);
    if (!sub.count("--vertices")) p.vertices = static_cast<double>(meta.num_vertices);
    if (!sub.count("--edges")) p.edges = static_cast<double>(meta.num_edges);
    if (!sub.count("--partitions")) p.partitions = static_cast<double>(meta.num_shards());
  }
  std::optional<Deviation> deviation;
  if (!c.theta_from.empty()) {
    const auto stats = read_metrics(c.theta_from);
    p.theta = theta_from_metrics(stats);
    validate(p);
    deviation = measured_vs_model(stats, p);
  }
  out << render(compare(p), c.csv);
  if (!c.csv) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", p.delta());
    out << "theta=" << p.theta << " delta=" << buf << '\n';
    if (deviation) {
      out << "measured VSW read/iter=" << format_bytes(deviation->measured_bytes)
          << " model=" << format_bytes(deviation->model_bytes) << " relative_error=" << deviation->relative_error
          << " over " << deviation->iterations << " iterations\n";
    }
  }
  return kExitOk;
}

inline std::string find_subcommand(const std::vector<std::string>& args) {
  for (const auto& a : args) {
    if (a == "preprocess" || a == "run" || a == "stats" || a == "costmodel") return a;
  }
  return {};
}

inline std::string find_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].starts_with("--config=")) return args[i].substr(9);
  }
  return {};
}

}  // namespace cli_detail

/// `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  using namespace cli_detail;
  RunConfig cfg;
  CLI::App app{"out-of-core vertex-centric graph engine", "slidegraph"};
  try {
    const std::string sub = find_subcommand(args);
    const std::string config = find_config(args);
    if (!config.empty() && !sub.empty()) {
      CLI::App first;
      define(first, cfg, false);
      std::vector<std::string> tokens{sub};
      const auto extra = config_args(config);
      tokens.insert(tokens.end(), extra.begin(), extra.end());
      parse(first, std::move(tokens));
    }
    define(app, cfg, true);
    parse(app, args);
    cfg.subcommand = app.get_subcommands().front()->get_name();
    validate(cfg, app);
    if (cfg.subcommand == "preprocess") return cmd_preprocess(cfg, out);
    if (cfg.subcommand == "run") return cmd_run(cfg, out, err);
    if (cfg.subcommand == "stats") return cmd_stats(cfg, out);
    return cmd_costmodel(cfg, *app.get_subcommand("costmodel"), out);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_of(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInvariant;
  }
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run_cli(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace slidegraph
