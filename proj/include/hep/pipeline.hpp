#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hep/assignment.hpp"
#include "hep/common.hpp"
#include "hep/degree_stats.hpp"
#include "hep/edge_io.hpp"
#include "hep/metrics.hpp"
#include "hep/nepp.hpp"
#include "hep/oracle.hpp"
#include "hep/pruned_csr.hpp"
#include "hep/streaming.hpp"

namespace hep {

// hep          degree split, in-memory expansion, informed streaming of the
//              spilled high-to-high edges (the real pipeline)
// reference-ne plain in-memory expansion of the whole graph, no split; the
//              adjacency-list twin used for cross-checking
// random       like hep, but spilled edges get uniform random placement
// degree-hash  like hep, but spilled edges get degree-hashed placement
enum class Mode { hep, reference_ne, random_stream, degree_hash };

inline const char *mode_name(Mode m) {
  switch (m) {
    case Mode::hep: return "hep";
    case Mode::reference_ne: return "reference-ne";
    case Mode::random_stream: return "random";
    case Mode::degree_hash: return "degree-hash";
  }
  return "hep";
}

inline Mode parse_mode(const std::string &name) {
  if (name == "hep") return Mode::hep;
  if (name == "reference-ne") return Mode::reference_ne;
  if (name == "random") return Mode::random_stream;
  if (name == "degree-hash") return Mode::degree_hash;
  throw ConfigError("unknown mode: " + name +
                    " (expected hep, reference-ne, random, or degree-hash)");
}

// Raised when no degree threshold fits the memory budget; carries the full
// planning table so callers can show what was evaluated.
struct PlanInfeasibleError : std::runtime_error {
  TauPlan plan;
  PlanInfeasibleError(const std::string &msg, TauPlan p)
      : std::runtime_error(msg), plan(std::move(p)) {}
};

struct RunConfig {
  Mode mode = Mode::hep;
  std::uint32_t k = 2;
  double tau = 1.0;      // threshold multiplier over the mean degree
  bool tau_infinite = false;
  bool tau_auto = false; // plan tau from memory_budget instead
  std::uint64_t memory_budget = 0;
  double alpha = 1.05;   // streaming balance slack
  double lambda = 1.1;   // streaming balance weight
  std::uint64_t seed = 42;
  bool instrument = false;
};

template <class Vid>
struct RunResult {
  RunConfig config;       // as resolved (reference-ne forces an infinite tau)
  double tau_effective = std::numeric_limits<double>::infinity();
  TauPlan plan;           // populated when tau was planned from a budget

  std::uint64_t num_vertices = 0;
  std::uint64_t num_active_vertices = 0;
  std::uint64_t num_edges = 0;
  std::uint64_t num_self_loops = 0;
  double mean_degree = 0.0;
  std::uint64_t max_degree = 0;

  std::uint64_t high_count = 0;
  std::uint64_t threshold_degree = 0;
  std::uint64_t column_entries = 0;  // as built
  std::uint64_t spilled_edges = 0;

  std::uint64_t estimated_bytes = 0;
  std::uint64_t estimated_column_entries = 0;
  std::uint64_t measured_column_bytes = 0;
  std::uint64_t measured_index_bytes = 0;
  std::uint64_t measured_size_field_bytes = 0;
  std::uint64_t measured_bitset_bytes = 0;

  std::uint64_t capacity = 0;
  NeppReport nepp;

  std::uint64_t streamed_edges = 0;
  std::uint64_t fallback_count = 0;

  std::vector<std::uint64_t> sizes;
  std::vector<std::uint64_t> cover_counts;
  std::uint64_t total_records = 0;
  double replication_factor = 0.0;
  double edge_balance = 0.0;
  double vertex_balance = 0.0;

  double t_degrees = 0.0, t_build = 0.0, t_expand = 0.0, t_stream = 0.0, t_total = 0.0;

  // Flat key layout; everything except the timing_* keys is a pure function
  // of input bytes and configuration, which is what the determinism checks
  // compare.
  nlohmann::ordered_json stats_json(bool with_timings = true) const {
    nlohmann::ordered_json j;
    j["mode"] = mode_name(config.mode);
    j["k"] = config.k;
    j["id_width"] = sizeof(Vid);
    j["alpha"] = config.alpha;
    j["lambda"] = config.lambda;
    j["seed"] = config.seed;
    j["instrumented"] = config.instrument;
    if (config.tau_auto)
      j["tau_requested"] = "auto";
    else if (config.tau_infinite)
      j["tau_requested"] = "inf";
    else
      j["tau_requested"] = config.tau;
    if (std::isinf(tau_effective))
      j["tau_effective"] = "inf";
    else
      j["tau_effective"] = tau_effective;
    j["memory_budget_bytes"] = config.memory_budget;
    if (config.tau_auto) j["plan_cutoff"] = plan.cutoff;

    j["graph_vertices"] = num_vertices;
    j["graph_active_vertices"] = num_active_vertices;
    j["graph_edges"] = num_edges;
    j["graph_self_loops"] = num_self_loops;
    j["graph_mean_degree"] = mean_degree;
    j["graph_max_degree"] = max_degree;

    j["split_high_vertices"] = high_count;
    j["split_threshold_degree"] = threshold_degree;
    j["split_column_entries"] = column_entries;
    j["split_spilled_edges"] = spilled_edges;

    j["memory_estimated_bytes"] = estimated_bytes;
    j["memory_estimated_column_entries"] = estimated_column_entries;
    j["memory_measured_column_bytes"] = measured_column_bytes;
    j["memory_measured_index_bytes"] = measured_index_bytes;
    j["memory_measured_size_field_bytes"] = measured_size_field_bytes;
    j["memory_measured_bitset_bytes"] = measured_bitset_bytes;

    j["expansion_capacity"] = capacity;
    j["expansion_initial_column_entries"] = nepp.initial_column_entries;
    j["expansion_cleaned_entries"] = nepp.cleaned_entries;
    j["expansion_cleaned_fraction"] = nepp.cleaned_fraction();
    j["expansion_spill_over_edges"] = nepp.spill_over_edges;
    j["expansion_reconciled_edges"] = nepp.reconciled_edges;
    j["expansion_remaining_assigned"] = nepp.remaining_assigned;
    j["expansion_exhausted_early"] = nepp.exhausted_early;
    if (config.instrument) {
      j["expansion_core_reread_violations"] = nepp.core_reread_violations;
      j["expansion_dext_recount_mismatches"] = nepp.dext_recount_mismatches;
      j["expansion_cleanup_residue"] = nepp.cleanup_residue;
    }

    j["streaming_edges"] = streamed_edges;
    j["streaming_fallback_assignments"] = fallback_count;

    j["quality_replication_factor"] = replication_factor;
    j["quality_edge_balance"] = edge_balance;
    j["quality_vertex_balance"] = vertex_balance;
    j["quality_partition_sizes"] = sizes;
    j["quality_cover_counts"] = cover_counts;
    j["quality_total_records"] = total_records;

    if (with_timings) {
      j["timing_degrees_s"] = t_degrees;
      j["timing_build_s"] = t_build;
      j["timing_expansion_s"] = t_expand;
      j["timing_streaming_s"] = t_stream;
      j["timing_total_s"] = t_total;
    }
    return j;
  }
};

namespace detail {

template <class Vid>
void finish_quality(RunResult<Vid> &r, const std::vector<dense_bitset> &cover,
                    const std::vector<std::uint64_t> &sizes,
                    const AssignmentSink<Vid> &sink) {
  r.sizes = sizes;
  r.cover_counts.clear();
  std::uint64_t replicas = 0;
  for (const auto &c : cover) {
    std::uint64_t p = c.popcount();
    r.cover_counts.push_back(p);
    replicas += p;
  }
  r.total_records = sink.total();
  if (sink.counts() != r.sizes)
    throw InternalError("per-partition size accounting diverged from the sink");
  r.replication_factor = replication_factor(replicas, r.num_active_vertices);
  r.edge_balance = hep::edge_balance(r.sizes);
  r.vertex_balance = hep::vertex_balance(r.cover_counts);
}

}  // namespace detail

// Runs the selected pipeline over a rewindable edge source: one degree pass,
// then (for the CSR modes) one build pass plus expansion and streaming. The
// spill store receives the high-to-high edges between the passes; reference-ne
// ignores it and keeps the whole graph in memory instead.
template <class Vid>
RunResult<Vid> run_partition(EdgeSource<Vid> &input, SpillStore<Vid> &spill,
                             AssignmentSink<Vid> &sink, const RunConfig &cfg_in) {
  RunConfig cfg = cfg_in;
  if (cfg.k == 0) throw ConfigError("k must be at least 1");
  if (!(cfg.alpha >= 1.0)) throw ConfigError("alpha must be at least 1");
  if (sink.k() != cfg.k) throw ConfigError("assignment sink was sized for a different k");
  if (cfg.mode == Mode::reference_ne) {
    cfg.tau_auto = false;
    cfg.tau_infinite = true;
  }

  RunResult<Vid> r;
  Timer t_total;
  Timer t;

  DegreeStats<Vid> stats = compute_degrees(input);
  r.t_degrees = t.seconds();
  r.num_vertices = stats.num_vertices;
  r.num_active_vertices = stats.num_active_vertices;
  r.num_edges = stats.num_edges;
  r.num_self_loops = stats.num_self_loops;
  r.mean_degree = stats.mean_degree;
  r.max_degree = stats.max_degree();

  double tau;
  if (cfg.tau_auto) {
    r.plan = plan_tau(stats, cfg.memory_budget, cfg.k, sizeof(Vid));
    if (!r.plan.feasible)
      throw PlanInfeasibleError(
          "memory budget of " + std::to_string(cfg.memory_budget) +
              " bytes cannot hold the fixed per-vertex state (needs at least " +
              std::to_string(r.plan.bytes) + " bytes)",
          r.plan);
    tau = r.plan.tau;
  } else if (cfg.tau_infinite) {
    tau = std::numeric_limits<double>::infinity();
  } else {
    tau = cfg.tau;
  }
  r.config = cfg;
  r.tau_effective = tau;

  HighDegreeSet<Vid> highs = classify_vertices(stats, tau);
  r.high_count = highs.count;
  r.threshold_degree = highs.threshold_degree;
  r.estimated_column_entries = stats.volume_at_most(low_degree_cutoff(stats, tau));
  r.estimated_bytes = estimate_memory_from_volume(r.estimated_column_entries,
                                                  stats.num_vertices, cfg.k, sizeof(Vid));

  if (cfg.mode == Mode::reference_ne) {
    std::vector<Edge<Vid>> edges;
    edges.reserve(stats.num_edges + stats.num_self_loops);
    input.rewind();
    Edge<Vid> e;
    while (input.next(e)) edges.push_back(e);
    t.reset();
    PartitionState<Vid> st = reference_ne(edges, cfg.k, sink);
    r.t_expand = t.seconds();
    r.capacity = st.capacity;
    detail::finish_quality(r, st.cover, st.sizes, sink);
    r.t_total = t_total.seconds();
    return r;
  }

  t.reset();
  CsrBuildResult<Vid> built = build_pruned_csr(input, stats, highs, spill);
  r.t_build = t.seconds();
  r.column_entries = built.csr.column.size();
  r.spilled_edges = built.spilled_edges;
  r.measured_column_bytes = built.csr.column_bytes();
  r.measured_index_bytes = built.csr.index_bytes();
  r.measured_size_field_bytes = built.csr.size_field_bytes();

  t.reset();
  NeppPartitioner<Vid> partitioner(built.csr, highs, cfg.k, sink, cfg.instrument);
  PartitionState<Vid> st = partitioner.run();
  r.nepp = partitioner.report();
  r.capacity = st.capacity;
  r.t_expand = t.seconds();

  r.measured_bitset_bytes = st.core.allocated_bytes();
  for (const auto &b : st.members) r.measured_bitset_bytes += b.allocated_bytes();
  for (const auto &b : st.cover) r.measured_bitset_bytes += b.allocated_bytes();

  t.reset();
  StreamingState<Vid> sstate = make_streaming_state(std::move(st), stats.num_edges, cfg.alpha);
  sstate.lambda = cfg.lambda;
  std::unique_ptr<EdgeSource<Vid>> spill_src = spill.open();
  DegreeLookup<Vid> lookup{&built.csr, &highs};
  switch (cfg.mode) {
    case Mode::hep:
      stream_partition(*spill_src, sstate, lookup, sink);
      break;
    case Mode::random_stream:
      random_assign(*spill_src, sstate, cfg.seed, sink);
      break;
    case Mode::degree_hash:
      degree_hash_assign(*spill_src, sstate, lookup, sink);
      break;
    case Mode::reference_ne:
      break;  // handled above
  }
  r.t_stream = t.seconds();
  r.streamed_edges = spill.count();
  r.fallback_count = sstate.fallback_count;

  detail::finish_quality(r, sstate.cover, sstate.sizes, sink);
  r.t_total = t_total.seconds();
  return r;
}

// Convenience wrapper over in-memory edges; used by tests and the language
// bindings. Returns the records alongside the run result.
template <class Vid>
std::pair<RunResult<Vid>, std::vector<AssignmentRecord<Vid>>> run_partition_edges(
    const std::vector<Edge<Vid>> &edges, const RunConfig &cfg) {
  VectorEdgeSource<Vid> src(edges);
  VectorSpillStore<Vid> spill;
  VectorAssignmentSink<Vid> sink(cfg.k);
  RunResult<Vid> r = run_partition<Vid>(src, spill, sink, cfg);
  return {std::move(r), sink.records()};
}

}  // namespace hep
