#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "hep/assignment.hpp"
#include "hep/common.hpp"
#include "hep/dense_bitset.hpp"
#include "hep/degree_stats.hpp"
#include "hep/edge_io.hpp"
#include "hep/nepp.hpp"
#include "hep/pruned_csr.hpp"

namespace hep {

// Full (undirected) degree of any vertex after the in-memory phase: region
// width in the pruned CSR for low-degree vertices — edge removal shrinks size
// fields, never regions — and the classification side table for high-degree
// ones, whose adjacency was never materialized.
template <class Vid>
struct DegreeLookup {
  const PrunedCSR<Vid> *csr = nullptr;
  const HighDegreeSet<Vid> *highs = nullptr;
  std::uint64_t operator()(Vid v) const {
    return highs->is_high(v) ? highs->degree_of(v) : csr->initial_degree(v);
  }
};

// Streaming continues where expansion stopped: the cover bitsets and
// partition sizes carry over, which is what makes the stream placement
// informed rather than cold-started.
template <class Vid>
struct StreamingState {
  std::vector<dense_bitset> cover;
  std::vector<std::uint64_t> sizes;
  std::uint32_t k = 0;
  std::uint64_t total_edges = 0;  // whole graph, self-loops excluded
  double alpha = 1.05;
  double lambda = 1.1;
  double epsilon = 1.0;
  std::uint64_t fallback_count = 0;

  // Per-partition cap during streaming; sizes must stay strictly below it
  // when any eligible partition exists.
  double max_load() const {
    return alpha * static_cast<double>(total_edges) / static_cast<double>(k);
  }
};

template <class Vid>
StreamingState<Vid> make_streaming_state(PartitionState<Vid> &&ps,
                                         std::uint64_t total_edges, double alpha) {
  StreamingState<Vid> st;
  st.cover = std::move(ps.cover);
  st.sizes = std::move(ps.sizes);
  st.k = ps.k;
  st.total_edges = total_edges;
  st.alpha = alpha;
  return st;
}

// Degree-weighted greedy score of placing edge (u,v) on partition i.
// The replication term rewards partitions already covering an endpoint,
// preferring to replicate the endpoint of lower degree (theta is u's share of
// the combined degree, so 1 + (1 - theta) grows as u's degree shrinks); the
// balance term nudges the choice toward lighter partitions.
inline double hdrf_score(std::uint64_t du, std::uint64_t dv, bool u_covered,
                         bool v_covered, std::uint64_t size_i, std::uint64_t max_size,
                         std::uint64_t min_size, double lambda, double epsilon) {
  double theta_u =
      static_cast<double>(du) / (static_cast<double>(du) + static_cast<double>(dv));
  double rep = 0.0;
  if (u_covered) rep += 1.0 + (1.0 - theta_u);
  if (v_covered) rep += 1.0 + theta_u;  // 1 + (1 - theta_v), theta_v = 1 - theta_u
  double bal = lambda * static_cast<double>(max_size - size_i) /
               (epsilon + static_cast<double>(max_size - min_size));
  return rep + bal;
}

namespace detail {

template <class Vid>
void apply_stream_choice(StreamingState<Vid> &st, const Edge<Vid> &e, part_t p,
                         AssignmentSink<Vid> &sink) {
  st.cover[p].set(e.src);
  st.cover[p].set(e.dst);
  ++st.sizes[p];
  sink.append(e.src, e.dst, p);
}

// Lowest-index least-loaded partition: the escape hatch when the balance
// filter rejects everything.
template <class Vid>
part_t least_loaded(const StreamingState<Vid> &st) {
  part_t best = 0;
  for (part_t i = 1; i < st.k; ++i)
    if (st.sizes[i] < st.sizes[best]) best = i;
  return best;
}

}  // namespace detail

// Informed stateful streaming of the spilled high-to-high edges. For each
// edge, scores every partition below the balance cap and takes the best;
// ties break to the lowest index. Falls back to the least-loaded partition —
// counted, never silent — if the cap excludes all k.
template <class Vid>
void stream_partition(EdgeSource<Vid> &spill, StreamingState<Vid> &st,
                      const DegreeLookup<Vid> &degree_of, AssignmentSink<Vid> &sink) {
  spill.rewind();
  const double bound = st.max_load();
  Edge<Vid> e;
  while (spill.next(e)) {
    std::uint64_t du = degree_of(e.src), dv = degree_of(e.dst);
    std::uint64_t max_size = *std::max_element(st.sizes.begin(), st.sizes.end());
    std::uint64_t min_size = *std::min_element(st.sizes.begin(), st.sizes.end());
    bool u_cov, v_cov;
    double best = -std::numeric_limits<double>::infinity();
    part_t best_p = st.k;
    for (part_t i = 0; i < st.k; ++i) {
      if (static_cast<double>(st.sizes[i]) >= bound) continue;
      u_cov = st.cover[i].get(e.src);
      v_cov = st.cover[i].get(e.dst);
      double s = hdrf_score(du, dv, u_cov, v_cov, st.sizes[i], max_size, min_size,
                            st.lambda, st.epsilon);
      if (s > best) {
        best = s;
        best_p = i;
      }
    }
    if (best_p == st.k) {
      best_p = detail::least_loaded(st);
      ++st.fallback_count;
    }
    detail::apply_stream_choice(st, e, best_p, sink);
  }
}

// Uninformed baseline: uniform choice from a seeded generator. Uses raw
// mt19937_64 output mod k so the stream is identical on every platform.
template <class Vid>
void random_assign(EdgeSource<Vid> &spill, StreamingState<Vid> &st, std::uint64_t seed,
                   AssignmentSink<Vid> &sink) {
  spill.rewind();
  std::mt19937_64 rng(seed);
  Edge<Vid> e;
  while (spill.next(e))
    detail::apply_stream_choice(st, e, static_cast<part_t>(rng() % st.k), sink);
}

// Degree-hashing baseline: hash the id of the endpoint with the smaller full
// degree (ties to the smaller id), so all edges of a dominant hub's
// low-degree partners co-locate.
template <class Vid>
void degree_hash_assign(EdgeSource<Vid> &spill, StreamingState<Vid> &st,
                        const DegreeLookup<Vid> &degree_of, AssignmentSink<Vid> &sink) {
  spill.rewind();
  Edge<Vid> e;
  while (spill.next(e)) {
    std::uint64_t du = degree_of(e.src), dv = degree_of(e.dst);
    Vid pick = du != dv ? (du < dv ? e.src : e.dst) : std::min(e.src, e.dst);
    detail::apply_stream_choice(st, e, static_cast<part_t>(mix64(pick) % st.k), sink);
  }
}

}  // namespace hep
