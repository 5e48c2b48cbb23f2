#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "hep/common.hpp"
#include "hep/dense_bitset.hpp"
#include "hep/edge_io.hpp"

namespace hep {

// Result of the first ingestion pass. Degrees are undirected (each edge
// contributes to both endpoints); self-loops are skipped and tallied.
// out_degrees additionally counts edges by their left-hand endpoint — the CSR
// builder needs it to place out-sublists ahead of in-sublists in one pass.
template <class Vid>
struct DegreeStats {
  std::vector<Vid> degrees;
  std::vector<Vid> out_degrees;
  std::uint64_t num_vertices = 0;  // id-space size: max id + 1
  std::uint64_t num_active_vertices = 0;  // degree >= 1
  std::uint64_t num_edges = 0;            // self-loops excluded
  std::uint64_t num_self_loops = 0;
  double mean_degree = 0.0;  // 2 * num_edges / num_active_vertices

  // Distinct degrees >= 1 in ascending order with vertex counts, plus the
  // running adjacency volume:
  // cum_volume[i] = sum of d(v) over vertices with 1 <= d(v) <= histogram[i].
  std::vector<std::pair<Vid, std::uint64_t>> histogram;
  std::vector<std::uint64_t> cum_volume;

  Vid max_degree() const { return histogram.empty() ? 0 : histogram.back().first; }

  // Total adjacency volume of vertices with degree <= cutoff: the number of
  // column-array entries a split at this cutoff keeps in memory.
  std::uint64_t volume_at_most(std::uint64_t cutoff) const {
    if (histogram.empty() || cutoff < histogram.front().first) return 0;
    auto it = std::upper_bound(
        histogram.begin(), histogram.end(), cutoff,
        [](std::uint64_t c, const auto &h) { return c < std::uint64_t(h.first); });
    return cum_volume[static_cast<std::size_t>(it - histogram.begin()) - 1];
  }
};

template <class Vid>
DegreeStats<Vid> compute_degrees(EdgeSource<Vid> &src) {
  DegreeStats<Vid> st;
  src.rewind();
  Edge<Vid> e;
  auto ensure = [](std::vector<Vid> &vec, Vid v) {
    if (v >= vec.size()) vec.resize(static_cast<std::size_t>(v) + 1, 0);
  };
  while (src.next(e)) {
    if (e.src == e.dst) {
      ++st.num_self_loops;
      // Still widens the id space: the loop names a vertex even if skipped.
      ensure(st.degrees, e.src);
      continue;
    }
    ensure(st.degrees, std::max(e.src, e.dst));
    ++st.degrees[e.src];
    ++st.degrees[e.dst];
    ensure(st.out_degrees, e.src);
    ++st.out_degrees[e.src];
    ++st.num_edges;
  }
  st.num_vertices = st.degrees.size();
  st.out_degrees.resize(st.degrees.size(), 0);

  for (Vid d : st.degrees)
    if (d > 0) ++st.num_active_vertices;
  st.mean_degree = st.num_active_vertices
                       ? 2.0 * static_cast<double>(st.num_edges) /
                             static_cast<double>(st.num_active_vertices)
                       : 0.0;

  // Histogram over degrees >= 1.
  std::vector<Vid> sorted;
  sorted.reserve(st.num_active_vertices);
  for (Vid d : st.degrees)
    if (d > 0) sorted.push_back(d);
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t volume = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    volume += static_cast<std::uint64_t>(sorted[i]) * (j - i);
    st.histogram.emplace_back(sorted[i], j - i);
    st.cum_volume.push_back(volume);
    i = j;
  }
  return st;
}

// A vertex is high-degree iff d(v) > tau * mean_degree (strict).
// +infinity disables the split entirely.
template <class Vid>
struct HighDegreeSet {
  double tau = std::numeric_limits<double>::infinity();
  dense_bitset membership;
  std::uint64_t count = 0;
  Vid threshold_degree = 0;  // smallest degree classified high; 0 = none
  // Exact degrees of members, sorted by id: the streaming phase's only source
  // of high-degree degree information once the full degree array is gone.
  std::vector<std::pair<Vid, Vid>> side_degrees;

  bool is_high(Vid v) const { return membership.get(v); }

  Vid degree_of(Vid v) const {
    auto it = std::lower_bound(side_degrees.begin(), side_degrees.end(), v,
                               [](const auto &p, Vid x) { return p.first < x; });
    if (it == side_degrees.end() || it->first != v)
      throw InternalError("degree lookup for non-member of the high-degree set");
    return it->second;
  }
};

// Largest degree still classified low under tau, as an integer cutoff.
// Uses the same double product as the per-vertex comparison so the two can
// never disagree on boundary degrees.
template <class Vid>
std::uint64_t low_degree_cutoff(const DegreeStats<Vid> &st, double tau) {
  if (std::isinf(tau)) return st.max_degree();
  double thr = tau * st.mean_degree;
  if (thr < 0) return 0;
  if (thr >= static_cast<double>(st.max_degree())) return st.max_degree();
  return static_cast<std::uint64_t>(std::floor(thr));
}

template <class Vid>
HighDegreeSet<Vid> classify_vertices(const DegreeStats<Vid> &st, double tau) {
  if (!(tau > 0)) throw ConfigError("tau must be positive");
  HighDegreeSet<Vid> hs;
  hs.tau = tau;
  hs.membership.resize(st.num_vertices);
  if (std::isinf(tau)) return hs;
  double thr = tau * st.mean_degree;
  Vid min_high = 0;
  for (std::uint64_t v = 0; v < st.num_vertices; ++v) {
    Vid d = st.degrees[v];
    if (static_cast<double>(d) > thr) {
      hs.membership.set(v);
      ++hs.count;
      hs.side_degrees.emplace_back(static_cast<Vid>(v), d);
      if (min_high == 0 || d < min_high) min_high = d;
    }
  }
  hs.threshold_degree = min_high;
  return hs;
}

// Partitioning-time footprint in bytes for a split at tau:
//   column entries * id_bytes          (pruned adjacency column)
// + 6 * |V| * id_bytes                 (2 index arrays, 2 size arrays,
//                                       heap + position table)
// + ceil(|V| * (k+1) / 8)              (k cover bitsets + core bitset)
inline std::uint64_t estimate_memory_from_volume(std::uint64_t column_entries,
                                                 std::uint64_t num_vertices,
                                                 std::uint32_t k, std::uint32_t id_bytes) {
  return column_entries * id_bytes + 6 * num_vertices * id_bytes +
         ceil_div(num_vertices * (std::uint64_t(k) + 1), 8);
}

template <class Vid>
std::uint64_t estimate_memory(const DegreeStats<Vid> &st, double tau, std::uint32_t k,
                              std::uint32_t id_bytes) {
  return estimate_memory_from_volume(st.volume_at_most(low_degree_cutoff(st, tau)),
                                     st.num_vertices, k, id_bytes);
}

struct TauPlanRow {
  std::uint64_t cutoff;  // low-degree cutoff this row evaluates
  double tau;            // representative tau realizing the cutoff
  std::uint64_t column_entries;
  std::uint64_t bytes;
  bool feasible;
};

struct TauPlan {
  bool feasible = false;
  double tau = 0.0;
  std::uint64_t cutoff = 0;
  std::uint64_t bytes = 0;  // estimate at the chosen cutoff
  std::vector<TauPlanRow> table;
};

// Scans one candidate cutoff per distinct degree (plus the empty-column
// cutoff 0) and picks the largest whose estimate fits the budget. Any tau
// strictly between two adjacent distinct degrees realizes the same split, so
// the returned representative sits half a degree above the chosen cutoff —
// comfortably inside its interval. A fit at the maximum degree means no
// pruning is needed at all and reports tau = +infinity; a budget below the
// fixed |V|-proportional cost is infeasible.
template <class Vid>
TauPlan plan_tau(const DegreeStats<Vid> &st, std::uint64_t budget_bytes, std::uint32_t k,
                 std::uint32_t id_bytes) {
  if (budget_bytes == 0) throw ConfigError("memory budget must be positive");
  TauPlan plan;
  double mean = st.mean_degree;
  auto evaluate = [&](std::uint64_t cutoff) {
    TauPlanRow row;
    row.cutoff = cutoff;
    row.tau = mean > 0 ? (static_cast<double>(cutoff) + 0.5) / mean : 0.0;
    row.column_entries = st.volume_at_most(cutoff);
    row.bytes = estimate_memory_from_volume(row.column_entries, st.num_vertices, k, id_bytes);
    row.feasible = row.bytes <= budget_bytes;
    return row;
  };

  plan.table.push_back(evaluate(0));
  for (const auto &h : st.histogram) plan.table.push_back(evaluate(h.first));

  if (!plan.table.front().feasible) {
    // Even an empty column (every vertex treated high) does not fit.
    plan.feasible = false;
    plan.bytes = plan.table.front().bytes;
    return plan;
  }
  const TauPlanRow *best = &plan.table.front();
  for (const auto &row : plan.table)
    if (row.feasible) best = &row;
  plan.feasible = true;
  plan.cutoff = best->cutoff;
  plan.bytes = best->bytes;
  plan.tau = best->cutoff >= st.max_degree() ? std::numeric_limits<double>::infinity()
                                             : best->tau;
  return plan;
}

}  // namespace hep
