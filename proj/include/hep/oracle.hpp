#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <random>
#include <unordered_map>
#include <vector>

#include "hep/assignment.hpp"
#include "hep/common.hpp"
#include "hep/dense_bitset.hpp"
#include "hep/min_heap.hpp"
#include "hep/nepp.hpp"

namespace hep {

// ---------------------------------------------------------------------------
// Plain adjacency-list twin of the in-memory expansion, used to cross-check
// the pruned-CSR implementation record for record when no degree split is in
// play. Same heap discipline, same seeding, same spill cascade, same swap
// order during clean-up — but edges live in separate per-vertex slot vectors
// with an explicit per-edge validity bitset instead of sublists of a shared
// column with lazily inferred liveness. Matching output bytes therefore
// confirm that "entry points into the interior" and "edge already assigned"
// coincide wherever the main implementation relies on it.

template <class Vid>
class ReferenceNe {
 public:
  ReferenceNe(const std::vector<Edge<Vid>> &edges, std::uint32_t k,
              AssignmentSink<Vid> &sink)
      : k_(k), sink_(sink) {
    if (k_ == 0) throw ConfigError("k must be at least 1");
    std::uint64_t n = 0;
    std::uint64_t m = 0;
    for (const auto &e : edges) {
      n = std::max<std::uint64_t>(n, std::max<std::uint64_t>(e.src, e.dst) + 1);
      if (e.src != e.dst) ++m;
    }
    out_.assign(n, {});
    in_.assign(n, {});
    valid_.resize(m);
    std::uint64_t eid = 0;
    for (const auto &e : edges) {
      if (e.src == e.dst) continue;
      out_[e.src].push_back({e.dst, eid});
      in_[e.dst].push_back({e.src, eid});
      valid_.set(eid);
      ++eid;
    }
    num_vertices_ = n;
    num_edges_ = m;
  }

  PartitionState<Vid> run() {
    st_.core.resize(num_vertices_);
    st_.members.assign(k_, dense_bitset(num_vertices_));
    st_.cover.assign(k_, dense_bitset(num_vertices_));
    st_.sizes.assign(k_, 0);
    st_.capacity = ceil_div(num_edges_, k_);
    st_.k = k_;
    heap_.reset(num_vertices_);

    for (st_.current = 0; st_.current + 1 < k_; ++st_.current) {
      reconcile_spills();
      expand_partition();
      clean_up(st_.current);
      heap_.clear();
      if (exhausted_) break;
    }
    st_.current = k_ - 1;
    assign_remaining();
    return std::move(st_);
  }

 private:
  struct Slot {
    Vid other;
    std::uint64_t eid;
  };

  bool interior(Vid u) const {
    return st_.core.get(u) || st_.members[st_.current].get(u);
  }

  // Twin of the partitioner's pre-expansion safety net (a provable no-op
  // under the first-partition-with-room spill rule; see its definition
  // there). Mirrored so the two stay step-identical even if the spill
  // policy ever changes. No high-vertex clause: this twin keeps every
  // vertex in memory, so the split set is empty by construction.
  void reconcile_spills() {
    st_.members[st_.current].for_each_set([&](std::uint64_t vi) {
      Vid v = static_cast<Vid>(vi);
      if (st_.core.get(v)) return;
      auto settles = [&](Vid u) { return st_.members[st_.current].get(u) && v < u; };
      for (const Slot &s : out_[v])
        if (settles(s.other)) settle_edge(v, s, /*v_is_src=*/true);
      for (const Slot &s : in_[v])
        if (settles(s.other)) settle_edge(v, s, /*v_is_src=*/false);
    });
  }

  void expand_partition() {
    while (st_.sizes[st_.current] < st_.capacity) {
      if (heap_.empty()) {
        if (!initialize()) {
          exhausted_ = true;
          return;
        }
      } else {
        move_to_core(heap_.pop_min().second);
      }
    }
  }

  bool initialize() {
    while (st_.init_cursor < num_vertices_) {
      Vid v = static_cast<Vid>(st_.init_cursor);
      ++st_.init_cursor;
      if (st_.core.get(v)) continue;
      if (out_[v].size() + in_[v].size() == 0) {
        st_.core.set(v);
        continue;
      }
      move_to_core(v);
      return true;
    }
    return false;
  }

  void move_to_core(Vid v) {
    if (!st_.members[st_.current].get(v)) secondary_scan(v);
    st_.core.set(v);
    for (const Slot &s : out_[v])
      if (!interior(s.other)) move_to_secondary(s.other);
    for (const Slot &s : in_[v])
      if (!interior(s.other)) move_to_secondary(s.other);
  }

  void move_to_secondary(Vid v) { heap_.insert(v, secondary_scan(v)); }

  Vid secondary_scan(Vid v) {
    st_.members[st_.current].set(v);
    Vid dext = static_cast<Vid>(out_[v].size() + in_[v].size());
    for (const Slot &s : out_[v])
      if (interior(s.other)) {
        --dext;
        settle_edge(v, s, /*v_is_src=*/true);
      }
    for (const Slot &s : in_[v])
      if (interior(s.other)) {
        --dext;
        settle_edge(v, s, /*v_is_src=*/false);
      }
    return dext;
  }

  void settle_edge(Vid v, const Slot &s, bool v_is_src) {
    Vid u = s.other;
    if (heap_.contains(u)) heap_.decrease_key(u);
    part_t p = st_.current;
    if (st_.sizes[p] >= st_.capacity) {
      do {
        ++p;
      } while (p + 1 < k_ && st_.sizes[p] >= st_.capacity);
      st_.members[p].set(v);
      st_.members[p].set(u);
    }
    st_.cover[p].set(v);
    st_.cover[p].set(u);
    ++st_.sizes[p];
    valid_.clear(s.eid);
    if (v_is_src)
      sink_.append(v, u, p);
    else
      sink_.append(u, v, p);
  }

  // Compaction by validity flag, against the main implementation's compaction
  // by interior test: the swap-with-last discipline is identical, so the two
  // leave survivors in the same physical order iff the removed sets agree.
  void clean_up(std::uint32_t i) {
    st_.members[i].for_each_set([&](std::uint64_t vi) {
      Vid v = static_cast<Vid>(vi);
      if (st_.core.get(v)) return;
      compact(out_[v]);
      compact(in_[v]);
    });
  }

  void compact(std::vector<Slot> &slots) {
    for (std::size_t j = 0; j < slots.size();) {
      if (!valid_.get(slots[j].eid)) {
        slots[j] = slots.back();
        slots.pop_back();
      } else {
        ++j;
      }
    }
  }

  void assign_remaining() {
    const part_t last = k_ - 1;
    for (std::uint64_t vi = 0; vi < num_vertices_; ++vi) {
      Vid v = static_cast<Vid>(vi);
      if (st_.core.get(v)) continue;
      for (const Slot &s : out_[v]) {
        st_.cover[last].set(v);
        st_.cover[last].set(s.other);
        ++st_.sizes[last];
        sink_.append(v, s.other, last);
      }
    }
    if (st_.sizes[last] > st_.capacity)
      throw InternalError("final partition exceeded its capacity share");
  }

  std::uint32_t k_;
  AssignmentSink<Vid> &sink_;
  std::vector<std::vector<Slot>> out_, in_;
  dense_bitset valid_;
  std::uint64_t num_vertices_ = 0;
  std::uint64_t num_edges_ = 0;
  PartitionState<Vid> st_;
  min_heap<Vid> heap_;
  bool exhausted_ = false;
};

template <class Vid>
PartitionState<Vid> reference_ne(const std::vector<Edge<Vid>> &edges, std::uint32_t k,
                                 AssignmentSink<Vid> &sink) {
  return ReferenceNe<Vid>(edges, k, sink).run();
}

// ---------------------------------------------------------------------------
// Exhaustive optimum for tiny instances: the minimum replication factor over
// every assignment of edges to partitions that respects a per-partition edge
// capacity. Partitions are interchangeable, so the search only opens a new
// partition when all previously used ones have been tried (first-touch
// canonicalization), and it prunes on the monotone replica total.

template <class Vid>
double brute_force_optimal_rf(const std::vector<Edge<Vid>> &edges_in, std::uint32_t k,
                              std::uint64_t capacity = 0) {
  std::vector<std::pair<int, int>> edges;
  std::unordered_map<Vid, int> ids;
  for (const auto &e : edges_in) {
    if (e.src == e.dst) continue;
    int a = static_cast<int>(ids.emplace(e.src, ids.size()).first->second);
    int b = static_cast<int>(ids.emplace(e.dst, ids.size()).first->second);
    edges.emplace_back(a, b);
  }
  if (edges.size() > 16)
    throw ConfigError("exhaustive search is limited to 16 edges");
  if (k == 0 || k > 4)
    throw ConfigError("exhaustive search is limited to 1 <= k <= 4");
  if (edges.empty()) return 0.0;
  if (capacity == 0) capacity = ceil_div(edges.size(), k);

  const std::uint64_t nv = ids.size();  // every id touches an edge: all active
  std::vector<std::uint64_t> cover(k, 0);
  std::vector<std::uint64_t> sizes(k, 0);
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();

  auto total_replicas = [&] {
    std::uint64_t t = 0;
    for (std::uint64_t c : cover) t += static_cast<std::uint64_t>(std::popcount(c));
    return t;
  };

  auto recurse = [&](auto &&self, std::size_t i, std::uint32_t used) -> void {
    std::uint64_t t = total_replicas();
    if (t >= best) return;
    if (i == edges.size()) {
      best = t;
      return;
    }
    std::uint64_t mask = (1ULL << edges[i].first) | (1ULL << edges[i].second);
    std::uint32_t reach = std::min(used + 1, k);
    for (std::uint32_t p = 0; p < reach; ++p) {
      if (sizes[p] >= capacity) continue;
      std::uint64_t saved = cover[p];
      cover[p] |= mask;
      ++sizes[p];
      self(self, i + 1, std::max(used, p + 1));
      --sizes[p];
      cover[p] = saved;
    }
  };
  recurse(recurse, 0, 0);
  return static_cast<double>(best) / static_cast<double>(nv);
}

// ---------------------------------------------------------------------------
// Deterministic graph generators for tests and the gen subcommand. All of
// them avoid self-loops; the random ones may produce duplicate edges, which
// downstream code treats as distinct parallel edges.

template <class Vid>
std::vector<Edge<Vid>> gen_path(std::uint64_t n) {
  std::vector<Edge<Vid>> edges;
  for (std::uint64_t i = 0; i + 1 < n; ++i)
    edges.push_back({static_cast<Vid>(i), static_cast<Vid>(i + 1)});
  return edges;
}

template <class Vid>
std::vector<Edge<Vid>> gen_star(std::uint64_t leaves) {
  std::vector<Edge<Vid>> edges;
  for (std::uint64_t i = 1; i <= leaves; ++i)
    edges.push_back({static_cast<Vid>(0), static_cast<Vid>(i)});
  return edges;
}

template <class Vid>
std::vector<Edge<Vid>> gen_clique(std::uint64_t n) {
  std::vector<Edge<Vid>> edges;
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t j = i + 1; j < n; ++j)
      edges.push_back({static_cast<Vid>(i), static_cast<Vid>(j)});
  return edges;
}

// side x side lattice in row-major order, each cell linking right then down.
template <class Vid>
std::vector<Edge<Vid>> gen_grid(std::uint64_t side) {
  std::vector<Edge<Vid>> edges;
  for (std::uint64_t r = 0; r < side; ++r)
    for (std::uint64_t c = 0; c < side; ++c) {
      std::uint64_t id = r * side + c;
      if (c + 1 < side)
        edges.push_back({static_cast<Vid>(id), static_cast<Vid>(id + 1)});
      if (r + 1 < side)
        edges.push_back({static_cast<Vid>(id), static_cast<Vid>(id + side)});
    }
  return edges;
}

template <class Vid>
std::vector<Edge<Vid>> gen_random(std::uint64_t n, std::uint64_t m, std::uint64_t seed) {
  if (n < 2 && m > 0) throw ConfigError("need at least 2 vertices to avoid self-loops");
  std::mt19937_64 rng(seed);
  std::vector<Edge<Vid>> edges;
  edges.reserve(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    Vid u = static_cast<Vid>(rng() % n);
    Vid v = static_cast<Vid>(rng() % (n - 1));
    if (v >= u) ++v;
    edges.push_back({u, v});
  }
  return edges;
}

// Preferential attachment over the running endpoint multiset: each endpoint
// is, with the given probability, a uniform draw from all endpoints emitted
// so far (rich get richer), otherwise a uniform fresh vertex. Skew rises
// with the preference parameter.
template <class Vid>
std::vector<Edge<Vid>> gen_power_law(std::uint64_t n, std::uint64_t m, std::uint64_t seed,
                                     double preference = 0.75) {
  if (n < 2 && m > 0) throw ConfigError("need at least 2 vertices to avoid self-loops");
  std::mt19937_64 rng(seed);
  const std::uint64_t threshold =
      static_cast<std::uint64_t>(preference * 4294967296.0);
  std::vector<Edge<Vid>> edges;
  edges.reserve(m);
  std::vector<Vid> endpoints;
  endpoints.reserve(2 * m);
  auto draw = [&]() -> Vid {
    if (!endpoints.empty() && (rng() >> 32) < threshold)
      return endpoints[rng() % endpoints.size()];
    return static_cast<Vid>(rng() % n);
  };
  for (std::uint64_t i = 0; i < m; ++i) {
    Vid u = draw();
    Vid v = draw();
    for (int tries = 0; v == u && tries < 32; ++tries) v = draw();
    if (v == u) {
      v = static_cast<Vid>(rng() % (n - 1));
      if (v >= u) ++v;
    }
    edges.push_back({u, v});
    endpoints.push_back(u);
    endpoints.push_back(v);
  }
  return edges;
}

}  // namespace hep
