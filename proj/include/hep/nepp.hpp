#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "hep/assignment.hpp"
#include "hep/common.hpp"
#include "hep/dense_bitset.hpp"
#include "hep/degree_stats.hpp"
#include "hep/min_heap.hpp"
#include "hep/pruned_csr.hpp"

namespace hep {

// Shared state of the in-memory expansion phase, handed onward to streaming.
//
// Two bitset families per partition: `members` is the algorithmic secondary
// set S_i (entry gate, interior test, clean-up scan set), while `cover`
// records which vertices are incident to an edge actually assigned to the
// partition. They differ under spill-over — a vertex can enter S_i yet have
// its whole expansion step land in a later partition — and replication
// accounting must follow assignments, not membership.
template <class Vid>
struct PartitionState {
  dense_bitset core;
  std::vector<dense_bitset> members;
  std::vector<dense_bitset> cover;
  std::vector<std::uint64_t> sizes;
  std::uint64_t capacity = 0;
  std::uint32_t k = 0;
  std::uint32_t current = 0;
  std::uint64_t init_cursor = 0;
};

struct NeppReport {
  std::uint64_t initial_column_entries = 0;
  std::uint64_t cleaned_entries = 0;
  std::uint64_t spill_over_edges = 0;   // expansion edges diverted past `current`
  std::uint64_t reconciled_edges = 0;   // safety-net settles; zero by design
  std::uint64_t remaining_assigned = 0; // edges assigned by the final sweep
  bool exhausted_early = false;
  // Populated only when instrumentation is on; all must stay zero.
  std::uint64_t core_reread_violations = 0;
  std::uint64_t dext_recount_mismatches = 0;
  std::uint64_t cleanup_residue = 0;

  double cleaned_fraction() const {
    return initial_column_entries
               ? static_cast<double>(cleaned_entries) /
                     static_cast<double>(initial_column_entries)
               : 0.0;
  }
};

// Neighborhood expansion over the pruned CSR.
//
// Expansion grows partitions 0..k-2 to exactly ceil(|E_inmem| / k) edges each
// (short only if the graph runs out), spilling over-capacity steps to the
// next partition with room. High-degree vertices are a-priori secondary
// members of every partition: expansion never walks through them, and their
// edges are assigned from the low-degree side the moment it enters the
// secondary set. After each partition a clean-up pass drops assigned entries
// from the adjacency lists of its non-core secondary vertices (swap with the
// last valid entry, decrement the size field); core vertices' lists are left
// stale on purpose — they are provably never read again, and the
// instrumentation hooks exist to check exactly that.
template <class Vid>
class NeppPartitioner {
 public:
  NeppPartitioner(PrunedCSR<Vid> &g, const HighDegreeSet<Vid> &highs, std::uint32_t k,
                  AssignmentSink<Vid> &sink, bool instrument = false)
      : g_(g), highs_(highs), k_(k), sink_(sink), instrument_(instrument) {
    if (k_ == 0) throw ConfigError("k must be at least 1");
  }

  PartitionState<Vid> run() {
    const std::uint64_t n = g_.num_vertices;
    st_.core.resize(n);
    st_.members.assign(k_, dense_bitset(n));
    st_.cover.assign(k_, dense_bitset(n));
    st_.sizes.assign(k_, 0);
    st_.capacity = ceil_div(g_.num_inmem_edges, k_);
    st_.k = k_;
    heap_.reset(n);
    report_.initial_column_entries = g_.column.size();
    if (instrument_) core_partition_.assign(n, kNoPartition);

    for (st_.current = 0; st_.current + 1 < k_; ++st_.current) {
      reconcile_spills();
      expand_partition();
      if (instrument_) verify_heap_keys();
      clean_up(st_.current);
      heap_.clear();
      if (exhausted_) break;
    }
    st_.current = k_ - 1;
    assign_remaining();
    return std::move(st_);
  }

  const NeppReport &report() const { return report_; }

 private:
  static constexpr std::uint32_t kNoPartition = std::numeric_limits<std::uint32_t>::max();

  bool interior(Vid u) const {
    return highs_.is_high(u) || st_.core.get(u) || st_.members[st_.current].get(u);
  }

  // When a partition becomes current, its secondary set holds exactly the
  // vertices spilled in by earlier partitions. These skip their entry scan on
  // purpose, which is safe only if every edge among them (or from them to a
  // high-degree vertex, which never scans at all) is already assigned. Under
  // the first-later-partition-with-room spill rule that is a theorem: marks
  // landing in the same set from two different source partitions would need
  // a partition that was full during the earlier source to expand later, and
  // full partitions never expand — so co-members were co-interior somewhere
  // before and any shared edge got settled there. This pass makes clean-up's
  // exactly-once property local instead of resting on that global argument:
  // it settles whatever such edges exist (each once — member pairs from the
  // lower id, high neighbors from the low side, at no replication cost since
  // both sides are already interior) and counts them. Under the current spill
  // rule the count provably stays zero, and the tests pin exactly that.
  void reconcile_spills() {
    st_.members[st_.current].for_each_set([&](std::uint64_t vi) {
      Vid v = static_cast<Vid>(vi);
      if (st_.core.get(v) || highs_.is_high(v)) return;
      auto settles = [&](Vid u) {
        return highs_.is_high(u) || (st_.members[st_.current].get(u) && v < u);
      };
      for (Vid u : g_.out_entries(v))
        if (settles(u)) {
          settle_edge(v, u, /*v_is_src=*/true);
          ++report_.reconciled_edges;
        }
      for (Vid u : g_.in_entries(v))
        if (settles(u)) {
          settle_edge(v, u, /*v_is_src=*/false);
          ++report_.reconciled_edges;
        }
    });
  }

  void expand_partition() {
    while (st_.sizes[st_.current] < st_.capacity) {
      if (heap_.empty()) {
        if (!initialize()) {
          exhausted_ = true;
          report_.exhausted_early = true;
          return;
        }
      } else {
        move_to_core(heap_.pop_min().second);
      }
    }
  }

  // Sequential seeding: the cursor only ever moves forward. A vertex skipped
  // for having no valid entries joins the core so no later scan revisits it;
  // one skipped for being high-degree or already core stays ineligible for
  // the rest of the run by definition.
  bool initialize() {
    const std::uint64_t n = g_.num_vertices;
    while (st_.init_cursor < n) {
      Vid v = static_cast<Vid>(st_.init_cursor);
      ++st_.init_cursor;
      if (highs_.is_high(v) || st_.core.get(v)) continue;
      if (g_.valid_entries(v) == 0) {
        st_.core.set(v);
        continue;
      }
      move_to_core(v);
      return true;
    }
    return false;
  }

  void move_to_core(Vid v) {
    // A seed never passed through move_to_secondary, so its edges into the
    // current interior are still unassigned: give it the same entry scan.
    // (Vertices spilled into S_current got theirs in an earlier partition.)
    if (!st_.members[st_.current].get(v)) secondary_scan(v);
    st_.core.set(v);
    if (instrument_) core_partition_[v] = st_.current;
    scan_guard(v);
    for (Vid u : g_.out_entries(v))
      if (!interior(u)) move_to_secondary(u);
    for (Vid u : g_.in_entries(v))
      if (!interior(u)) move_to_secondary(u);
  }

  void move_to_secondary(Vid v) {
    heap_.insert(v, secondary_scan(v));
  }

  // Adds v to S_current and assigns every edge from v into the current
  // interior (core, secondary, or high-degree — the latter never get a scan
  // of their own). Returns v's external degree: valid entries left pointing
  // outside. Interior neighbors still in the heap shed one key point each,
  // mirroring the drop in their external degree.
  Vid secondary_scan(Vid v) {
    st_.members[st_.current].set(v);
    scan_guard(v);
    Vid dext = g_.valid_entries(v);
    for (Vid u : g_.out_entries(v))
      if (interior(u)) {
        --dext;
        settle_edge(v, u, /*v_is_src=*/true);
      }
    for (Vid u : g_.in_entries(v))
      if (interior(u)) {
        --dext;
        settle_edge(v, u, /*v_is_src=*/false);
      }
    return dext;
  }

  // Assigns the edge between v (the side being scanned) and interior
  // neighbor u, preserving the input orientation. Over-capacity assignments
  // spill to the first later partition with room; the last partition is
  // uncapped and takes any remainder.
  void settle_edge(Vid v, Vid u, bool v_is_src) {
    if (heap_.contains(u)) heap_.decrease_key(u);
    part_t p = st_.current;
    if (st_.sizes[p] >= st_.capacity) {
      do {
        ++p;
      } while (p + 1 < k_ && st_.sizes[p] >= st_.capacity);
      st_.members[p].set(v);
      st_.members[p].set(u);
      ++report_.spill_over_edges;
    }
    st_.cover[p].set(v);
    st_.cover[p].set(u);
    ++st_.sizes[p];
    if (v_is_src)
      sink_.append(v, u, p);
    else
      sink_.append(u, v, p);
  }

  // Lazy removal, settled per partition: every entry of a non-core secondary
  // vertex whose edge was assigned (endpoint interior to C ∪ S_i, with
  // high-degree endpoints counting as interior) is compacted away.
  void clean_up(std::uint32_t i) {
    st_.members[i].for_each_set([&](std::uint64_t vi) {
      Vid v = static_cast<Vid>(vi);
      if (st_.core.get(v) || highs_.is_high(v)) return;
      for (Vid j = 0; j < g_.out_size[v];) {
        if (interior(g_.column[g_.index_out[v] + j])) {
          g_.remove_out_at(v, j);
          ++report_.cleaned_entries;
        } else {
          ++j;
        }
      }
      for (Vid j = 0; j < g_.in_size[v];) {
        if (interior(g_.column[g_.index_in[v] + j])) {
          g_.remove_in_at(v, j);
          ++report_.cleaned_entries;
        } else {
          ++j;
        }
      }
      if (instrument_) {
        for (Vid u : g_.out_entries(v))
          if (interior(u)) ++report_.cleanup_residue;
        for (Vid u : g_.in_entries(v))
          if (interior(u)) ++report_.cleanup_residue;
      }
    });
  }

  // Direction-tracked final sweep for the last partition: every surviving
  // edge between two low-degree vertices lives as an out-entry at its input
  // left endpoint (plus a mirror in-entry), so emitting all out-entries of
  // non-core vertices covers each exactly once; edges to high-degree
  // neighbors only exist on the low side and are emitted from both sublists.
  void assign_remaining() {
    const part_t last = k_ - 1;
    for (std::uint64_t vi = 0; vi < g_.num_vertices; ++vi) {
      Vid v = static_cast<Vid>(vi);
      if (highs_.is_high(v) || st_.core.get(v)) continue;
      scan_guard(v);
      for (Vid u : g_.out_entries(v)) emit_remaining(v, u, /*v_is_src=*/true, last);
      for (Vid u : g_.in_entries(v))
        if (highs_.is_high(u)) emit_remaining(v, u, /*v_is_src=*/false, last);
    }
    if (st_.sizes[last] > st_.capacity)
      throw InternalError("final partition exceeded its capacity share");
  }

  void emit_remaining(Vid v, Vid u, bool v_is_src, part_t last) {
    st_.cover[last].set(v);
    st_.cover[last].set(u);
    ++st_.sizes[last];
    ++report_.remaining_assigned;
    if (v_is_src)
      sink_.append(v, u, last);
    else
      sink_.append(u, v, last);
  }

  // Completion guard: once the partition that cored a vertex has completed, its
  // adjacency list must never be read again (clean-up reads only non-core
  // lists, so it cannot trip this).
  void scan_guard(Vid v) {
    if (!instrument_) return;
    if (st_.core.get(v) && core_partition_[v] != st_.current)
      ++report_.core_reread_violations;
  }

  // Debug recount: a heap key must equal the count of valid entries pointing
  // outside C ∪ S_current (high-degree endpoints count as inside).
  void verify_heap_keys() {
    heap_.for_each([&](Vid v, Vid key) {
      Vid ext = 0;
      for (Vid u : g_.out_entries(v))
        if (!interior(u)) ++ext;
      for (Vid u : g_.in_entries(v))
        if (!interior(u)) ++ext;
      if (ext != key) ++report_.dext_recount_mismatches;
    });
  }

  PrunedCSR<Vid> &g_;
  const HighDegreeSet<Vid> &highs_;
  std::uint32_t k_;
  AssignmentSink<Vid> &sink_;
  bool instrument_;
  PartitionState<Vid> st_;
  min_heap<Vid> heap_;
  NeppReport report_;
  std::vector<std::uint32_t> core_partition_;
  bool exhausted_ = false;
};

}  // namespace hep
