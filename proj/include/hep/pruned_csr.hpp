#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "hep/common.hpp"
#include "hep/degree_stats.hpp"
#include "hep/edge_io.hpp"

namespace hep {

// Compressed adjacency restricted to low-degree vertices. Each low-degree
// vertex owns one region of the column array holding its out-sublist (edges
// where it is the left-hand input endpoint) followed by its in-sublist; the
// region width equals its degree. High-degree vertices own empty regions —
// their edges appear only on their low-degree neighbors' side, and edges
// between two high-degree vertices are spilled out entirely.
//
// Valid entries occupy the prefix of each sublist. Removal swaps the entry
// with the sublist's last valid entry and decrements the size field, so the
// size arrays shrink over the run while the index arrays stay fixed.
template <class Vid>
struct PrunedCSR {
  std::vector<Vid> index_out;  // |V|+1: region start per vertex + end sentinel
  std::vector<Vid> index_in;   // |V|: start of the in-sublist inside the region
  std::vector<Vid> column;
  std::vector<Vid> out_size;
  std::vector<Vid> in_size;
  std::uint64_t num_vertices = 0;
  std::uint64_t num_inmem_edges = 0;

  std::span<Vid> out_entries(Vid v) {
    return {column.data() + index_out[v], out_size[v]};
  }
  std::span<Vid> in_entries(Vid v) {
    return {column.data() + index_in[v], in_size[v]};
  }
  std::span<const Vid> out_entries(Vid v) const {
    return {column.data() + index_out[v], out_size[v]};
  }
  std::span<const Vid> in_entries(Vid v) const {
    return {column.data() + index_in[v], in_size[v]};
  }

  Vid valid_entries(Vid v) const { return out_size[v] + in_size[v]; }

  // Region width; equals the vertex's full degree for low-degree vertices and
  // survives edge removal, so it doubles as the streaming-phase degree lookup.
  Vid initial_degree(Vid v) const { return index_out[v + 1] - index_out[v]; }

  void remove_out_at(Vid v, Vid i) {
    Vid base = index_out[v];
    column[base + i] = column[base + out_size[v] - 1];
    --out_size[v];
  }
  void remove_in_at(Vid v, Vid i) {
    Vid base = index_in[v];
    column[base + i] = column[base + in_size[v] - 1];
    --in_size[v];
  }

  std::uint64_t column_bytes() const { return column.size() * sizeof(Vid); }
  std::uint64_t index_bytes() const {
    return (index_out.size() + index_in.size()) * sizeof(Vid);
  }
  std::uint64_t size_field_bytes() const {
    return (out_size.size() + in_size.size()) * sizeof(Vid);
  }
};

template <class Vid>
struct CsrBuildResult {
  PrunedCSR<Vid> csr;
  std::uint64_t spilled_edges = 0;
  std::uint64_t skipped_self_loops = 0;
};

// Second ingestion pass: lays out the column array from the degree stats and
// fills it in input order, diverting high-to-high edges into the spill store.
template <class Vid>
CsrBuildResult<Vid> build_pruned_csr(EdgeSource<Vid> &src, const DegreeStats<Vid> &st,
                                     const HighDegreeSet<Vid> &highs,
                                     SpillStore<Vid> &spill) {
  CsrBuildResult<Vid> res;
  PrunedCSR<Vid> &g = res.csr;
  const std::uint64_t n = st.num_vertices;
  g.num_vertices = n;

  std::uint64_t entries = 0;
  for (std::uint64_t v = 0; v < n; ++v)
    if (!highs.is_high(static_cast<Vid>(v))) entries += st.degrees[v];
  if (entries > std::numeric_limits<Vid>::max())
    throw ConfigError("column array needs " + std::to_string(entries) +
                      " entries, which overflows the configured id width; "
                      "rebuild the input with 8-byte ids");

  g.index_out.resize(n + 1);
  g.index_in.resize(n);
  g.out_size.assign(n, 0);
  g.in_size.assign(n, 0);
  std::uint64_t off = 0;
  for (std::uint64_t v = 0; v < n; ++v) {
    g.index_out[v] = static_cast<Vid>(off);
    if (!highs.is_high(static_cast<Vid>(v))) {
      g.index_in[v] = static_cast<Vid>(off + st.out_degrees[v]);
      off += st.degrees[v];
    } else {
      g.index_in[v] = static_cast<Vid>(off);
    }
  }
  g.index_out[n] = static_cast<Vid>(off);
  g.column.resize(off);

  // Size fields double as fill cursors; they end up at the sublist widths.
  src.rewind();
  Edge<Vid> e;
  while (src.next(e)) {
    if (e.src == e.dst) {
      ++res.skipped_self_loops;
      continue;
    }
    bool hs = highs.is_high(e.src), hd = highs.is_high(e.dst);
    if (hs && hd) {
      spill.append(e);
      ++res.spilled_edges;
      continue;
    }
    if (!hs) g.column[g.index_out[e.src] + g.out_size[e.src]++] = e.dst;
    if (!hd) g.column[g.index_in[e.dst] + g.in_size[e.dst]++] = e.src;
  }
  spill.finalize();
  g.num_inmem_edges = st.num_edges - res.spilled_edges;
  return res;
}

}  // namespace hep
