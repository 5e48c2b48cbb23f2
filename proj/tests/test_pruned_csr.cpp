#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "doctest.h"

#include "corpus.hpp"
#include "hep/degree_stats.hpp"
#include "hep/edge_io.hpp"
#include "hep/pruned_csr.hpp"

using namespace hep;
using corpus::V;

namespace {

template <class Vid>
struct Built {
  DegreeStats<Vid> stats;
  HighDegreeSet<Vid> highs;
  CsrBuildResult<Vid> result;
  VectorSpillStore<Vid> spill;
};

template <class Vid = V>
Built<Vid> build(const std::vector<Edge<Vid>> &edges, double tau) {
  Built<Vid> b;
  VectorEdgeSource<Vid> src(edges);
  b.stats = compute_degrees(src);
  b.highs = classify_vertices(b.stats, tau);
  b.result = build_pruned_csr(src, b.stats, b.highs, b.spill);
  return b;
}

template <class Vid>
std::vector<Vid> sorted_entries(const PrunedCSR<Vid> &g, Vid v) {
  std::vector<Vid> out;
  for (Vid w : g.out_entries(v)) out.push_back(w);
  for (Vid w : g.in_entries(v)) out.push_back(w);
  std::sort(out.begin(), out.end());
  return out;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_SUITE_BEGIN("pruned_csr");

TEST_CASE("five-edge graph, no split: exact layout") {
  auto b = build(corpus::five_edge_example(), kInf);
  PrunedCSR<V> &g = b.result.csr;

  CHECK(g.num_vertices == 5);
  CHECK(g.num_inmem_edges == 5);
  CHECK(b.result.spilled_edges == 0);
  CHECK(b.result.skipped_self_loops == 0);
  CHECK(b.spill.count() == 0);

  CHECK(g.index_out == std::vector<V>{0, 2, 4, 7, 9, 10});
  CHECK(g.index_in == std::vector<V>{2, 3, 5, 8, 9});
  CHECK(g.column == std::vector<V>{1, 2, 2, 0, 3, 0, 1, 4, 2, 3});
  CHECK(g.out_size == std::vector<V>{2, 1, 1, 1, 0});
  CHECK(g.in_size == std::vector<V>{0, 1, 2, 1, 1});

  // per-vertex views
  CHECK(sorted_entries(g, V{0}) == std::vector<V>{1, 2});
  CHECK(sorted_entries(g, V{1}) == std::vector<V>{0, 2});
  CHECK(sorted_entries(g, V{2}) == std::vector<V>{0, 1, 3});
  CHECK(sorted_entries(g, V{3}) == std::vector<V>{2, 4});
  CHECK(sorted_entries(g, V{4}) == std::vector<V>{3});

  for (V v = 0; v < 5; ++v) {
    CHECK(g.initial_degree(v) == b.stats.degrees[v]);
    CHECK(g.valid_entries(v) == b.stats.degrees[v]);
  }

  CHECK(g.column_bytes() == 40);
  CHECK(g.index_bytes() == 44);       // (|V|+1 + |V|) ids
  CHECK(g.size_field_bytes() == 40);  // 2 |V| ids
}

TEST_CASE("figure graph at tau 1.5: high regions empty, one edge spilled") {
  auto b = build(corpus::figure_graph(), 1.5);
  PrunedCSR<V> &g = b.result.csr;

  REQUIRE(b.highs.count == 2);  // vertices 4 and 5
  CHECK(g.column.size() == 13);
  CHECK(b.result.spilled_edges == 1);
  CHECK(b.spill.edges() == std::vector<Edge<V>>{{4, 5}});
  CHECK(g.num_inmem_edges == 10);

  // high-degree vertices own zero-width regions
  for (V h : {V{4}, V{5}}) {
    CHECK(g.initial_degree(h) == 0);
    CHECK(g.out_entries(h).empty());
    CHECK(g.in_entries(h).empty());
    CHECK(g.index_in[h] == g.index_out[h]);
  }

  // a low vertex keeps its high neighbors in the column
  CHECK(sorted_entries(g, V{0}) == std::vector<V>{1, 4, 5});
  std::span<V> in0 = g.in_entries(0);
  CHECK(std::vector<V>(in0.begin(), in0.end()) == std::vector<V>{4, 5});
  std::span<V> out0 = g.out_entries(0);
  CHECK(std::vector<V>(out0.begin(), out0.end()) == std::vector<V>{1});

  // region widths still equal full degrees for low vertices
  for (V v : {V{0}, V{1}, V{2}, V{3}, V{6}, V{7}, V{8}})
    CHECK(g.initial_degree(v) == b.stats.degrees[v]);
}

TEST_CASE("self-loops are skipped and tallied") {
  auto b = build({{0, 1}, {2, 2}, {5, 5}}, kInf);
  CHECK(b.result.skipped_self_loops == 2);
  CHECK(b.result.csr.num_inmem_edges == 1);
  CHECK(b.result.csr.column.size() == 2);
  CHECK(b.result.csr.valid_entries(2) == 0);
  CHECK(b.result.csr.valid_entries(5) == 0);
}

TEST_CASE("removal swaps with the last valid entry") {
  auto b = build(corpus::five_edge_example(), kInf);
  PrunedCSR<V> &g = b.result.csr;

  // out-sublist of 0 is [1, 2]; removing slot 0 moves 2 forward
  g.remove_out_at(0, 0);
  CHECK(g.out_size[0] == 1);
  CHECK(g.out_entries(0)[0] == 2);
  CHECK(g.initial_degree(0) == 2);  // width is permanent
  CHECK(g.valid_entries(0) == 1);

  g.remove_out_at(0, 0);
  CHECK(g.out_entries(0).empty());
  CHECK(g.valid_entries(0) == 0);
  CHECK(g.initial_degree(0) == 2);

  // in-sublist of 2 is [0, 1]
  g.remove_in_at(2, 0);
  CHECK(g.in_size[2] == 1);
  CHECK(g.in_entries(2)[0] == 1);

  // removing the last valid entry is a plain pop
  g.remove_in_at(2, 0);
  CHECK(g.in_entries(2).empty());
  CHECK(g.valid_entries(2) == 1);  // the out entry (3) remains
}

TEST_CASE("column overflow of the id type is rejected") {
  // With 8-bit ids the column array tops out at 255 entries; a 200-vertex
  // path needs 398.
  std::vector<Edge<std::uint8_t>> edges;
  for (int i = 0; i + 1 < 200; ++i)
    edges.push_back({static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(i + 1)});
  VectorEdgeSource<std::uint8_t> src(edges);
  DegreeStats<std::uint8_t> st = compute_degrees(src);
  HighDegreeSet<std::uint8_t> highs = classify_vertices(st, kInf);
  VectorSpillStore<std::uint8_t> spill;
  CHECK_THROWS_AS(build_pruned_csr(src, st, highs, spill), ConfigError);
}

TEST_CASE("structure invariants across the corpus") {
  for (const auto &g : corpus::standard_corpus()) {
    for (double tau : {0.5, 1.0, 2.0, kInf}) {
      CAPTURE(g.name);
      CAPTURE(tau);
      auto b = build(g.edges, tau);
      const PrunedCSR<V> &csr = b.result.csr;
      const DegreeStats<V> &st = b.stats;

      // column width = total degree of low vertices; all slots filled
      std::uint64_t expected = 0, valid = 0;
      for (std::uint64_t v = 0; v < st.num_vertices; ++v) {
        V vid = static_cast<V>(v);
        if (!b.highs.is_high(vid)) expected += st.degrees[v];
        valid += csr.valid_entries(vid);
        if (b.highs.is_high(vid)) {
          CHECK(csr.valid_entries(vid) == 0);
          CHECK(csr.initial_degree(vid) == 0);
        } else {
          CHECK(csr.initial_degree(vid) == st.degrees[v]);
          CHECK(csr.out_size[v] == st.out_degrees[v]);
          CHECK(csr.in_size[v] == st.degrees[v] - st.out_degrees[v]);
        }
      }
      CHECK(csr.column.size() == expected);
      CHECK(valid == expected);
      CHECK(csr.num_inmem_edges + b.result.spilled_edges == st.num_edges);
      CHECK(b.spill.count() == b.result.spilled_edges);

      // every stored entry is a real neighbor, every spilled edge is
      // high-to-high, and nothing is lost: each edge occupies exactly one
      // column slot per low endpoint
      std::map<V, std::vector<V>> adjacency;
      std::uint64_t low_endpoint_sides = 0;
      for (const Edge<V> &e : g.edges) {
        if (e.src == e.dst) continue;
        adjacency[e.src].push_back(e.dst);
        adjacency[e.dst].push_back(e.src);
        low_endpoint_sides += !b.highs.is_high(e.src);
        low_endpoint_sides += !b.highs.is_high(e.dst);
      }
      std::uint64_t stored_sides = 0;
      for (std::uint64_t v = 0; v < st.num_vertices; ++v) {
        V vid = static_cast<V>(v);
        auto got = sorted_entries(csr, vid);
        stored_sides += got.size();
        auto want = adjacency[vid];
        std::sort(want.begin(), want.end());
        if (b.highs.is_high(vid)) continue;  // low side keeps everything
        CHECK(got == want);
      }
      for (const Edge<V> &e : b.spill.edges()) {
        CHECK(b.highs.is_high(e.src));
        CHECK(b.highs.is_high(e.dst));
      }
      CHECK(stored_sides == low_endpoint_sides);
    }
  }
}

TEST_SUITE_END();
