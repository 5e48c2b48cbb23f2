#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "hep/assignment.hpp"
#include "hep/common.hpp"
#include "hep/dense_bitset.hpp"
#include "hep/edge_io.hpp"

namespace hep {

// ---------------------------------------------------------------------------
// Exactly-once validation: the assignment's (u,v) multiset must equal the
// input edge multiset minus self-loops, orientation preserved, with every
// partition id in range.

struct ValidationReport {
  bool ok = false;
  std::uint64_t input_edges = 0;  // self-loops excluded
  std::uint64_t records = 0;
  std::uint64_t self_loops_skipped = 0;
  std::uint64_t missing = 0;     // in input, absent from the assignment
  std::uint64_t duplicated = 0;  // assigned more often than the input has it
  std::uint64_t alien = 0;       // assigned but never in the input
  std::uint64_t bad_partition = 0;
  std::uint32_t k = 0;
  std::vector<std::uint64_t> sizes;
};

template <class Vid>
class Validator {
 public:
  explicit Validator(std::uint32_t k) {
    rep_.k = k;
    rep_.sizes.assign(k, 0);
  }

  void expect_input(EdgeSource<Vid> &input) {
    input.rewind();
    Edge<Vid> e;
    while (input.next(e)) {
      if (e.src == e.dst) {
        ++rep_.self_loops_skipped;
        continue;
      }
      ++pending_[key(e.src, e.dst)];
      ++rep_.input_edges;
    }
  }

  void observe(const AssignmentRecord<Vid> &r) {
    ++rep_.records;
    if (r.part >= rep_.k)
      ++rep_.bad_partition;
    else
      ++rep_.sizes[r.part];
    auto it = pending_.find(key(r.u, r.v));
    if (it == pending_.end())
      ++rep_.alien;
    else if (it->second == 0)
      ++rep_.duplicated;
    else
      --it->second;
  }

  ValidationReport finish() {
    for (const auto &kv : pending_) rep_.missing += kv.second;
    rep_.ok = rep_.missing == 0 && rep_.duplicated == 0 && rep_.alien == 0 &&
              rep_.bad_partition == 0;
    return rep_;
  }

 private:
  struct KeyHash {
    std::size_t operator()(const std::pair<Vid, Vid> &p) const {
      return static_cast<std::size_t>(
          mix64(mix64(p.first) ^ (static_cast<std::uint64_t>(p.second) +
                                  0x9e3779b97f4a7c15ULL)));
    }
  };
  static std::pair<Vid, Vid> key(Vid u, Vid v) { return {u, v}; }

  std::unordered_map<std::pair<Vid, Vid>, std::uint64_t, KeyHash> pending_;
  ValidationReport rep_;
};

template <class Vid>
ValidationReport validate(EdgeSource<Vid> &input,
                          const std::vector<AssignmentRecord<Vid>> &records,
                          std::uint32_t k) {
  Validator<Vid> val(k);
  val.expect_input(input);
  for (const auto &r : records) val.observe(r);
  return val.finish();
}

template <class Vid>
ValidationReport validate_file(EdgeSource<Vid> &input, const std::string &assignment_path) {
  AssignmentFileReader<Vid> reader(assignment_path);
  Validator<Vid> val(reader.header().k);
  val.expect_input(input);
  AssignmentRecord<Vid> r;
  while (reader.next(r)) val.observe(r);
  return val.finish();
}

// ---------------------------------------------------------------------------
// Cover reconstruction and quality measures.

template <class Vid>
struct AssignmentAnalysis {
  std::vector<dense_bitset> cover;
  std::vector<std::uint64_t> sizes;
  std::uint32_t k = 0;
  std::uint64_t records = 0;

  std::uint64_t total_replicas() const {
    std::uint64_t s = 0;
    for (const auto &c : cover) s += c.popcount();
    return s;
  }

  std::vector<std::uint64_t> cover_counts() const {
    std::vector<std::uint64_t> counts;
    counts.reserve(cover.size());
    for (const auto &c : cover) counts.push_back(c.popcount());
    return counts;
  }
};

template <class Vid>
AssignmentAnalysis<Vid> analyze_records(const std::vector<AssignmentRecord<Vid>> &records,
                                        std::uint32_t k, std::uint64_t num_vertices) {
  AssignmentAnalysis<Vid> a;
  a.k = k;
  a.cover.assign(k, dense_bitset(num_vertices));
  a.sizes.assign(k, 0);
  for (const auto &r : records) {
    if (r.part >= k) throw IngestError("partition id out of range in assignment");
    a.cover[r.part].set(r.u);
    a.cover[r.part].set(r.v);
    ++a.sizes[r.part];
    ++a.records;
  }
  return a;
}

template <class Vid>
AssignmentAnalysis<Vid> analyze_assignment_file(const std::string &path,
                                                std::uint64_t num_vertices) {
  AssignmentFileReader<Vid> reader(path);
  AssignmentAnalysis<Vid> a;
  a.k = reader.header().k;
  a.cover.assign(a.k, dense_bitset(num_vertices));
  a.sizes.assign(a.k, 0);
  AssignmentRecord<Vid> r;
  while (reader.next(r)) {
    if (r.part >= a.k) throw IngestError("partition id out of range in " + path);
    if (r.u >= num_vertices || r.v >= num_vertices)
      throw IngestError("vertex id out of range in " + path);
    a.cover[r.part].set(r.u);
    a.cover[r.part].set(r.v);
    ++a.sizes[r.part];
    ++a.records;
  }
  return a;
}

// Mean number of partitions covering an active vertex. Exact as a ratio of
// the two integers it is computed from.
inline double replication_factor(std::uint64_t total_replicas,
                                 std::uint64_t num_active_vertices) {
  return num_active_vertices ? static_cast<double>(total_replicas) /
                                   static_cast<double>(num_active_vertices)
                             : 0.0;
}

// k * max partition size / total assigned edges; 1.0 is perfectly balanced.
inline double edge_balance(const std::vector<std::uint64_t> &sizes) {
  std::uint64_t total = 0, mx = 0;
  for (std::uint64_t s : sizes) {
    total += s;
    mx = std::max(mx, s);
  }
  return total ? static_cast<double>(mx) * static_cast<double>(sizes.size()) /
                     static_cast<double>(total)
               : 0.0;
}

// Population standard deviation of per-partition replica counts over their
// mean; 0 when the mean is 0.
inline double vertex_balance(const std::vector<std::uint64_t> &cover_counts) {
  if (cover_counts.empty()) return 0.0;
  double mean = 0.0;
  for (std::uint64_t c : cover_counts) mean += static_cast<double>(c);
  mean /= static_cast<double>(cover_counts.size());
  if (mean == 0.0) return 0.0;
  double var = 0.0;
  for (std::uint64_t c : cover_counts) {
    double d = static_cast<double>(c) - mean;
    var += d * d;
  }
  var /= static_cast<double>(cover_counts.size());
  return std::sqrt(var) / mean;
}

// Replication broken down by decade degree buckets [1,10], [11,100], ...
struct DegreeBucketRow {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  std::uint64_t vertices = 0;
  double mean_replicas = 0.0;
};

template <class Vid>
std::vector<DegreeBucketRow> degree_bucket_report(const AssignmentAnalysis<Vid> &a,
                                                  const std::vector<Vid> &degrees) {
  std::vector<DegreeBucketRow> rows;
  std::vector<std::uint64_t> replica_sum;
  auto bucket_of = [&](std::uint64_t d) {
    std::size_t b = 0;
    std::uint64_t hi = 10;
    while (d > hi) {
      hi *= 10;
      ++b;
    }
    while (rows.size() <= b) {
      DegreeBucketRow row;
      std::uint64_t upper = 10;
      for (std::size_t i = 0; i < rows.size(); ++i) upper *= 10;
      row.hi = upper;
      row.lo = rows.empty() ? 1 : upper / 10 + 1;
      rows.push_back(row);
      replica_sum.push_back(0);
    }
    return b;
  };
  for (std::uint64_t v = 0; v < degrees.size(); ++v) {
    if (degrees[v] == 0) continue;
    std::size_t b = bucket_of(degrees[v]);
    std::uint64_t replicas = 0;
    for (const auto &c : a.cover) replicas += c.get(v) ? 1 : 0;
    replica_sum[b] += replicas;
    ++rows[b].vertices;
  }
  for (std::size_t b = 0; b < rows.size(); ++b)
    rows[b].mean_replicas = rows[b].vertices ? static_cast<double>(replica_sum[b]) /
                                                   static_cast<double>(rows[b].vertices)
                                             : 0.0;
  return rows;
}

}  // namespace hep
