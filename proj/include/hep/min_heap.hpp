#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "hep/common.hpp"

namespace hep {

// Binary min-heap over (external degree, vertex id) with a dense position
// table for O(log n) decrease-key. Orders lexicographically, so among equal
// keys the lowest vertex id is popped first — the tie-break every expansion
// decision in the partitioners relies on.
template <class Vid>
class min_heap {
 public:
  static constexpr Vid npos = std::numeric_limits<Vid>::max();

  void reset(std::uint64_t n) {
    pos_.assign(n, npos);
    heap_.clear();
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

  bool contains(Vid v) const { return pos_[v] != npos; }

  Vid key_of(Vid v) const { return heap_[pos_[v]].first; }

  void insert(Vid v, Vid key) {
    if (contains(v)) throw InternalError("min_heap: duplicate insert");
    heap_.emplace_back(key, v);
    pos_[v] = static_cast<Vid>(heap_.size() - 1);
    sift_up(heap_.size() - 1);
  }

  // Decrements v's key by one (the only key change expansion ever makes).
  void decrease_key(Vid v) {
    std::size_t i = pos_[v];
    if (heap_[i].first == 0) throw InternalError("min_heap: key underflow");
    --heap_[i].first;
    sift_up(i);
  }

  std::pair<Vid, Vid> pop_min() {  // returns (key, vertex)
    std::pair<Vid, Vid> top = heap_.front();
    pos_[top.second] = npos;
    if (heap_.size() > 1) {
      heap_.front() = heap_.back();
      pos_[heap_.front().second] = 0;
      heap_.pop_back();
      sift_down(0);
    } else {
      heap_.pop_back();
    }
    return top;
  }

  void remove(Vid v) {
    std::size_t i = pos_[v];
    pos_[v] = npos;
    if (i + 1 != heap_.size()) {
      heap_[i] = heap_.back();
      pos_[heap_[i].second] = static_cast<Vid>(i);
      heap_.pop_back();
      // The moved element may need to travel either way. If sift_up moves it,
      // the slot inherits an ancestor for which sift_down is a no-op.
      sift_up(i);
      sift_down(i);
    } else {
      heap_.pop_back();
    }
  }

  // Forgets all members; cost proportional to current size, not capacity.
  void clear() {
    for (auto &e : heap_) pos_[e.second] = npos;
    heap_.clear();
  }

  // Visits members in unspecified order as (vertex, key).
  template <class F>
  void for_each(F &&f) const {
    for (const auto &e : heap_) f(e.second, e.first);
  }

  std::uint64_t allocated_bytes() const {
    return pos_.size() * sizeof(Vid) + heap_.capacity() * sizeof(std::pair<Vid, Vid>);
  }

 private:
  static bool less(const std::pair<Vid, Vid> &a, const std::pair<Vid, Vid> &b) {
    return a.first != b.first ? a.first < b.first : a.second < b.second;
  }

  void sift_up(std::size_t i) {
    while (i > 0) {
      std::size_t p = (i - 1) / 2;
      if (!less(heap_[i], heap_[p])) break;
      swap_at(i, p);
      i = p;
    }
  }

  void sift_down(std::size_t i) {
    for (;;) {
      std::size_t l = 2 * i + 1, r = l + 1, m = i;
      if (l < heap_.size() && less(heap_[l], heap_[m])) m = l;
      if (r < heap_.size() && less(heap_[r], heap_[m])) m = r;
      if (m == i) break;
      swap_at(i, m);
      i = m;
    }
  }

  void swap_at(std::size_t a, std::size_t b) {
    std::swap(heap_[a], heap_[b]);
    pos_[heap_[a].second] = static_cast<Vid>(a);
    pos_[heap_[b].second] = static_cast<Vid>(b);
  }

  std::vector<std::pair<Vid, Vid>> heap_;  // (key, vertex)
  std::vector<Vid> pos_;
};

}  // namespace hep
