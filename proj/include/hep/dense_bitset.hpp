#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace hep {

// Fixed-size bitset over the vertex id space. One of these per partition plus
// one for the core set; they are the only per-vertex state that scales with k.
class dense_bitset {
 public:
  dense_bitset() = default;
  explicit dense_bitset(std::uint64_t n) { resize(n); }

  void resize(std::uint64_t n) {
    n_ = n;
    words_.assign((n + 63) / 64, 0);
  }

  std::uint64_t size() const { return n_; }

  bool get(std::uint64_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }

  void set(std::uint64_t i) { words_[i >> 6] |= std::uint64_t(1) << (i & 63); }

  void clear(std::uint64_t i) { words_[i >> 6] &= ~(std::uint64_t(1) << (i & 63)); }

  void reset() { words_.assign(words_.size(), 0); }

  std::uint64_t popcount() const {
    std::uint64_t c = 0;
    for (std::uint64_t w : words_) c += static_cast<std::uint64_t>(std::popcount(w));
    return c;
  }

  // Visits set bits in ascending order.
  template <class F>
  void for_each_set(F &&f) const {
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
      std::uint64_t w = words_[wi];
      while (w) {
        unsigned b = static_cast<unsigned>(std::countr_zero(w));
        f(static_cast<std::uint64_t>(wi) * 64 + b);
        w &= w - 1;
      }
    }
  }

  std::uint64_t allocated_bytes() const { return words_.size() * sizeof(std::uint64_t); }

 private:
  std::uint64_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace hep
