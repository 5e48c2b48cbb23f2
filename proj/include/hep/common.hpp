#pragma once

#include <chrono>
#include <cstdint>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>

namespace hep {

// Vertex id width is a build-time choice per pipeline instantiation: 4-byte ids
// by default, 8-byte ids for graphs whose id space exceeds 2^32.
using vid32_t = std::uint32_t;
using vid64_t = std::uint64_t;

// Partition ids are always 4 bytes, matching the assignment record layout.
using part_t = std::uint32_t;

template <class Vid>
struct Edge {
  Vid src;
  Vid dst;
  friend bool operator==(const Edge &a, const Edge &b) {
    return a.src == b.src && a.dst == b.dst;
  }
};

// Error taxonomy; the CLI maps each to its own exit code.
struct IngestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Violated internal invariant: a bug, not a user error.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

inline constexpr std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) {
  return b == 0 ? 0 : (a + b - 1) / b;
}

// Fixed 64-bit mixer (splitmix64 finalizer). Used wherever a hash must be
// bit-stable across platforms and standard libraries.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Little-endian scalar codecs; file formats are pinned to little-endian.
template <class T>
inline T le_load(const unsigned char *p) {
  T v = 0;
  for (unsigned i = 0; i < sizeof(T); ++i) v |= T(p[i]) << (8 * i);
  return v;
}

template <class T>
inline void le_store(unsigned char *p, T v) {
  for (unsigned i = 0; i < sizeof(T); ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

class Timer {
 public:
  Timer() : start_(clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(clock::now() - start_).count();
  }
  void reset() { start_ = clock::now(); }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_;
};

}  // namespace hep
