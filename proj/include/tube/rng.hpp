// Splittable counter-based random stream.
//
// Every draw is a pure function of (seed, stream, counter) through two
// rounds of the splitmix64 finalizer, so parallel generation and replay are
// reproducible by construction and independent of call order.
#pragma once

#include <cstdint>

namespace tube {

namespace detail {
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream) : key_(detail::mix64(detail::mix64(seed) ^ detail::mix64(stream ^ 0xa5a5a5a5a5a5a5a5ULL))) {}

  uint64_t bits(uint64_t counter) const { return detail::mix64(key_ ^ detail::mix64(counter)); }

  // Uniform in [0,1) with 53-bit resolution.
  double uniform(uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller on counters (2*i, 2*i+1).
  double normal(uint64_t i) const;

  // Derive an independent sub-stream (e.g. one per ensemble draw).
  CounterRng split(uint64_t substream) const {
    CounterRng r(0, 0);
    r.key_ = detail::mix64(key_ ^ detail::mix64(substream + 0x632be59bd9b4e019ULL));
    return r;
  }

 private:
  uint64_t key_;
};

}  // namespace tube
