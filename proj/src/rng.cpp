#include "tube/rng.hpp"

#include <cmath>

namespace tube {

double CounterRng::normal(uint64_t i) const {
  // u1 in (0,1] so the log is finite.
  double u1 = 1.0 - uniform(2 * i);
  double u2 = uniform(2 * i + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace tube
