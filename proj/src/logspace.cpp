#include "tube/logspace.hpp"

namespace tube {

LogReal LogReal::from_log_complex(const LogComplex& c) {
  if (c.is_zero()) return zero();
  double re = std::cos(c.phase);
  if (re == 0.0) return zero();
  return {c.logmag + std::log(std::abs(re)), re > 0.0 ? 1 : -1};
}

}  // namespace tube
