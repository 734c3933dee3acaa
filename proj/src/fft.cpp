#include "tube/fft.hpp"

#include <fftw3.h>

#include <cstdlib>
#include <mutex>
#include <stdexcept>

namespace tube {

void fft_nd(std::vector<std::complex<double>>& data, const std::vector<int>& dims, int sign) {
  static std::mutex planner_mutex;
  size_t total = 1;
  for (int d : dims) total *= static_cast<size_t>(d);
  if (total != data.size()) throw std::invalid_argument("fft_nd: dims do not match data size");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lk(planner_mutex);
    plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf, buf,
                         sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  if (!plan) throw std::runtime_error("fft_nd: planner failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lk(planner_mutex);
    fftw_destroy_plan(plan);
  }
}

}  // namespace tube
