// Thin FFTW wrapper: in-place n-dimensional complex transforms.
//
// Plans are created with FFTW_ESTIMATE (deterministic algorithm choice) and
// plan creation is serialized behind a mutex because the FFTW planner is not
// thread-safe; execution is.
#pragma once

#include <complex>
#include <vector>

namespace tube {

// dims are row-major (last index fastest). sign = -1 forward, +1 backward.
// Unnormalized, matching FFTW conventions.
void fft_nd(std::vector<std::complex<double>>& data, const std::vector<int>& dims, int sign);

}  // namespace tube
