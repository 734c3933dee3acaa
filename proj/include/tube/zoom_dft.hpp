// Dense semiclassical Fourier transforms on small tensors.
//
// The windowed transform  G(b*) = integral e^{-i <b, b*>/h} f(b) db  is
// evaluated axis by axis: along each axis the kernel e^{-i t_j f_m / h} is an
// explicit (out x in) matrix applied to every fiber, with the quadrature
// weight dt folded in. Output frequency grids are arbitrary (not tied to the
// FFT dual lattice), which the wavefront diagnostics need. Sizes here are a
// few hundred per axis, so the dense kernel beats a chirp-z setup in both
// simplicity and constant factors; agreement with the FFT path is unit-tested.
#pragma once

#include <complex>
#include <vector>

namespace tube {

// Row-major tensor of complex samples with per-axis uniform grids.
struct Tensor {
  std::vector<int> dims;
  std::vector<std::complex<double>> data;

  size_t size() const { return data.size(); }
  static size_t total(const std::vector<int>& d) {
    size_t t = 1;
    for (int v : d) t *= static_cast<size_t>(v);
    return t;
  }
};

struct AxisGrid {
  double t0 = 0.0;  // first sample coordinate
  double dt = 0.0;  // spacing (also the quadrature weight)
  int count = 0;
  double coord(int i) const { return t0 + dt * i; }
};

// Replace axis `axis` (values t_j = in.t0 + j*in.dt, weight in.dt) by the
// frequency axis f_m = f0 + m*df:  out = sum_j e^{-i t_j f_m / h} f(t_j) * dt.
Tensor dft_axis(const Tensor& t, int axis, const AxisGrid& in, double f0, double df,
                int out_count, double h);

// Pointwise multiply by a per-axis separable window, w = prod_a w_a(coord).
void apply_separable(Tensor& t, const std::vector<std::vector<double>>& axis_weights);

}  // namespace tube
