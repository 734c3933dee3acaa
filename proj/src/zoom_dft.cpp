#include "tube/zoom_dft.hpp"

#include <cmath>
#include <stdexcept>

namespace tube {

Tensor dft_axis(const Tensor& t, int axis, const AxisGrid& in, double f0, double df,
                int out_count, double h) {
  const int rank = static_cast<int>(t.dims.size());
  if (axis < 0 || axis >= rank) throw std::invalid_argument("dft_axis: bad axis");
  const int n_in = t.dims[axis];
  if (n_in != in.count) throw std::invalid_argument("dft_axis: grid count mismatch");

  size_t outer = 1, inner = 1;
  for (int a = 0; a < axis; ++a) outer *= static_cast<size_t>(t.dims[a]);
  for (int a = axis + 1; a < rank; ++a) inner *= static_cast<size_t>(t.dims[a]);

  // kernel[m*n_in + j] = e^{-i t_j f_m / h} * dt
  std::vector<std::complex<double>> kernel(static_cast<size_t>(out_count) * n_in);
  for (int m = 0; m < out_count; ++m) {
    double fm = f0 + df * m;
    for (int j = 0; j < n_in; ++j) {
      double ph = -in.coord(j) * fm / h;
      kernel[static_cast<size_t>(m) * n_in + j] = std::polar(in.dt, ph);
    }
  }

  Tensor out;
  out.dims = t.dims;
  out.dims[axis] = out_count;
  out.data.assign(Tensor::total(out.dims), {0.0, 0.0});

  for (size_t o = 0; o < outer; ++o) {
    const std::complex<double>* src = t.data.data() + o * n_in * inner;
    std::complex<double>* dst = out.data.data() + o * static_cast<size_t>(out_count) * inner;
    for (int m = 0; m < out_count; ++m) {
      const std::complex<double>* krow = kernel.data() + static_cast<size_t>(m) * n_in;
      std::complex<double>* drow = dst + static_cast<size_t>(m) * inner;
      for (int j = 0; j < n_in; ++j) {
        const std::complex<double> k = krow[j];
        const std::complex<double>* srow = src + static_cast<size_t>(j) * inner;
        for (size_t i = 0; i < inner; ++i) drow[i] += k * srow[i];
      }
    }
  }
  return out;
}

void apply_separable(Tensor& t, const std::vector<std::vector<double>>& axis_weights) {
  const int rank = static_cast<int>(t.dims.size());
  if (static_cast<int>(axis_weights.size()) != rank)
    throw std::invalid_argument("apply_separable: rank mismatch");
  std::vector<size_t> stride(rank, 1);
  for (int a = rank - 2; a >= 0; --a)
    stride[a] = stride[a + 1] * static_cast<size_t>(t.dims[a + 1]);
  for (size_t idx = 0; idx < t.data.size(); ++idx) {
    double w = 1.0;
    size_t rem = idx;
    for (int a = 0; a < rank; ++a) {
      size_t i = rem / stride[a];
      rem %= stride[a];
      w *= axis_weights[a][i];
    }
    t.data[idx] *= w;
  }
}

}  // namespace tube
