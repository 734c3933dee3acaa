#include "tube/fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace tube {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  f.points = static_cast<int>(x.size());
  if (x.size() != y.size() || x.size() < 2) return f;
  const int n = f.points;
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (int i = 0; i < n; ++i) {
    double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.residual_norm = std::sqrt(ss_res);
  f.r2 = (syy == 0.0) ? 1.0 : 1.0 - ss_res / syy;
  double ymin = *std::min_element(y.begin(), y.end());
  double ymax = *std::max_element(y.begin(), y.end());
  f.data_range = ymax - ymin;
  f.accepted = (f.data_range > 0.0) && (f.residual_norm < 0.10 * f.data_range);
  return f;
}

}  // namespace tube
