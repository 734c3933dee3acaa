// Least-squares line fits with acceptance diagnostics.
//
// Scaling experiments fit log(quantity) against log(h) or 1/h; a fit is
// trusted only when the residual norm is below 10% of the spread of the
// data, and R^2 is reported alongside for affinity checks.
#pragma once

#include <vector>

namespace tube {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;             // coefficient of determination
  double residual_norm = 0.0;  // sqrt(sum of squared residuals)
  double data_range = 0.0;     // max(y) - min(y)
  bool accepted = false;       // residual_norm < 0.10 * data_range
  int points = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace tube
