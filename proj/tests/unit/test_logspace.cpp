#include "doctest.h"

#include <cmath>
#include <complex>

#include "tube/logspace.hpp"

using namespace tube;

namespace {
std::complex<double> via_log(std::complex<double> v) {
  return LogComplex::from_std(v).to_std();
}
}  // namespace

TEST_CASE("round trip through log representation") {
  const std::complex<double> vals[] = {{1.0, 0.0}, {-2.5, 3.0}, {0.0, -4.0}, {1e-30, 1e-30}};
  // exp(log|v|) amplifies the rounding of the stored exponent by |log|v||.
  for (const auto& v : vals) {
    const double amp = 1.0 + std::abs(std::log(std::abs(v)));
    CHECK(std::abs(via_log(v) - v) <= 1e-15 * amp * std::abs(v));
  }
  CHECK(LogComplex::from_std({0.0, 0.0}).is_zero());
  CHECK(LogComplex::zero().to_std() == std::complex<double>(0.0, 0.0));
}

TEST_CASE("products and quotients add and subtract exponents") {
  const LogComplex a = LogComplex::from_polar(500.0, 0.3);
  const LogComplex b = LogComplex::from_polar(-700.0, -1.1);
  const LogComplex p = a * b;
  CHECK(p.logmag == doctest::Approx(-200.0));
  CHECK(p.phase == doctest::Approx(-0.8));
  const LogComplex q = a / b;
  CHECK(q.logmag == doctest::Approx(1200.0));
  CHECK(q.phase == doctest::Approx(1.4));
}

TEST_CASE("sums agree with complex arithmetic at moderate scale") {
  const std::complex<double> x{0.7, -0.2}, y{-1.3, 0.5};
  const LogComplex s = LogComplex::from_std(x) + LogComplex::from_std(y);
  CHECK(std::abs(s.to_std() - (x + y)) < 1e-14);
  const LogComplex d = LogComplex::from_std(x) - LogComplex::from_std(y);
  CHECK(std::abs(d.to_std() - (x - y)) < 1e-14);
}

TEST_CASE("sums across hundreds of e-folds keep the dominant term") {
  const LogComplex big = LogComplex::from_polar(900.0, 0.25);
  const LogComplex small = LogComplex::from_polar(100.0, 2.0);
  const LogComplex s = big + small;
  CHECK(s.logmag == doctest::Approx(900.0));
  CHECK(s.phase == doctest::Approx(0.25));
}

TEST_CASE("exact cancellation yields the zero element") {
  const LogComplex a = LogComplex::from_std({3.0, 4.0});
  const LogComplex z = a - a;
  CHECK(z.is_zero());
}

TEST_CASE("accumulator matches a direct sum and handles negative weights") {
  LogAccumulator acc;
  std::complex<double> direct{0.0, 0.0};
  const double ph[] = {0.1, 2.0, -1.2, 3.0, 0.7};
  const double lm[] = {-2.0, 1.0, 0.0, -1.5, 2.2};
  const double w[] = {1.0, -0.5, 2.0, -1.25, 0.75};
  for (int i = 0; i < 5; ++i) {
    acc.add(LogComplex::from_polar(lm[i], ph[i]), w[i]);
    direct += w[i] * std::polar(std::exp(lm[i]), ph[i]);
  }
  CHECK(std::abs(acc.total().to_std() - direct) < 1e-14 * std::abs(direct));
}

TEST_CASE("accumulator rescales upward without losing earlier terms") {
  LogAccumulator acc;
  acc.add(LogComplex::from_polar(0.0, 0.0));    // 1
  acc.add(LogComplex::from_polar(100.0, 0.0));  // e^100
  const LogComplex t = acc.total();
  // log(e^100 + 1) = 100 + log(1 + e^{-100}) = 100 exactly in double.
  CHECK(t.logmag == doctest::Approx(100.0));
  CHECK(t.phase == doctest::Approx(0.0));
}

TEST_CASE("add_scaled applies the extra exponent") {
  LogAccumulator acc;
  acc.add_scaled({2.0, 0.0}, -1000.0);
  const LogComplex t = acc.total();
  CHECK(t.logmag == doctest::Approx(std::log(2.0) - 1000.0));
}

TEST_CASE("signed log reals") {
  CHECK(LogReal::from_double(-3.5).to_double() == doctest::Approx(-3.5));
  CHECK(LogReal::from_double(0.0).sign == 0);
  CHECK(LogReal::zero().to_double() == 0.0);
}

TEST_CASE("with_scale composes a plain value with a log factor") {
  const LogComplex v = with_scale({1.0, 1.0}, 250.0);
  CHECK(v.logmag == doctest::Approx(250.0 + 0.5 * std::log(2.0)));
  CHECK(v.phase == doctest::Approx(std::atan2(1.0, 1.0)));
  CHECK(with_scale({0.0, 0.0}, 5.0).is_zero());
}
