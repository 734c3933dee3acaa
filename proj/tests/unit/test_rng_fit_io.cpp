#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tube/fit.hpp"
#include "tube/io.hpp"
#include "tube/rng.hpp"

using namespace tube;

TEST_CASE("counter rng is deterministic and stream-separated") {
  const CounterRng a(42, 7);
  const CounterRng b(42, 7);
  const CounterRng c(42, 8);
  for (std::uint64_t i = 0; i < 16; ++i) {
    CHECK(a.bits(i) == b.bits(i));
    CHECK(a.bits(i) != c.bits(i));
  }
  // Different counters decorrelate within one stream.
  CHECK(a.bits(0) != a.bits(1));
}

TEST_CASE("uniform values live in [0,1) and fill the range") {
  const CounterRng r(123, 0);
  double lo = 1.0, hi = 0.0, mean = 0.0;
  const int n = 4096;
  for (int i = 0; i < n; ++i) {
    const double v = r.uniform(static_cast<std::uint64_t>(i));
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    mean += v;
  }
  mean /= n;
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
  CHECK(mean == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("normal variates have unit scale and split streams differ") {
  const CounterRng r(9, 3);
  double m = 0.0, v = 0.0;
  const int n = 4096;
  for (int i = 0; i < n; ++i) m += r.normal(static_cast<std::uint64_t>(i));
  m /= n;
  for (int i = 0; i < n; ++i) {
    const double d = r.normal(static_cast<std::uint64_t>(i)) - m;
    v += d * d;
  }
  v /= n - 1;
  CHECK(m == doctest::Approx(0.0).epsilon(0.1));
  CHECK(std::abs(m) < 0.08);
  CHECK(v == doctest::Approx(1.0).epsilon(0.1));
  const CounterRng s1 = r.split(1), s2 = r.split(2);
  CHECK(s1.bits(0) != s2.bits(0));
}

TEST_CASE("line fit recovers an exact line and accepts it") {
  std::vector<double> x, y;
  for (int i = 0; i < 6; ++i) {
    x.push_back(0.5 * i);
    y.push_back(-0.75 * (0.5 * i) + 2.0);
  }
  const LineFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(-0.75).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.accepted);
  CHECK(f.points == 6);
}

TEST_CASE("line fit rejects data dominated by scatter") {
  // Residual norm comparable to the data range must not be accepted.
  const std::vector<double> x{0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
  const std::vector<double> y{0.0, 2.0, -2.0, 2.5, -2.5, 0.5};
  const LineFit f = fit_line(x, y);
  CHECK(!f.accepted);
}

TEST_CASE("csv bytes are exact and newline-terminated") {
  CsvWriter w({"a", "b"});
  w.add_row({1.0, -0.5});
  w.add_row_raw({"x", "2"});
  const std::string expect =
      "a,b\n1.00000000000000000e+00,-5.00000000000000000e-01\nx,2\n";
  CHECK(w.str() == expect);
  CHECK(w.rows() == 2);
}

TEST_CASE("format_full round trips doubles exactly") {
  const double vals[] = {0.1, -3.0, 1e-300, 2.2250738585072014e-308, 12345.6789};
  for (const double v : vals) {
    const std::string s = format_full(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("file writers are byte-stable across repeated writes") {
  const std::string dir = "unit_io_scratch";
  ensure_dir(dir);
  OrderedJson j;
  j["z_first"] = 1.5;
  j["a_second"] = {{"nested", true}};
  j["list"] = {1, 2, 3};
  auto read_back = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  write_json_file(dir + "/a.json", j);
  const std::string first = read_back(dir + "/a.json");
  write_json_file(dir + "/a.json", j);
  CHECK(read_back(dir + "/a.json") == first);
  // Insertion order is preserved, not sorted.
  CHECK(first.find("z_first") < first.find("a_second"));

  CsvWriter w({"h"});
  w.add_row({0.125});
  w.write_file(dir + "/a.csv");
  CHECK(read_back(dir + "/a.csv") == "h\n1.25000000000000000e-01\n");
}
