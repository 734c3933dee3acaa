// Log-space complex arithmetic for quantities of size e^{+-c/h}.
//
// A LogComplex stores (logmag, phase) representing e^{logmag} * e^{i*phase}.
// Sums are accumulated in LogAccumulator, which keeps a running reference
// exponent and a rescaled complex partial sum, so quadratures of integrands
// spanning hundreds of e-folds never overflow or silently underflow.
#pragma once

#include <cmath>
#include <complex>
#include <limits>

namespace tube {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct LogComplex {
  double logmag = kNegInf;  // -inf encodes exact zero
  double phase = 0.0;

  static LogComplex zero() { return {kNegInf, 0.0}; }
  static LogComplex from_std(std::complex<double> v) {
    double m = std::abs(v);
    if (m == 0.0) return zero();
    return {std::log(m), std::arg(v)};
  }
  static LogComplex from_polar(double logmag, double phase) { return {logmag, phase}; }

  bool is_zero() const { return logmag == kNegInf; }
  std::complex<double> to_std() const {
    if (is_zero()) return {0.0, 0.0};
    return std::polar(std::exp(logmag), phase);
  }
  // Value rescaled by e^{-ref}: e^{logmag - ref + i*phase}.
  std::complex<double> to_std_scaled(double ref) const {
    if (is_zero()) return {0.0, 0.0};
    return std::polar(std::exp(logmag - ref), phase);
  }
};

inline LogComplex operator*(const LogComplex& a, const LogComplex& b) {
  if (a.is_zero() || b.is_zero()) return LogComplex::zero();
  return {a.logmag + b.logmag, a.phase + b.phase};
}
inline LogComplex operator/(const LogComplex& a, const LogComplex& b) {
  if (a.is_zero()) return LogComplex::zero();
  return {a.logmag - b.logmag, a.phase - b.phase};
}
inline LogComplex operator*(const LogComplex& a, std::complex<double> s) {
  return a * LogComplex::from_std(s);
}

// LogComplex of v * e^{logscale} for a plain complex v.
inline LogComplex with_scale(std::complex<double> v, double logscale) {
  LogComplex c = LogComplex::from_std(v);
  if (c.is_zero() || logscale == kNegInf) return LogComplex::zero();
  return {c.logmag + logscale, c.phase};
}

// a + b via rescaling by the larger exponent.
inline LogComplex operator+(const LogComplex& a, const LogComplex& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  double ref = std::max(a.logmag, b.logmag);
  std::complex<double> s = a.to_std_scaled(ref) + b.to_std_scaled(ref);
  LogComplex r = LogComplex::from_std(s);
  if (r.is_zero()) return LogComplex::zero();
  return {r.logmag + ref, r.phase};
}
inline LogComplex operator-(const LogComplex& a, const LogComplex& b) {
  return a + LogComplex{b.logmag, b.phase + 3.14159265358979323846};
}

// Running sum  sum_i w_i * e^{L_i + i*phi_i}  with real weights w_i.
// The reference exponent only ever increases; terms more than ~700 e-folds
// below it are correctly flushed to zero relative accuracy.
class LogAccumulator {
 public:
  void add(const LogComplex& t, double weight = 1.0) {
    if (t.is_zero() || weight == 0.0) return;
    double lw = std::log(std::abs(weight));
    double lm = t.logmag + lw;
    double ph = t.phase + (weight < 0.0 ? 3.14159265358979323846 : 0.0);
    if (ref_ == kNegInf) {
      ref_ = lm;
      sum_ = std::polar(1.0, ph);
      return;
    }
    if (lm > ref_ + 40.0) {
      // rescale the existing partial sum down to the new reference
      sum_ *= std::exp(ref_ - lm);
      ref_ = lm;
      sum_ += std::polar(1.0, ph);
      return;
    }
    sum_ += std::polar(std::exp(lm - ref_), ph);
  }
  void add_scaled(std::complex<double> v, double logscale) {
    add(LogComplex::from_std(v) * LogComplex::from_polar(logscale, 0.0));
  }

  LogComplex total() const {
    if (ref_ == kNegInf) return LogComplex::zero();
    LogComplex r = LogComplex::from_std(sum_);
    if (r.is_zero()) return LogComplex::zero();
    return {r.logmag + ref_, r.phase};
  }

 private:
  double ref_ = kNegInf;
  std::complex<double> sum_{0.0, 0.0};
};

// Signed real value in log space: sign * e^{log_abs}.
struct LogReal {
  double log_abs = kNegInf;
  int sign = 0;

  static LogReal zero() { return {kNegInf, 0}; }
  static LogReal from_double(double v) {
    if (v == 0.0) return zero();
    return {std::log(std::abs(v)), v > 0.0 ? 1 : -1};
  }
  static LogReal from_log_complex(const LogComplex& c);
  double to_double() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }
};

}  // namespace tube
