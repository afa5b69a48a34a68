#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace cavitypress {

/// Neumaier's compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static Interval point(double v) { return Interval{v, v}; }
  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
  bool overlaps(const Interval& o, double tol = 0.0) const { return lo <= o.hi + tol && o.lo <= hi + tol; }
  Interval hull(const Interval& o) const { return Interval{std::min(lo, o.lo), std::max(hi, o.hi)}; }
  Interval operator+(const Interval& o) const { return Interval{lo + o.lo, hi + o.hi}; }
  Interval operator+(double c) const { return Interval{lo + c, hi + c}; }
  Interval operator*(double c) const { return c >= 0 ? Interval{lo * c, hi * c} : Interval{hi * c, lo * c}; }
  /// -log of a probability interval.
  Interval neg_log() const {
    const double inf = std::numeric_limits<double>::infinity();
    return Interval{hi > 0 ? -std::log(hi) : inf, lo > 0 ? -std::log(lo) : inf};
  }
  /// {|v| : v in this interval}.
  Interval abs() const {
    if (lo >= 0) return *this;
    if (hi <= 0) return Interval{-hi, -lo};
    return Interval{0.0, std::max(-lo, hi)};
  }
  friend bool operator==(const Interval&, const Interval&) = default;
};

using ProbInterval = Interval;

}  // namespace cavitypress
