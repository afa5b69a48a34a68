#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cavitypress/group.hpp"
#include "cavitypress/subshift.hpp"

namespace testing {

using namespace cavitypress;

inline const double kPhi = (1.0 + std::sqrt(5.0)) / 2.0;
inline const double kLogPhi = std::log(kPhi);

inline GroupPoint pt(int x) { return GroupPoint{0, Lattice{x, 0, 0, 0}}; }
inline GroupPoint pt(int x, int y) { return GroupPoint{0, Lattice{x, y, 0, 0}}; }
inline GroupPoint at(int coset, int x) { return GroupPoint{coset, Lattice{x, 0, 0, 0}}; }

/// [lo, hi) on Z.
inline FiniteRegion seg(int lo, int hi) {
  std::vector<GroupPoint> v;
  for (int x = lo; x < hi; ++x) v.push_back(pt(x));
  return FiniteRegion(v);
}

/// Word over symbols '0'..'9' placed on [start, start + len).
inline Pattern word(const std::string& w, int start = 0) {
  std::vector<Symbol> vals;
  for (char c : w) vals.push_back(static_cast<Symbol>(c - '0'));
  return Pattern(seg(start, start + static_cast<int>(w.size())), vals);
}

inline std::uint64_t fibonacci(int n) {
  std::uint64_t a = 0, b = 1;
  for (int i = 0; i < n; ++i) {
    const auto c = a + b;
    a = b;
    b = c;
  }
  return a;
}

/// Binary words of length n without two adjacent 1s, by bitmask scan.
inline std::uint64_t golden_words(int n) {
  std::uint64_t count = 0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    if ((m & (m >> 1)) == 0) ++count;
  }
  return count;
}

/// Independent sets of the n-cycle, by bitmask scan.
inline std::uint64_t cycle_independent_sets(int n) {
  std::uint64_t count = 0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    const std::uint64_t rot = ((m >> 1) | ((m & 1) << (n - 1)));
    if ((m & rot) == 0) ++count;
  }
  return count;
}

/// Weighted independent sets of the w x h grid graph: sum of lambda^|I|.
inline double grid_hardcore_partition(int w, int h, double lambda) {
  const int n = w * h;
  double z = 0.0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    bool ok = true;
    int occupied = 0;
    for (int i = 0; i < n && ok; ++i) {
      if (!((m >> i) & 1)) continue;
      ++occupied;
      const int x = i % w, y = i / w;
      if (x + 1 < w && ((m >> (i + 1)) & 1)) ok = false;
      if (y + 1 < h && ((m >> (i + w)) & 1)) ok = false;
    }
    if (ok) z += std::pow(lambda, occupied);
  }
  return z;
}

/// Two-state chain for the hardcore model on Z: p(0->0) = a, p(1->0) = 1.
struct GoldenChain {
  double a;
  double pi0() const { return 1.0 / (2.0 - a); }
  double p(int s, int t) const {
    if (s == 0) return t == 0 ? a : 1.0 - a;
    return t == 0 ? 1.0 : 0.0;
  }
  double cylinder(const std::string& w) const {
    double v = w[0] == '0' ? pi0() : 1.0 - pi0();
    for (std::size_t i = 1; i < w.size(); ++i) v *= p(w[i - 1] - '0', w[i] - '0');
    return v;
  }
  double entropy() const {
    double h = 0.0;
    for (int s = 0; s < 2; ++s) {
      const double ps = s == 0 ? pi0() : 1.0 - pi0();
      for (int t = 0; t < 2; ++t) {
        if (p(s, t) > 0) h -= ps * p(s, t) * std::log(p(s, t));
      }
    }
    return h;
  }
};

/// Gibbs chain of hardcore(lambda) on Z from the 2x2 transfer matrix [[1, 1], [lambda, 0]]
/// acting on column weights: Perron root r = (1 + sqrt(1 + 4 lambda)) / 2, p(0->0) = 1/r.
inline GoldenChain hardcore_chain(double lambda) {
  const double r = (1.0 + std::sqrt(1.0 + 4.0 * lambda)) / 2.0;
  return GoldenChain{1.0 / r};
}

inline double binary_entropy(double p) { return -p * std::log(p) - (1 - p) * std::log(1 - p); }

}  // namespace testing
