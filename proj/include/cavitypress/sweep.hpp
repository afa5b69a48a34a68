#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cavitypress {

/// A nonnegative weight table over a few variables. Variables are indices into
/// the problem, the table is row-major with the first listed variable most significant.
struct SweepFactor {
  std::vector<int> vars;
  std::vector<double> weights;
};

/// Sum over assignments of a product of factors, eliminating variables in index order.
/// Each variable ranges over the symbols allowed by its domain mask.
class SweepProblem {
 public:
  SweepProblem(int alphabet_size, int variables);

  int alphabet_size() const { return q_; }
  int size() const { return static_cast<int>(domains_.size()); }
  std::uint32_t domain(int var) const { return domains_[var]; }
  const std::vector<SweepFactor>& factors() const { return factors_; }

  void restrict_to(int var, std::uint32_t mask);
  void fix(int var, int symbol) { restrict_to(var, 1u << symbol); }
  /// Variables may be given in any order; the table is permuted to ascending order.
  void add(SweepFactor factor);

 private:
  int q_;
  std::vector<std::uint32_t> domains_;
  std::vector<SweepFactor> factors_;
};

struct SweepResult {
  double log_z = 0.0;  // -infinity when no assignment has positive weight
  std::size_t peak_states = 0;
  bool feasible() const;
};

SweepResult sweep(const SweepProblem& problem, std::size_t state_budget);

}  // namespace cavitypress
