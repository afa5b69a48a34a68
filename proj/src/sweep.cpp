#include "cavitypress/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cavitypress/errors.hpp"

namespace cavitypress {

SweepProblem::SweepProblem(int alphabet_size, int variables) : q_(alphabet_size) {
  if (q_ < 1 || q_ > 32) throw PreconditionError("sweep alphabet size must be in [1, 32]");
  const std::uint32_t all = q_ == 32 ? 0xffffffffu : ((1u << q_) - 1u);
  domains_.assign(static_cast<std::size_t>(variables), all);
}

void SweepProblem::restrict_to(int var, std::uint32_t mask) { domains_.at(static_cast<std::size_t>(var)) &= mask; }

void SweepProblem::add(SweepFactor factor) {
  const std::size_t k = factor.vars.size();
  std::size_t expected = 1;
  for (std::size_t i = 0; i < k; ++i) expected *= static_cast<std::size_t>(q_);
  if (factor.weights.size() != expected) throw PreconditionError("sweep factor table has wrong size");
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return factor.vars[a] < factor.vars[b]; });
  for (std::size_t i = 1; i < k; ++i) {
    if (factor.vars[order[i]] == factor.vars[order[i - 1]]) {
      throw PreconditionError("sweep factor repeats a variable");
    }
  }
  if (std::is_sorted(factor.vars.begin(), factor.vars.end())) {
    factors_.push_back(std::move(factor));
    return;
  }
  SweepFactor sorted;
  for (int i : order) sorted.vars.push_back(factor.vars[i]);
  sorted.weights.assign(expected, 0.0);
  std::vector<int> digits(k, 0);
  for (std::size_t code = 0; code < expected; ++code) {
    std::size_t rest = code;
    for (std::size_t i = k; i-- > 0;) {
      digits[i] = static_cast<int>(rest % static_cast<std::size_t>(q_));
      rest /= static_cast<std::size_t>(q_);
    }
    std::size_t target = 0;
    for (std::size_t i = 0; i < k; ++i) target = target * static_cast<std::size_t>(q_) + digits[order[i]];
    sorted.weights[target] = factor.weights[code];
  }
  factors_.push_back(std::move(sorted));
}

bool SweepResult::feasible() const { return std::isfinite(log_z); }

namespace {

struct State {
  std::uint64_t key;
  double weight;
};

int bits_for(int q) {
  int b = 0;
  while ((1 << b) < q) ++b;
  return std::max(b, 1);
}

}  // namespace

SweepResult sweep(const SweepProblem& problem, std::size_t state_budget) {
  const int n = problem.size();
  const int q = problem.alphabet_size();
  const int bits = bits_for(q);
  const int max_slots = 64 / bits;
  const std::uint64_t value_mask = (std::uint64_t{1} << bits) - 1;

  std::vector<int> last_use(static_cast<std::size_t>(n));
  std::iota(last_use.begin(), last_use.end(), 0);
  std::vector<std::vector<int>> closing(static_cast<std::size_t>(n));
  const auto& factors = problem.factors();
  std::vector<double> constant_factor;
  for (std::size_t f = 0; f < factors.size(); ++f) {
    const auto& vars = factors[f].vars;
    if (vars.empty()) {
      constant_factor.push_back(factors[f].weights[0]);
      continue;
    }
    const int top = vars.back();
    closing[static_cast<std::size_t>(top)].push_back(static_cast<int>(f));
    for (int v : vars) last_use[static_cast<std::size_t>(v)] = std::max(last_use[static_cast<std::size_t>(v)], top);
  }

  SweepResult result;
  double log_scale = 0.0;
  for (double c : constant_factor) {
    if (c <= 0.0) {
      result.log_z = -std::numeric_limits<double>::infinity();
      return result;
    }
    log_scale += std::log(c);
  }

  std::vector<int> slot_of(static_cast<std::size_t>(n), -1);
  std::vector<int> free_slots;
  for (int s = max_slots - 1; s >= 0; --s) free_slots.push_back(s);

  std::vector<State> states{{0, 1.0}};
  std::vector<State> next;
  for (int t = 0; t < n; ++t) {
    if (free_slots.empty()) {
      throw ResourceError("sweep frontier exceeds " + std::to_string(max_slots) + " variables");
    }
    const int slot = free_slots.back();
    free_slots.pop_back();
    slot_of[static_cast<std::size_t>(t)] = slot;
    const int shift = slot * bits;

    std::vector<int> allowed;
    for (int s = 0; s < q; ++s) {
      if (problem.domain(t) & (1u << s)) allowed.push_back(s);
    }
    const auto& here = closing[static_cast<std::size_t>(t)];
    std::vector<std::vector<int>> shifts(here.size());
    for (std::size_t i = 0; i < here.size(); ++i) {
      for (int v : factors[static_cast<std::size_t>(here[i])].vars) shifts[i].push_back(slot_of[static_cast<std::size_t>(v)] * bits);
    }

    std::uint64_t clear_mask = 0;
    std::vector<int> released;
    for (int v = 0; v <= t; ++v) {
      if (slot_of[static_cast<std::size_t>(v)] >= 0 && last_use[static_cast<std::size_t>(v)] <= t) {
        clear_mask |= value_mask << (slot_of[static_cast<std::size_t>(v)] * bits);
        released.push_back(v);
      }
    }

    next.clear();
    next.reserve(states.size() * allowed.size());
    for (const auto& st : states) {
      for (int s : allowed) {
        const std::uint64_t key = st.key | (static_cast<std::uint64_t>(s) << shift);
        double w = st.weight;
        for (std::size_t i = 0; i < here.size() && w > 0.0; ++i) {
          std::size_t code = 0;
          for (int sh : shifts[i]) code = code * static_cast<std::size_t>(q) + static_cast<std::size_t>((key >> sh) & value_mask);
          w *= factors[static_cast<std::size_t>(here[i])].weights[code];
        }
        if (w > 0.0) next.push_back(State{key & ~clear_mask, w});
      }
    }
    if (!released.empty()) {
      std::sort(next.begin(), next.end(), [](const State& a, const State& b) { return a.key < b.key; });
      std::size_t out = 0;
      for (std::size_t i = 0; i < next.size();) {
        std::size_t j = i;
        double sum = 0.0;
        while (j < next.size() && next[j].key == next[i].key) sum += next[j++].weight;
        next[out++] = State{next[i].key, sum};
        i = j;
      }
      next.resize(out);
      for (int v : released) {
        free_slots.push_back(slot_of[static_cast<std::size_t>(v)]);
        slot_of[static_cast<std::size_t>(v)] = -1;
      }
      std::sort(free_slots.begin(), free_slots.end(), std::greater<>());
    }
    if (next.empty()) {
      result.log_z = -std::numeric_limits<double>::infinity();
      return result;
    }
    if (next.size() > state_budget) {
      throw ResourceError("sweep state count " + std::to_string(next.size()) + " exceeds budget " +
                          std::to_string(state_budget));
    }
    result.peak_states = std::max(result.peak_states, next.size());
    double peak = 0.0;
    for (const auto& st : next) peak = std::max(peak, st.weight);
    for (auto& st : next) st.weight /= peak;
    log_scale += std::log(peak);
    states.swap(next);
  }
  double total = 0.0;
  for (const auto& st : states) total += st.weight;
  result.log_z = log_scale + std::log(total);
  return result;
}

}  // namespace cavitypress
