#include "cavitypress/subshift.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "cavitypress/errors.hpp"
#include "cavitypress/sweep.hpp"

namespace cavitypress {

Alphabet::Alphabet(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
  if (symbols_.empty()) throw PreconditionError("alphabet must be nonempty");
  if (symbols_.size() > 32) throw PreconditionError("alphabet has more than 32 symbols");
  std::set<std::string> seen(symbols_.begin(), symbols_.end());
  if (seen.size() != symbols_.size()) throw PreconditionError("alphabet symbols must be distinct");
}

Symbol Alphabet::index(const std::string& label) const {
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i] == label) return static_cast<Symbol>(i);
  }
  throw PreconditionError("unknown symbol '" + label + "'");
}

Pattern::Pattern(FiniteRegion support, std::vector<Symbol> values)
    : support_(std::move(support)), values_(std::move(values)) {
  if (support_.size() != values_.size()) throw PreconditionError("pattern values do not match its support");
}

Pattern Pattern::from_map(const std::map<GroupPoint, Symbol>& values) {
  std::vector<GroupPoint> pts;
  std::vector<Symbol> vals;
  for (const auto& [g, s] : values) {
    pts.push_back(g);
    vals.push_back(s);
  }
  return Pattern(FiniteRegion(std::move(pts)), std::move(vals));
}

Pattern Pattern::constant(const FiniteRegion& support, Symbol s) {
  return Pattern(support, std::vector<Symbol>(support.size(), s));
}

std::optional<Symbol> Pattern::at(const GroupPoint& g) const {
  const int i = support_.find(g);
  if (i < 0) return std::nullopt;
  return values_[static_cast<std::size_t>(i)];
}

Symbol Pattern::value(const GroupPoint& g) const {
  const int i = support_.find(g);
  if (i < 0) throw PreconditionError("pattern does not cover the requested point");
  return values_[static_cast<std::size_t>(i)];
}

Pattern Pattern::restrict(const FiniteRegion& r) const {
  std::vector<Symbol> vals;
  vals.reserve(r.size());
  for (const auto& g : r) vals.push_back(value(g));
  return Pattern(r, std::move(vals));
}

std::string Pattern::key() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const auto& g = support_.points()[i];
    os << g.coset;
    for (auto c : g.h) os << ',' << c;
    os << '=' << static_cast<int>(values_[i]) << ';';
  }
  return os.str();
}

bool compatible(const Pattern& a, const Pattern& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto v = b.at(a.support().points()[i]);
    if (v && *v != a.values()[i]) return false;
  }
  return true;
}

Pattern concat(const Pattern& a, const Pattern& b) {
  std::map<GroupPoint, Symbol> m;
  for (std::size_t i = 0; i < a.size(); ++i) m[a.support().points()[i]] = a.values()[i];
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto& g = b.support().points()[i];
    auto [it, inserted] = m.emplace(g, b.values()[i]);
    if (!inserted && it->second != b.values()[i]) throw PreconditionError("patterns disagree on their overlap");
  }
  return Pattern::from_map(m);
}

Pattern translate(const GroupDescriptor& desc, const Pattern& p, const GroupPoint& g) {
  const auto ginv = desc.inverse(g);
  std::map<GroupPoint, Symbol> m;
  for (std::size_t i = 0; i < p.size(); ++i) m[desc.multiply(p.support().points()[i], ginv)] = p.values()[i];
  return Pattern::from_map(m);
}

namespace {

std::vector<Placement> collect_placements(const GroupDescriptor& desc, const FiniteRegion& shape,
                                          const FiniteRegion& region, bool require_inside) {
  std::vector<Placement> out;
  std::set<std::vector<GroupPoint>> seen;
  if (shape.empty()) return out;
  const auto anchors = require_inside ? std::vector<GroupPoint>{shape.points()[0]} : shape.points();
  for (const auto& r : region) {
    for (const auto& m : anchors) {
      const auto g = desc.multiply(desc.inverse(m), r);
      Placement pl{g, {}};
      bool inside = true;
      for (const auto& s : shape) {
        pl.sites.push_back(desc.multiply(s, g));
        if (require_inside && !region.contains(pl.sites.back())) {
          inside = false;
          break;
        }
      }
      if (!inside) continue;
      auto key = pl.sites;
      std::sort(key.begin(), key.end());
      if (seen.insert(std::move(key)).second) out.push_back(std::move(pl));
    }
  }
  return out;
}

std::size_t power(int q, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < k; ++i) r *= static_cast<std::size_t>(q);
  return r;
}

}  // namespace

std::vector<Placement> placements_inside(const GroupDescriptor& desc, const FiniteRegion& shape,
                                         const FiniteRegion& region) {
  return collect_placements(desc, shape, region, true);
}

std::vector<Placement> placements_meeting(const GroupDescriptor& desc, const FiniteRegion& shape,
                                          const FiniteRegion& region) {
  return collect_placements(desc, shape, region, false);
}

std::size_t pattern_code(const Pattern& p, const std::vector<GroupPoint>& sites, int q) {
  std::size_t code = 0;
  for (const auto& s : sites) code = code * static_cast<std::size_t>(q) + p.value(s);
  return code;
}

SftSpec::SftSpec(std::string name, GroupDescriptor desc, Alphabet alphabet, std::vector<ForbiddenBlock> blocks)
    : name_(std::move(name)), desc_(std::move(desc)), alphabet_(std::move(alphabet)), blocks_(std::move(blocks)) {
  for (const auto& b : blocks_) {
    if (b.window.empty()) throw PreconditionError("forbidden window must be nonempty");
    if (b.window.size() > 12) throw PreconditionError("forbidden window has more than 12 points");
    if (b.forbidden.size() != power(alphabet_.size(), b.window.size())) {
      throw PreconditionError("forbidden table does not match the window");
    }
  }
}

SftSpec SftSpec::full(const GroupDescriptor& desc, Alphabet alphabet) {
  return SftSpec("full", desc, std::move(alphabet), {});
}

SftSpec SftSpec::golden_mean(const GroupDescriptor& desc, bool include_transversal) {
  std::vector<ForbiddenBlock> blocks;
  std::set<std::vector<GroupPoint>> seen;
  for (const auto& s : desc.generators()) {
    if (s.coset == 0 && lattice_negative(s.h)) continue;
    if (s.coset != 0 && !include_transversal) continue;
    FiniteRegion window({desc.identity(), s});
    if (!seen.insert(window.points()).second) continue;
    // Translates of {e, s^{-1}} coincide with those of {e, s}; keep one direction per pair.
    FiniteRegion mirror = right_translate(desc, window, desc.inverse(s));
    if (seen.count(mirror.points()) && mirror != window) continue;
    seen.insert(mirror.points());
    ForbiddenBlock b{window, std::vector<bool>(4, false)};
    b.forbidden[3] = true;
    blocks.push_back(std::move(b));
  }
  return SftSpec(include_transversal ? "golden_mean" : "golden_mean_layers", desc, Alphabet::binary(),
                 std::move(blocks));
}

SftSpec SftSpec::no01_1d(const GroupDescriptor& desc) {
  FiniteRegion window({desc.identity(), desc.lattice_point(unit_vector(0))});
  ForbiddenBlock b{window, std::vector<bool>(4, false)};
  b.forbidden[1] = true;
  return SftSpec("no01_1d", desc, Alphabet::binary(), {b});
}

SftSpec SftSpec::from_words(std::string name, const GroupDescriptor& desc, Alphabet alphabet,
                            const FiniteRegion& window, const std::vector<std::string>& words) {
  ForbiddenBlock b{window, std::vector<bool>(power(alphabet.size(), window.size()), false)};
  for (const auto& w : words) {
    if (w.size() != window.size()) throw PreconditionError("forbidden word '" + w + "' does not fit the window");
    std::size_t code = 0;
    for (char c : w) code = code * static_cast<std::size_t>(alphabet.size()) + alphabet.index(std::string(1, c));
    b.forbidden[code] = true;
  }
  return SftSpec(std::move(name), desc, std::move(alphabet), {b});
}

int SftSpec::window_diameter() const {
  int d = 1;
  for (const auto& b : blocks_) d = std::max(d, region_diameter(desc_, b.window));
  return d;
}

std::string SftSpec::describe() const {
  std::ostringstream os;
  os << "sft=" << name_ << ";alphabet=";
  for (const auto& s : alphabet_.symbols()) os << s << ",";
  for (const auto& b : blocks_) {
    os << ";window=";
    for (const auto& g : b.window) os << format_point(desc_, g) << ",";
    os << "forbidden=";
    for (std::size_t i = 0; i < b.forbidden.size(); ++i) {
      if (b.forbidden[i]) os << i << ",";
    }
  }
  os << ";group=" << desc_.describe();
  return os.str();
}

bool locally_admissible(const SftSpec& sft, const Pattern& p) {
  const int q = sft.alphabet().size();
  for (const auto& b : sft.blocks()) {
    for (const auto& pl : placements_inside(sft.desc(), b.window, p.support())) {
      if (b.forbidden[pattern_code(p, pl.sites, q)]) return false;
    }
  }
  return true;
}

SiteIndex::SiteIndex(const FiniteRegion& region) : region_(region), order_(raster_sorted(region)) {
  var_of_sorted_.assign(region_.size(), -1);
  for (std::size_t v = 0; v < order_.size(); ++v) var_of_sorted_[static_cast<std::size_t>(region_.find(order_[v]))] = static_cast<int>(v);
}

int SiteIndex::of(const GroupPoint& g) const {
  const int i = region_.find(g);
  return i < 0 ? -1 : var_of_sorted_[static_cast<std::size_t>(i)];
}

void add_window_factors(SweepProblem& problem, const SftSpec& sft, const SiteIndex& index,
                        const FiniteRegion* meeting) {
  for (const auto& b : sft.blocks()) {
    std::vector<double> table(b.forbidden.size());
    for (std::size_t i = 0; i < table.size(); ++i) table[i] = b.forbidden[i] ? 0.0 : 1.0;
    for (const auto& pl : placements_inside(sft.desc(), b.window, index.region())) {
      if (meeting && std::none_of(pl.sites.begin(), pl.sites.end(),
                                  [&](const GroupPoint& s) { return meeting->contains(s); })) {
        continue;
      }
      SweepFactor f;
      for (const auto& s : pl.sites) f.vars.push_back(index.of(s));
      f.weights = table;
      problem.add(std::move(f));
    }
  }
}

void fix_pattern(SweepProblem& problem, const SiteIndex& index, const Pattern& p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    const int v = index.of(p.support().points()[i]);
    if (v < 0) throw PreconditionError("pattern lies outside the sweep region");
    problem.fix(v, p.values()[i]);
  }
}

bool extendable(const SftSpec& sft, const Pattern& p, const FiniteRegion& region, std::size_t state_budget) {
  const auto full = unite(region, p.support());
  SiteIndex index(full);
  SweepProblem problem(sft.alphabet().size(), index.size());
  fix_pattern(problem, index, p);
  add_window_factors(problem, sft, index);
  return sweep(problem, state_budget).feasible();
}

std::vector<Pattern> enumerate_patterns(const SftSpec& sft, const FiniteRegion& t, int collar_radius,
                                        const EnumerationLimits& limits) {
  if (collar_radius < 0) throw PreconditionError("collar radius must be >= 0");
  const int q = sft.alphabet().size();
  const auto& sites = t.points();
  const std::size_t n = sites.size();

  struct Check {
    const ForbiddenBlock* block;
    std::vector<int> positions;
  };
  std::vector<std::vector<Check>> closing(n);
  for (const auto& b : sft.blocks()) {
    for (const auto& pl : placements_inside(sft.desc(), b.window, t)) {
      Check c{&b, {}};
      int last = 0;
      for (const auto& s : pl.sites) {
        c.positions.push_back(t.find(s));
        last = std::max(last, c.positions.back());
      }
      closing[static_cast<std::size_t>(last)].push_back(std::move(c));
    }
  }
  const FiniteRegion outer = collar_radius > 0 ? unite(t, collar(sft.desc(), t, collar_radius)) : t;

  std::vector<Pattern> out;
  std::vector<Symbol> values(n, 0);
  std::function<void(std::size_t)> dfs = [&](std::size_t depth) {
    if (depth == n) {
      Pattern p(t, values);
      if (collar_radius > 0 && !extendable(sft, p, outer, limits.states)) return;
      if (out.size() >= limits.patterns) {
        throw ResourceError("pattern enumeration exceeds budget of " + std::to_string(limits.patterns));
      }
      out.push_back(std::move(p));
      return;
    }
    for (int s = 0; s < q; ++s) {
      values[depth] = static_cast<Symbol>(s);
      bool ok = true;
      for (const auto& c : closing[depth]) {
        std::size_t code = 0;
        for (int pos : c.positions) code = code * static_cast<std::size_t>(q) + values[static_cast<std::size_t>(pos)];
        if (c.block->forbidden[code]) {
          ok = false;
          break;
        }
      }
      if (ok) dfs(depth + 1);
    }
  };
  dfs(0);
  return out;
}

std::optional<Symbol> safe_symbol(const SftSpec& sft) {
  const int q = sft.alphabet().size();
  for (int s0 = 0; s0 < q; ++s0) {
    bool safe = true;
    for (const auto& b : sft.blocks()) {
      const std::size_t k = b.window.size();
      for (std::size_t code = 0; code < b.forbidden.size() && safe; ++code) {
        if (b.forbidden[code]) continue;
        std::size_t place = 1;
        for (std::size_t m = 0; m < k && safe; ++m) {
          const std::size_t digit = (code / place) % static_cast<std::size_t>(q);
          const std::size_t replaced = code - digit * place + static_cast<std::size_t>(s0) * place;
          if (b.forbidden[replaced]) safe = false;
          place *= static_cast<std::size_t>(q);
        }
      }
      if (!safe) break;
    }
    if (safe) return static_cast<Symbol>(s0);
  }
  return std::nullopt;
}

TssmResult tssm_gap_check(const SftSpec& sft, int gap, const FiniteRegion& arena, int collar_radius,
                          std::size_t budget) {
  if (gap < 0) throw PreconditionError("gap must be >= 0");
  TssmResult result;
  result.collar_radius = collar_radius < 0 ? sft.window_diameter() : collar_radius;
  const std::size_t a = arena.size();
  if (a > 16) throw ResourceError("tssm arena larger than 16 points");
  const auto outer = unite(arena, collar(sft.desc(), arena, result.collar_radius));
  EnumerationLimits limits;
  limits.patterns = budget;
  const auto configs = enumerate_patterns(sft, outer, 0, limits);
  std::size_t pairs = 1;
  for (std::size_t i = 0; i < a; ++i) pairs *= 3;
  if (pairs * std::max<std::size_t>(configs.size(), 1) > budget) {
    throw ResourceError("tssm gap check exceeds budget");
  }
  const int q = sft.alphabet().size();
  // values[c][i]: symbol of configuration c at arena point i
  std::vector<std::vector<Symbol>> values;
  for (const auto& c : configs) {
    std::vector<Symbol> row;
    for (const auto& g : arena) row.push_back(c.value(g));
    values.push_back(std::move(row));
  }
  auto project = [&](std::uint32_t mask) {
    std::set<std::uint64_t> codes;
    for (const auto& row : values) {
      std::uint64_t code = 0;
      for (std::size_t i = 0; i < a; ++i) {
        if (mask & (1u << i)) code = code * static_cast<std::uint64_t>(q) + row[i];
      }
      codes.insert(code);
    }
    return codes;
  };
  const std::uint32_t full = a == 0 ? 0 : ((1u << a) - 1u);
  std::vector<std::set<std::uint64_t>> proj(static_cast<std::size_t>(full) + 1);
  for (std::uint32_t m = 1; m <= full; ++m) proj[m] = project(m);
  auto region_of = [&](std::uint32_t mask) {
    std::vector<GroupPoint> pts;
    for (std::size_t i = 0; i < a; ++i) {
      if (mask & (1u << i)) pts.push_back(arena.points()[i]);
    }
    return FiniteRegion(std::move(pts));
  };
  auto decode = [&](std::uint32_t mask, std::uint64_t code) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < a; ++i) {
      if (mask & (1u << i)) idx.push_back(i);
    }
    std::vector<Symbol> vals(idx.size());
    for (std::size_t j = idx.size(); j-- > 0;) {
      vals[j] = static_cast<Symbol>(code % static_cast<std::uint64_t>(q));
      code /= static_cast<std::uint64_t>(q);
    }
    return Pattern(region_of(mask), vals);
  };
  for (std::uint32_t u = 1; u <= full; ++u) {
    const std::uint32_t rest = full & ~u;
    for (std::uint32_t v = rest; v > 0; v = (v - 1) & rest) {
      if (v < u) continue;
      if (region_distance(sft.desc(), region_of(u), region_of(v), gap) < gap) continue;
      ++result.pairs_checked;
      const auto& eu = proj[u];
      const auto& ev = proj[v];
      const auto& euv = proj[u | v];
      if (euv.size() == eu.size() * ev.size()) continue;
      result.passed = false;
      for (auto cu : eu) {
        for (auto cv : ev) {
          const auto pu = decode(u, cu);
          const auto pv = decode(v, cv);
          const auto joint = concat(pu, pv);
          if (!euv.count(pattern_code(joint, joint.support().points(), q))) {
            result.witness = GluingWitness{pu, pv};
            return result;
          }
        }
      }
      return result;
    }
  }
  return result;
}

ConditionDResult condition_d_check(const SftSpec& sft, const FiniteRegion& t, const FiniteRegion& t_hat,
                                   CheckMode mode, std::size_t samples, std::uint64_t seed,
                                   const EnumerationLimits& limits) {
  if (!t_hat.includes(t)) throw PreconditionError("condition (D) needs T inside T_hat");
  ConditionDResult result;
  result.collar_radius = sft.window_diameter();
  const auto outer = collar(sft.desc(), t_hat, result.collar_radius);
  const auto inner = enumerate_patterns(sft, t, result.collar_radius, limits);
  const auto exterior = enumerate_patterns(sft, outer, result.collar_radius, limits);
  const auto safe = safe_symbol(sft);
  if (!safe) result.warning = "no safe symbol: collar radius sufficiency is not established";
  const auto gap = subtract(t_hat, t);
  const auto region = unite(t_hat, outer);

  auto glues = [&](const Pattern& x, const Pattern& y) {
    const auto xy = concat(x, y);
    if (safe) {
      const auto filled = concat(xy, Pattern::constant(gap, *safe));
      if (locally_admissible(sft, filled)) return true;
    }
    return extendable(sft, xy, region, limits.states);
  };
  auto check = [&](const Pattern& x, const Pattern& y) {
    ++result.pairs_checked;
    if (glues(x, y)) return true;
    result.passed = false;
    result.witness = GluingWitness{x, y};
    return false;
  };

  if (inner.empty() || exterior.empty()) return result;
  if (mode == CheckMode::exhaustive) {
    if (inner.size() * exterior.size() > limits.patterns) {
      throw ResourceError("condition (D) pair count exceeds budget");
    }
    for (const auto& x : inner) {
      for (const auto& y : exterior) {
        if (!check(x, y)) return result;
      }
    }
  } else {
    std::mt19937_64 rng(seed);
    for (std::size_t s = 0; s < samples; ++s) {
      const auto& x = inner[rng() % inner.size()];
      const auto& y = exterior[rng() % exterior.size()];
      if (!check(x, y)) return result;
    }
  }
  return result;
}

std::string format_pattern(const SftSpec& sft, const Pattern& p) {
  std::ostringstream os;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) os << " ";
    os << format_point(sft.desc(), p.support().points()[i]) << "=" << sft.alphabet().label(p.values()[i]);
  }
  return os.str();
}

}  // namespace cavitypress
