#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "cavitypress/group.hpp"

namespace cavitypress {

using Symbol = std::uint8_t;

class Alphabet {
 public:
  explicit Alphabet(std::vector<std::string> symbols);
  static Alphabet binary() { return Alphabet({"0", "1"}); }

  int size() const { return static_cast<int>(symbols_.size()); }
  const std::string& label(Symbol s) const { return symbols_.at(s); }
  Symbol index(const std::string& label) const;
  const std::vector<std::string>& symbols() const { return symbols_; }

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  std::vector<std::string> symbols_;
};

/// A finitely supported partial configuration; values follow the sorted support.
class Pattern {
 public:
  Pattern() = default;
  Pattern(FiniteRegion support, std::vector<Symbol> values);
  static Pattern from_map(const std::map<GroupPoint, Symbol>& values);
  static Pattern constant(const FiniteRegion& support, Symbol s);

  const FiniteRegion& support() const { return support_; }
  const std::vector<Symbol>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  std::optional<Symbol> at(const GroupPoint& g) const;
  Symbol value(const GroupPoint& g) const;
  /// Restriction to a subset of the support.
  Pattern restrict(const FiniteRegion& r) const;
  /// Canonical text form, used as a map key and in hashes.
  std::string key() const;

  friend bool operator==(const Pattern&, const Pattern&) = default;
  friend bool operator<(const Pattern& a, const Pattern& b) {
    return std::tie(a.support_.points(), a.values_) < std::tie(b.support_.points(), b.values_);
  }

 private:
  FiniteRegion support_;
  std::vector<Symbol> values_;
};

/// Union of two patterns; throws PreconditionError if they disagree on an overlap.
Pattern concat(const Pattern& a, const Pattern& b);
bool compatible(const Pattern& a, const Pattern& b);

/// (g . x)(h) = x(h g): the support moves to supp(p) g^{-1}.
Pattern translate(const GroupDescriptor& desc, const Pattern& p, const GroupPoint& g);

/// A right translate M g of a shape, listed in the order of M's sorted points.
struct Placement {
  GroupPoint offset;
  std::vector<GroupPoint> sites;
};

/// Distinct translates M g contained in `region` (translates equal as sets are listed once).
std::vector<Placement> placements_inside(const GroupDescriptor& desc, const FiniteRegion& shape,
                                         const FiniteRegion& region);
/// Distinct translates M g meeting `region`.
std::vector<Placement> placements_meeting(const GroupDescriptor& desc, const FiniteRegion& shape,
                                          const FiniteRegion& region);
/// Mixed-radix code of the values on `sites`, first site most significant.
std::size_t pattern_code(const Pattern& p, const std::vector<GroupPoint>& sites, int q);

struct ForbiddenBlock {
  FiniteRegion window;
  std::vector<bool> forbidden;  // indexed by pattern_code over the window's sorted points
};

/// A shift of finite type: an alphabet plus forbidden patterns on one or more windows.
class SftSpec {
 public:
  SftSpec(std::string name, GroupDescriptor desc, Alphabet alphabet, std::vector<ForbiddenBlock> blocks);

  static SftSpec full(const GroupDescriptor& desc, Alphabet alphabet);
  /// No two adjacent 1s along each generator direction; transversal directions optional.
  static SftSpec golden_mean(const GroupDescriptor& desc, bool include_transversal = true);
  /// Forbids the word 01 along the first axis.
  static SftSpec no01_1d(const GroupDescriptor& desc);
  /// Forbidden words given as symbol strings over `window` (sorted order).
  static SftSpec from_words(std::string name, const GroupDescriptor& desc, Alphabet alphabet,
                            const FiniteRegion& window, const std::vector<std::string>& words);

  const std::string& name() const { return name_; }
  const GroupDescriptor& desc() const { return desc_; }
  const Alphabet& alphabet() const { return alphabet_; }
  const std::vector<ForbiddenBlock>& blocks() const { return blocks_; }
  /// Largest word diameter over windows (at least 1).
  int window_diameter() const;
  std::string describe() const;

 private:
  std::string name_;
  GroupDescriptor desc_;
  Alphabet alphabet_;
  std::vector<ForbiddenBlock> blocks_;
};

bool locally_admissible(const SftSpec& sft, const Pattern& p);

struct EnumerationLimits {
  std::size_t patterns = std::size_t{1} << 22;
  std::size_t states = std::size_t{1} << 22;
};

/// Locally admissible patterns on T that extend to a locally admissible pattern on T plus its
/// r-collar. Sorted support order, symbols ascending (lexicographic).
std::vector<Pattern> enumerate_patterns(const SftSpec& sft, const FiniteRegion& t, int collar_radius,
                                        const EnumerationLimits& limits = {});

/// True iff some locally admissible pattern on `region` extends p.
bool extendable(const SftSpec& sft, const Pattern& p, const FiniteRegion& region,
                std::size_t state_budget = std::size_t{1} << 22);

std::optional<Symbol> safe_symbol(const SftSpec& sft);

struct GluingWitness {
  Pattern first;
  Pattern second;
};

struct TssmResult {
  bool passed = true;
  int collar_radius = 0;
  std::size_t pairs_checked = 0;
  std::optional<GluingWitness> witness;
};

/// Finite-scale gluing certificate: for all disjoint nonempty U, V inside `arena` at word
/// distance >= gap, every pair of separately extendable patterns glues.
/// Extendability means extension to arena plus a collar (default: window diameter).
TssmResult tssm_gap_check(const SftSpec& sft, int gap, const FiniteRegion& arena, int collar_radius = -1,
                          std::size_t budget = std::size_t{1} << 26);

enum class CheckMode { exhaustive, sampled };

struct ConditionDResult {
  bool passed = true;
  int collar_radius = 0;
  std::size_t pairs_checked = 0;
  std::optional<GluingWitness> witness;  // (x on T, y on the outer collar)
  std::string warning;
};

/// Gluing of interior patterns on T with exterior patterns on the collar outside T_hat.
ConditionDResult condition_d_check(const SftSpec& sft, const FiniteRegion& t, const FiniteRegion& t_hat,
                                   CheckMode mode = CheckMode::exhaustive, std::size_t samples = 1000,
                                   std::uint64_t seed = 1, const EnumerationLimits& limits = {});

std::string format_pattern(const SftSpec& sft, const Pattern& p);

/// Sweep variable layout over a region: variables follow raster order.
class SiteIndex {
 public:
  explicit SiteIndex(const FiniteRegion& region);
  const FiniteRegion& region() const { return region_; }
  const std::vector<GroupPoint>& order() const { return order_; }
  int size() const { return static_cast<int>(order_.size()); }
  /// Variable index of g, or -1.
  int of(const GroupPoint& g) const;

 private:
  FiniteRegion region_;
  std::vector<GroupPoint> order_;
  std::vector<int> var_of_sorted_;
};

class SweepProblem;

/// 0/1 factors for every window translate inside the indexed region; when `meeting` is given
/// only translates meeting it are added.
void add_window_factors(SweepProblem& problem, const SftSpec& sft, const SiteIndex& index,
                        const FiniteRegion* meeting = nullptr);
/// Restricts the variables covered by p to its values.
void fix_pattern(SweepProblem& problem, const SiteIndex& index, const Pattern& p);

}  // namespace cavitypress
