#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cavitypress {

inline constexpr int kMaxRank = 4;

using Lattice = std::array<std::int32_t, kMaxRank>;

/// The element k h of G = K H, stored as (transversal index, lattice vector).
/// Coordinates past the rank of H are always zero.
struct GroupPoint {
  int coset = 0;
  Lattice h{};

  friend auto operator<=>(const GroupPoint&, const GroupPoint&) = default;
  friend bool operator==(const GroupPoint&, const GroupPoint&) = default;
};

/// Raster order used by sweeps: lattice vector first (lexicographic), coset second.
bool raster_less(const GroupPoint& a, const GroupPoint& b);

/// Strict lexicographic past of Z^d: the first nonzero coordinate is negative.
bool lattice_negative(const Lattice& v);

Lattice lattice_add(const Lattice& a, const Lattice& b);
Lattice lattice_sub(const Lattice& a, const Lattice& b);
Lattice lattice_neg(const Lattice& a);
Lattice unit_vector(int axis, int sign = 1);

/// k_i k_j = k_m h.
struct ExtensionEntry {
  int product = 0;
  Lattice shift{};
};

/// Integer matrix acting on H: conj(k)(v) = k^{-1} v k, i.e. v k = k conj(k)(v).
using LatticeMap = std::array<std::array<std::int32_t, kMaxRank>, kMaxRank>;

LatticeMap identity_map();

/// A finite extension G = K . Z^d with a coset partition L_1, ..., L_l of K.
class GroupDescriptor {
 public:
  GroupDescriptor(int rank, std::vector<std::string> labels,
                  std::vector<std::vector<ExtensionEntry>> table,
                  std::vector<LatticeMap> conjugation,
                  std::vector<std::vector<int>> partition);

  /// Z^rank, index 1.
  static GroupDescriptor lattice(int rank);
  /// Z^rank x Z/order with partition into singletons when `split` is set,
  /// otherwise a single block.
  static GroupDescriptor cyclic_extension(int rank, int order, bool split = true);

  int rank() const { return rank_; }
  int index() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  int label_index(std::string_view label) const;
  const std::vector<std::vector<int>>& partition() const { return partition_; }
  int blocks() const { return static_cast<int>(partition_.size()); }
  /// 1-based block number containing the coset.
  int block_of(int coset) const { return block_of_[coset]; }
  const ExtensionEntry& entry(int i, int j) const { return table_[i][j]; }
  const LatticeMap& conjugation(int coset) const { return conj_[coset]; }

  GroupDescriptor with_partition(std::vector<std::vector<int>> partition) const;

  GroupPoint identity() const { return GroupPoint{}; }
  GroupPoint lattice_point(const Lattice& h) const { return GroupPoint{0, h}; }
  GroupPoint multiply(const GroupPoint& a, const GroupPoint& b) const;
  GroupPoint inverse(const GroupPoint& a) const;
  Lattice conjugate(int coset, const Lattice& v) const;

  /// Symmetric word-metric generators: +-e_i and the nontrivial labels with their inverses.
  const std::vector<GroupPoint>& generators() const { return generators_; }

  std::string describe() const;

 private:
  void validate() const;

  int rank_;
  std::vector<std::string> labels_;
  std::vector<std::vector<ExtensionEntry>> table_;
  std::vector<LatticeMap> conj_;
  std::vector<std::vector<int>> partition_;
  std::vector<int> block_of_;
  std::vector<int> inverse_label_;
  std::vector<GroupPoint> generators_;
};

/// Finite duplicate-free subset of G, kept sorted.
class FiniteRegion {
 public:
  FiniteRegion() = default;
  explicit FiniteRegion(std::vector<GroupPoint> points);

  /// Lattice box lo <= h <= hi (both inclusive) inside one coset.
  static FiniteRegion box(int coset, const Lattice& lo, const Lattice& hi, int rank);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  bool contains(const GroupPoint& g) const;
  bool includes(const FiniteRegion& other) const;
  const std::vector<GroupPoint>& points() const { return points_; }
  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }
  /// Position in sorted order, or -1.
  int find(const GroupPoint& g) const;

  friend bool operator==(const FiniteRegion&, const FiniteRegion&) = default;

 private:
  std::vector<GroupPoint> points_;
};

FiniteRegion unite(const FiniteRegion& a, const FiniteRegion& b);
FiniteRegion intersect(const FiniteRegion& a, const FiniteRegion& b);
FiniteRegion subtract(const FiniteRegion& a, const FiniteRegion& b);
FiniteRegion symmetric_difference(const FiniteRegion& a, const FiniteRegion& b);

FiniteRegion left_translate(const GroupDescriptor& desc, const GroupPoint& g, const FiniteRegion& r);
FiniteRegion right_translate(const GroupDescriptor& desc, const FiniteRegion& r, const GroupPoint& g);
FiniteRegion region_inverse(const GroupDescriptor& desc, const FiniteRegion& r);
FiniteRegion region_product(const GroupDescriptor& desc, const FiniteRegion& a, const FiniteRegion& b);
/// K F for F inside H.
FiniteRegion coset_fill(const GroupDescriptor& desc, const FiniteRegion& f);

/// Points sorted by raster order.
std::vector<GroupPoint> raster_sorted(const FiniteRegion& r);

/// Word-metric ball around `center`; edges are left multiplications by generators.
FiniteRegion ball(const GroupDescriptor& desc, const GroupPoint& center, int radius);
/// Points outside r within word distance `radius` of r.
FiniteRegion collar(const GroupDescriptor& desc, const FiniteRegion& r, int radius);
/// Word distance between two points (BFS, bounded by `limit`; returns limit+1 when farther).
int word_distance(const GroupDescriptor& desc, const GroupPoint& a, const GroupPoint& b, int limit);
/// Minimum word distance between two regions, capped at limit+1.
int region_distance(const GroupDescriptor& desc, const FiniteRegion& a, const FiniteRegion& b, int limit);
/// Maximum word distance between points of r.
int region_diameter(const GroupDescriptor& desc, const FiniteRegion& r);

/// Reduced nonnegative fraction.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Ratio make(std::int64_t num, std::int64_t den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Ratio&, const Ratio&) = default;
};

/// Rule producing F_n inside H; T_n = K F_n.
class FolnerSchedule {
 public:
  using Shape = std::function<FiniteRegion(int rank, int n)>;

  static FolnerSchedule centered_boxes();
  static FolnerSchedule corner_boxes();
  static FolnerSchedule custom(std::string name, Shape shape);

  const std::string& name() const { return name_; }
  FiniteRegion core(const GroupDescriptor& desc, int n) const;
  FiniteRegion tiles(const GroupDescriptor& desc, int n) const;

 private:
  FolnerSchedule(std::string name, Shape shape) : name_(std::move(name)), shape_(std::move(shape)) {}

  std::string name_;
  Shape shape_;
};

Ratio folner_defect(const GroupDescriptor& desc, const FolnerSchedule& sched, int n, const GroupPoint& g);
Ratio tempered_constant(const GroupDescriptor& desc, const FolnerSchedule& sched, int N);
FiniteRegion inner_core(const GroupDescriptor& desc, const FiniteRegion& t);
/// g in L_i H^- or in K_{i-1} H (i is 1-based).
bool coset_past_membership(const GroupDescriptor& desc, int i, const GroupPoint& g);
/// T_n h^{-1} intersected with the i-th coset past.
FiniteRegion local_past(const GroupDescriptor& desc, const FolnerSchedule& sched, int n, const GroupPoint& h, int i);
/// {h in F_n : M h inside T_n}.
FiniteRegion shrunk_core(const GroupDescriptor& desc, const FolnerSchedule& sched, int n, const FiniteRegion& m);

struct GammaSchedule {
  std::vector<int> thresholds;  // thresholds[j-1] = n(j)
  std::vector<int> gamma;       // gamma[n-1] for n = 1..n_max
  int operator()(int n) const { return gamma.at(static_cast<std::size_t>(n - 1)); }
};

/// Thresholds n(1) = 1 < n(2) < ... taken minimal such that the shrunk-core ratio for M_j
/// stays >= 1 - 1/j on [n(j), max(n_max, horizon)].
GammaSchedule gamma_schedule(const GroupDescriptor& desc, const FolnerSchedule& sched,
                             const std::function<FiniteRegion(int j)>& family, int n_max,
                             int horizon = 0, int cap = 10000);

struct DirectedIndex {
  int n = 1;
  GroupPoint h{};
};

bool directed_leq(const GroupDescriptor& desc, const FolnerSchedule& sched, const DirectedIndex& a,
                  const DirectedIndex& b);
/// First (n, h) in (n, raster) order with M h inside F_n, M = F_{n1} h1^{-1} u F_{n2} h2^{-1}.
std::optional<DirectedIndex> directed_upper_bound(const GroupDescriptor& desc, const FolnerSchedule& sched,
                                                  const DirectedIndex& a, const DirectedIndex& b, int n_max);

std::string format_point(const GroupDescriptor& desc, const GroupPoint& g);

}  // namespace cavitypress
