#include "cavitypress/group.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

#include "cavitypress/errors.hpp"

namespace cavitypress {

bool raster_less(const GroupPoint& a, const GroupPoint& b) {
  if (a.h != b.h) return a.h < b.h;
  return a.coset < b.coset;
}

bool lattice_negative(const Lattice& v) {
  for (auto c : v) {
    if (c != 0) return c < 0;
  }
  return false;
}

Lattice lattice_add(const Lattice& a, const Lattice& b) {
  Lattice r{};
  for (int i = 0; i < kMaxRank; ++i) r[i] = a[i] + b[i];
  return r;
}

Lattice lattice_sub(const Lattice& a, const Lattice& b) {
  Lattice r{};
  for (int i = 0; i < kMaxRank; ++i) r[i] = a[i] - b[i];
  return r;
}

Lattice lattice_neg(const Lattice& a) {
  Lattice r{};
  for (int i = 0; i < kMaxRank; ++i) r[i] = -a[i];
  return r;
}

Lattice unit_vector(int axis, int sign) {
  Lattice r{};
  r[axis] = sign;
  return r;
}

LatticeMap identity_map() {
  LatticeMap m{};
  for (int i = 0; i < kMaxRank; ++i) m[i][i] = 1;
  return m;
}

GroupDescriptor::GroupDescriptor(int rank, std::vector<std::string> labels,
                                 std::vector<std::vector<ExtensionEntry>> table,
                                 std::vector<LatticeMap> conjugation,
                                 std::vector<std::vector<int>> partition)
    : rank_(rank),
      labels_(std::move(labels)),
      table_(std::move(table)),
      conj_(std::move(conjugation)),
      partition_(std::move(partition)) {
  if (rank_ < 1 || rank_ > kMaxRank) {
    throw PreconditionError("group rank must be in [1, " + std::to_string(kMaxRank) + "]");
  }
  const int k = static_cast<int>(labels_.size());
  if (k < 1 || k > 8) throw PreconditionError("transversal size must be in [1, 8]");
  if (static_cast<int>(table_.size()) != k) throw PreconditionError("extension table has wrong row count");
  for (const auto& row : table_) {
    if (static_cast<int>(row.size()) != k) throw PreconditionError("extension table has wrong column count");
  }
  if (conj_.empty()) conj_.assign(k, identity_map());
  if (static_cast<int>(conj_.size()) != k) throw PreconditionError("conjugation list has wrong length");
  if (partition_.empty()) {
    partition_.emplace_back(k);
    std::iota(partition_[0].begin(), partition_[0].end(), 0);
  }
  block_of_.assign(k, 0);
  for (std::size_t b = 0; b < partition_.size(); ++b) {
    if (partition_[b].empty()) throw PreconditionError("partition blocks must be nonempty");
    for (int c : partition_[b]) {
      if (c < 0 || c >= k) throw PreconditionError("partition refers to unknown coset");
      if (block_of_[c] != 0) throw PreconditionError("partition blocks overlap");
      block_of_[c] = static_cast<int>(b) + 1;
    }
  }
  for (int c = 0; c < k; ++c) {
    if (block_of_[c] == 0) throw PreconditionError("partition does not cover coset " + labels_[c]);
  }
  validate();

  inverse_label_.assign(k, -1);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (table_[i][j].product == 0) inverse_label_[i] = j;
    }
  }
  for (int a = 0; a < rank_; ++a) {
    generators_.push_back(GroupPoint{0, unit_vector(a, 1)});
    generators_.push_back(GroupPoint{0, unit_vector(a, -1)});
  }
  for (int c = 1; c < k; ++c) {
    GroupPoint g{c, {}};
    generators_.push_back(g);
    generators_.push_back(inverse(g));
  }
  std::sort(generators_.begin(), generators_.end());
  generators_.erase(std::unique(generators_.begin(), generators_.end()), generators_.end());
}

void GroupDescriptor::validate() const {
  const int k = index();
  if (conj_[0] != identity_map()) throw PreconditionError("conjugation by the unit label must be the identity");
  for (int j = 0; j < k; ++j) {
    const auto& left = table_[0][j];
    const auto& right = table_[j][0];
    if (left.product != j || left.shift != Lattice{} || right.product != j || right.shift != Lattice{}) {
      throw PreconditionError("extension table: first label must act as identity");
    }
    for (int i = 0; i < k; ++i) {
      if (table_[i][j].product < 0 || table_[i][j].product >= k) {
        throw PreconditionError("extension table refers to unknown label");
      }
    }
  }
  for (int i = 0; i < k; ++i) {
    bool has_inverse = false;
    for (int j = 0; j < k; ++j) has_inverse = has_inverse || table_[i][j].product == 0;
    if (!has_inverse) throw PreconditionError("label " + labels_[i] + " has no inverse");
  }
  std::vector<GroupPoint> sample;
  for (int c = 0; c < k; ++c) {
    sample.push_back(GroupPoint{c, {}});
    for (int a = 0; a < rank_; ++a) {
      sample.push_back(GroupPoint{c, unit_vector(a, 1)});
      sample.push_back(GroupPoint{c, unit_vector(a, -1)});
    }
  }
  for (const auto& a : sample) {
    for (const auto& b : sample) {
      const auto ab = multiply(a, b);
      for (const auto& c : sample) {
        if (multiply(ab, c) != multiply(a, multiply(b, c))) {
          throw PreconditionError("extension table is not associative");
        }
      }
    }
  }
}

GroupDescriptor GroupDescriptor::lattice(int rank) {
  return GroupDescriptor(rank, {"e"}, {{ExtensionEntry{}}}, {}, {});
}

GroupDescriptor GroupDescriptor::cyclic_extension(int rank, int order, bool split) {
  std::vector<std::string> labels;
  for (int i = 0; i < order; ++i) labels.push_back(i == 0 ? "e" : "k" + std::to_string(i + 1));
  std::vector<std::vector<ExtensionEntry>> table(order, std::vector<ExtensionEntry>(order));
  for (int i = 0; i < order; ++i) {
    for (int j = 0; j < order; ++j) table[i][j].product = (i + j) % order;
  }
  std::vector<std::vector<int>> partition;
  if (split) {
    for (int i = 0; i < order; ++i) partition.push_back({i});
  }
  return GroupDescriptor(rank, labels, table, {}, partition);
}

int GroupDescriptor::label_index(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return static_cast<int>(i);
  }
  throw PreconditionError("unknown transversal label '" + std::string(label) + "'");
}

GroupDescriptor GroupDescriptor::with_partition(std::vector<std::vector<int>> partition) const {
  return GroupDescriptor(rank_, labels_, table_, conj_, std::move(partition));
}

Lattice GroupDescriptor::conjugate(int coset, const Lattice& v) const {
  const auto& m = conj_[coset];
  Lattice r{};
  for (int i = 0; i < rank_; ++i) {
    std::int32_t s = 0;
    for (int j = 0; j < rank_; ++j) s += m[i][j] * v[j];
    r[i] = s;
  }
  return r;
}

GroupPoint GroupDescriptor::multiply(const GroupPoint& a, const GroupPoint& b) const {
  const auto& e = table_[a.coset][b.coset];
  return GroupPoint{e.product, lattice_add(lattice_add(e.shift, conjugate(b.coset, a.h)), b.h)};
}

GroupPoint GroupDescriptor::inverse(const GroupPoint& a) const {
  int j = -1;
  if (!inverse_label_.empty()) {
    j = inverse_label_[a.coset];
  } else {
    for (int c = 0; c < index(); ++c) {
      if (table_[a.coset][c].product == 0) j = c;
    }
  }
  const auto& e = table_[a.coset][j];
  return GroupPoint{j, lattice_neg(lattice_add(e.shift, conjugate(j, a.h)))};
}

std::string GroupDescriptor::describe() const {
  std::ostringstream os;
  os << "rank=" << rank_ << ";index=" << index() << ";labels=";
  for (const auto& l : labels_) os << l << ",";
  os << ";table=";
  for (const auto& row : table_) {
    for (const auto& e : row) {
      os << e.product << ":";
      for (int a = 0; a < rank_; ++a) os << e.shift[a] << ",";
      os << "|";
    }
  }
  os << ";conj=";
  for (const auto& m : conj_) {
    for (int i = 0; i < rank_; ++i) {
      for (int j = 0; j < rank_; ++j) os << m[i][j] << ",";
    }
    os << "|";
  }
  os << ";partition=";
  for (const auto& b : partition_) {
    for (int c : b) os << c << ",";
    os << "|";
  }
  return os.str();
}

FiniteRegion::FiniteRegion(std::vector<GroupPoint> points) : points_(std::move(points)) {
  std::sort(points_.begin(), points_.end());
  points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
}

FiniteRegion FiniteRegion::box(int coset, const Lattice& lo, const Lattice& hi, int rank) {
  std::vector<GroupPoint> pts;
  for (int a = 0; a < rank; ++a) {
    if (hi[a] < lo[a]) return FiniteRegion{};
  }
  Lattice cur = lo;
  while (true) {
    pts.push_back(GroupPoint{coset, cur});
    int a = rank - 1;
    while (a >= 0) {
      if (cur[a] < hi[a]) {
        ++cur[a];
        break;
      }
      cur[a] = lo[a];
      --a;
    }
    if (a < 0) break;
  }
  return FiniteRegion(std::move(pts));
}

bool FiniteRegion::contains(const GroupPoint& g) const {
  return std::binary_search(points_.begin(), points_.end(), g);
}

int FiniteRegion::find(const GroupPoint& g) const {
  auto it = std::lower_bound(points_.begin(), points_.end(), g);
  if (it == points_.end() || *it != g) return -1;
  return static_cast<int>(it - points_.begin());
}

bool FiniteRegion::includes(const FiniteRegion& other) const {
  return std::includes(points_.begin(), points_.end(), other.points_.begin(), other.points_.end());
}

FiniteRegion unite(const FiniteRegion& a, const FiniteRegion& b) {
  std::vector<GroupPoint> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return FiniteRegion(std::move(out));
}

FiniteRegion intersect(const FiniteRegion& a, const FiniteRegion& b) {
  std::vector<GroupPoint> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return FiniteRegion(std::move(out));
}

FiniteRegion subtract(const FiniteRegion& a, const FiniteRegion& b) {
  std::vector<GroupPoint> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return FiniteRegion(std::move(out));
}

FiniteRegion symmetric_difference(const FiniteRegion& a, const FiniteRegion& b) {
  std::vector<GroupPoint> out;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return FiniteRegion(std::move(out));
}

FiniteRegion left_translate(const GroupDescriptor& desc, const GroupPoint& g, const FiniteRegion& r) {
  std::vector<GroupPoint> out;
  out.reserve(r.size());
  for (const auto& p : r) out.push_back(desc.multiply(g, p));
  return FiniteRegion(std::move(out));
}

FiniteRegion right_translate(const GroupDescriptor& desc, const FiniteRegion& r, const GroupPoint& g) {
  std::vector<GroupPoint> out;
  out.reserve(r.size());
  for (const auto& p : r) out.push_back(desc.multiply(p, g));
  return FiniteRegion(std::move(out));
}

FiniteRegion region_inverse(const GroupDescriptor& desc, const FiniteRegion& r) {
  std::vector<GroupPoint> out;
  out.reserve(r.size());
  for (const auto& p : r) out.push_back(desc.inverse(p));
  return FiniteRegion(std::move(out));
}

FiniteRegion region_product(const GroupDescriptor& desc, const FiniteRegion& a, const FiniteRegion& b) {
  std::vector<GroupPoint> out;
  out.reserve(a.size() * b.size());
  for (const auto& p : a) {
    for (const auto& q : b) out.push_back(desc.multiply(p, q));
  }
  return FiniteRegion(std::move(out));
}

FiniteRegion coset_fill(const GroupDescriptor& desc, const FiniteRegion& f) {
  std::vector<GroupPoint> out;
  for (int c = 0; c < desc.index(); ++c) {
    for (const auto& p : f) out.push_back(desc.multiply(GroupPoint{c, {}}, p));
  }
  return FiniteRegion(std::move(out));
}

std::vector<GroupPoint> raster_sorted(const FiniteRegion& r) {
  std::vector<GroupPoint> pts(r.begin(), r.end());
  std::sort(pts.begin(), pts.end(), raster_less);
  return pts;
}

namespace {

// Multi-source BFS; returns points with distance <= radius together with distances.
std::vector<std::pair<GroupPoint, int>> bfs(const GroupDescriptor& desc, const std::vector<GroupPoint>& sources,
                                            int radius) {
  std::set<GroupPoint> seen(sources.begin(), sources.end());
  std::vector<std::pair<GroupPoint, int>> out;
  std::deque<std::pair<GroupPoint, int>> queue;
  for (const auto& s : seen) queue.emplace_back(s, 0);
  while (!queue.empty()) {
    auto [g, d] = queue.front();
    queue.pop_front();
    out.emplace_back(g, d);
    if (d == radius) continue;
    for (const auto& s : desc.generators()) {
      auto nb = desc.multiply(s, g);
      if (seen.insert(nb).second) queue.emplace_back(nb, d + 1);
    }
  }
  return out;
}

}  // namespace

FiniteRegion ball(const GroupDescriptor& desc, const GroupPoint& center, int radius) {
  std::vector<GroupPoint> pts;
  for (const auto& [g, d] : bfs(desc, {center}, radius)) pts.push_back(g);
  return FiniteRegion(std::move(pts));
}

FiniteRegion collar(const GroupDescriptor& desc, const FiniteRegion& r, int radius) {
  std::vector<GroupPoint> pts;
  for (const auto& [g, d] : bfs(desc, r.points(), radius)) {
    if (d > 0) pts.push_back(g);
  }
  return FiniteRegion(std::move(pts));
}

int word_distance(const GroupDescriptor& desc, const GroupPoint& a, const GroupPoint& b, int limit) {
  for (const auto& [g, d] : bfs(desc, {a}, limit)) {
    if (g == b) return d;
  }
  return limit + 1;
}

int region_distance(const GroupDescriptor& desc, const FiniteRegion& a, const FiniteRegion& b, int limit) {
  for (const auto& [g, d] : bfs(desc, a.points(), limit)) {
    if (b.contains(g)) return d;
  }
  return limit + 1;
}

int region_diameter(const GroupDescriptor& desc, const FiniteRegion& r) {
  int best = 0;
  for (const auto& p : r) {
    std::size_t found = 0;
    std::set<GroupPoint> seen{p};
    std::deque<std::pair<GroupPoint, int>> queue{{p, 0}};
    while (!queue.empty() && found < r.size()) {
      auto [g, d] = queue.front();
      queue.pop_front();
      if (r.contains(g)) {
        ++found;
        best = std::max(best, d);
      }
      for (const auto& s : desc.generators()) {
        auto nb = desc.multiply(s, g);
        if (seen.insert(nb).second) queue.emplace_back(nb, d + 1);
      }
    }
  }
  return best;
}

Ratio Ratio::make(std::int64_t num, std::int64_t den) {
  if (den <= 0) throw PreconditionError("ratio denominator must be positive");
  const auto g = std::gcd(num, den);
  if (g == 0) return Ratio{0, 1};
  return Ratio{num / g, den / g};
}

FolnerSchedule FolnerSchedule::centered_boxes() {
  return FolnerSchedule("centered_box", [](int rank, int n) {
    Lattice lo{}, hi{};
    for (int a = 0; a < rank; ++a) {
      lo[a] = -n;
      hi[a] = n;
    }
    return FiniteRegion::box(0, lo, hi, rank);
  });
}

FolnerSchedule FolnerSchedule::corner_boxes() {
  return FolnerSchedule("corner_box", [](int rank, int n) {
    Lattice lo{}, hi{};
    for (int a = 0; a < rank; ++a) hi[a] = n - 1;
    return FiniteRegion::box(0, lo, hi, rank);
  });
}

FolnerSchedule FolnerSchedule::custom(std::string name, Shape shape) {
  return FolnerSchedule(std::move(name), std::move(shape));
}

FiniteRegion FolnerSchedule::core(const GroupDescriptor& desc, int n) const {
  if (n < 1) throw PreconditionError("schedule index must be >= 1");
  auto f = shape_(desc.rank(), n);
  for (const auto& p : f) {
    if (p.coset != 0) throw PreconditionError("schedule shape must lie in H");
  }
  return f;
}

FiniteRegion FolnerSchedule::tiles(const GroupDescriptor& desc, int n) const {
  return coset_fill(desc, core(desc, n));
}

Ratio folner_defect(const GroupDescriptor& desc, const FolnerSchedule& sched, int n, const GroupPoint& g) {
  const auto t = sched.tiles(desc, n);
  const auto diff = symmetric_difference(left_translate(desc, g, t), t);
  return Ratio::make(static_cast<std::int64_t>(diff.size()), static_cast<std::int64_t>(t.size()));
}

Ratio tempered_constant(const GroupDescriptor& desc, const FolnerSchedule& sched, int N) {
  if (N < 2) throw PreconditionError("tempered_constant needs N >= 2");
  Ratio best{0, 1};
  std::vector<FiniteRegion> inverses;
  inverses.push_back(region_inverse(desc, sched.tiles(desc, 1)));
  for (int n = 2; n <= N; ++n) {
    const auto tn = sched.tiles(desc, n);
    FiniteRegion acc;
    for (const auto& inv : inverses) acc = unite(acc, region_product(desc, inv, tn));
    const auto r = Ratio::make(static_cast<std::int64_t>(acc.size()), static_cast<std::int64_t>(tn.size()));
    if (r.num * best.den > best.num * r.den) best = r;
    inverses.push_back(region_inverse(desc, tn));
  }
  return best;
}

FiniteRegion inner_core(const GroupDescriptor& desc, const FiniteRegion& t) {
  std::vector<GroupPoint> out;
  std::set<Lattice> seen;
  for (const auto& p : t) {
    // (c, h) is k_c h, so the candidate H-point is (e, h).
    if (!seen.insert(p.h).second) continue;
    const GroupPoint h{0, p.h};
    bool all = true;
    for (int c = 0; c < desc.index() && all; ++c) all = t.contains(desc.multiply(GroupPoint{c, {}}, h));
    if (all) out.push_back(h);
  }
  return FiniteRegion(std::move(out));
}

bool coset_past_membership(const GroupDescriptor& desc, int i, const GroupPoint& g) {
  if (i < 1 || i > desc.blocks()) throw PreconditionError("block index out of range");
  const int b = desc.block_of(g.coset);
  if (b < i) return true;
  if (b == i) return lattice_negative(g.h);
  return false;
}

namespace {

void require_in_core(const GroupDescriptor& desc, const FolnerSchedule& sched, int n, const GroupPoint& h) {
  if (!sched.core(desc, n).contains(h)) {
    throw PreconditionError("point " + format_point(desc, h) + " is not in F_" + std::to_string(n));
  }
}

}  // namespace

FiniteRegion local_past(const GroupDescriptor& desc, const FolnerSchedule& sched, int n, const GroupPoint& h, int i) {
  require_in_core(desc, sched, n, h);
  const auto shifted = right_translate(desc, sched.tiles(desc, n), desc.inverse(h));
  std::vector<GroupPoint> out;
  for (const auto& p : shifted) {
    if (coset_past_membership(desc, i, p)) out.push_back(p);
  }
  return FiniteRegion(std::move(out));
}

FiniteRegion shrunk_core(const GroupDescriptor& desc, const FolnerSchedule& sched, int n, const FiniteRegion& m) {
  const auto f = sched.core(desc, n);
  const auto t = coset_fill(desc, f);
  std::vector<GroupPoint> out;
  for (const auto& h : f) {
    bool ok = true;
    for (const auto& p : m) {
      if (!t.contains(desc.multiply(p, h))) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(h);
  }
  return FiniteRegion(std::move(out));
}

GammaSchedule gamma_schedule(const GroupDescriptor& desc, const FolnerSchedule& sched,
                             const std::function<FiniteRegion(int j)>& family, int n_max, int horizon, int cap) {
  if (n_max < 1) throw PreconditionError("gamma_schedule needs n_max >= 1");
  if (n_max > cap) throw ResourceError("gamma_schedule: n_max exceeds the threshold scan cap");
  const int top = std::max(n_max, horizon);
  GammaSchedule out;
  out.thresholds.push_back(1);
  auto holds = [&](int j, int n) {
    const auto core = shrunk_core(desc, sched, n, family(j));
    const auto full = sched.core(desc, n);
    // |core| / |full| >= 1 - 1/j  <=>  j |core| >= (j - 1) |full|
    return static_cast<std::int64_t>(j) * static_cast<std::int64_t>(core.size()) >=
           static_cast<std::int64_t>(j - 1) * static_cast<std::int64_t>(full.size());
  };
  for (int j = 2;; ++j) {
    int candidate = out.thresholds.back() + 1;
    bool found = false;
    while (candidate <= n_max) {
      int m = candidate;
      while (m <= top && holds(j, m)) ++m;
      if (m > top) {
        found = true;
        break;
      }
      candidate = m + 1;
    }
    if (!found) break;
    out.thresholds.push_back(candidate);
  }
  out.gamma.assign(static_cast<std::size_t>(n_max), 1);
  for (int n = 1; n <= n_max; ++n) {
    int j = 0;
    while (j < static_cast<int>(out.thresholds.size()) && out.thresholds[j] <= n) ++j;
    out.gamma[n - 1] = j;
  }
  return out;
}

bool directed_leq(const GroupDescriptor& desc, const FolnerSchedule& sched, const DirectedIndex& a,
                  const DirectedIndex& b) {
  require_in_core(desc, sched, a.n, a.h);
  require_in_core(desc, sched, b.n, b.h);
  if (a.n > b.n) return false;
  for (int i = 1; i <= desc.blocks(); ++i) {
    if (!local_past(desc, sched, b.n, b.h, i).includes(local_past(desc, sched, a.n, a.h, i))) return false;
  }
  return true;
}

std::optional<DirectedIndex> directed_upper_bound(const GroupDescriptor& desc, const FolnerSchedule& sched,
                                                  const DirectedIndex& a, const DirectedIndex& b, int n_max) {
  const auto m = unite(right_translate(desc, sched.core(desc, a.n), desc.inverse(a.h)),
                       right_translate(desc, sched.core(desc, b.n), desc.inverse(b.h)));
  for (int n = std::max(a.n, b.n); n <= n_max; ++n) {
    const auto f = sched.core(desc, n);
    for (const auto& h : raster_sorted(f)) {
      bool ok = true;
      for (const auto& p : m) {
        if (!f.contains(desc.multiply(p, h))) {
          ok = false;
          break;
        }
      }
      if (ok) {
        DirectedIndex c{n, h};
        if (directed_leq(desc, sched, a, c) && directed_leq(desc, sched, b, c)) return c;
      }
    }
  }
  return std::nullopt;
}

std::string format_point(const GroupDescriptor& desc, const GroupPoint& g) {
  std::ostringstream os;
  os << desc.labels()[g.coset] << "(";
  for (int a = 0; a < desc.rank(); ++a) {
    if (a) os << ",";
    os << g.h[a];
  }
  os << ")";
  return os.str();
}

}  // namespace cavitypress
