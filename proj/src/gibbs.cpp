#include "cavitypress/gibbs.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <sstream>

#include "cavitypress/errors.hpp"
#include "cavitypress/parallel.hpp"
#include "cavitypress/sweep.hpp"

namespace cavitypress {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t box_count(const Lattice& period, int rank) {
  std::size_t n = 1;
  for (int a = 0; a < rank; ++a) n *= static_cast<std::size_t>(period[a]);
  return n;
}

std::size_t box_offset(const Lattice& period, int rank, const Lattice& h) {
  std::size_t off = 0;
  for (int a = 0; a < rank; ++a) {
    const std::int32_t p = period[a];
    off = off * static_cast<std::size_t>(p) + static_cast<std::size_t>(((h[a] % p) + p) % p);
  }
  return off;
}

Lattice box_decode(const Lattice& period, int rank, std::size_t i) {
  Lattice h{};
  for (int a = rank; a-- > 0;) {
    h[a] = static_cast<std::int32_t>(i % static_cast<std::size_t>(period[a]));
    i /= static_cast<std::size_t>(period[a]);
  }
  return h;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double log_sum_exp(const std::vector<double>& v) {
  double m = -kInf;
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  CompensatedSum s;
  for (double x : v) s.add(std::exp(x - m));
  return m + std::log(s.value());
}

std::size_t ipow(int q, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < k; ++i) r *= static_cast<std::size_t>(q);
  return r;
}

}  // namespace

// ---------------------------------------------------------------- PeriodicPoint

PeriodicPoint::PeriodicPoint(const GroupDescriptor& desc, Lattice period, std::vector<Symbol> values)
    : index_(desc.index()), rank_(desc.rank()), period_(period), values_(std::move(values)) {
  for (int a = 0; a < rank_; ++a) {
    if (period_[a] < 1) throw PreconditionError("periods must be positive");
  }
  for (int a = rank_; a < kMaxRank; ++a) period_[a] = 0;
  if (values_.size() != static_cast<std::size_t>(index_) * box_size()) {
    throw PreconditionError("periodic point has " + std::to_string(values_.size()) + " values, expected " +
                            std::to_string(static_cast<std::size_t>(index_) * box_size()));
  }
}

PeriodicPoint PeriodicPoint::constant(const GroupDescriptor& desc, Symbol s) {
  Lattice period{};
  for (int a = 0; a < desc.rank(); ++a) period[a] = 1;
  return PeriodicPoint(desc, period, std::vector<Symbol>(static_cast<std::size_t>(desc.index()), s));
}

std::size_t PeriodicPoint::box_size() const { return box_count(period_, rank_); }

Lattice PeriodicPoint::box_point(std::size_t i) const { return box_decode(period_, rank_, i); }

std::size_t PeriodicPoint::offset(const GroupPoint& g) const {
  return static_cast<std::size_t>(g.coset) * box_size() + box_offset(period_, rank_, g.h);
}

Symbol PeriodicPoint::at(const GroupPoint& g) const { return values_[offset(g)]; }

Pattern PeriodicPoint::pattern(const FiniteRegion& r) const {
  std::vector<Symbol> v;
  v.reserve(r.size());
  for (const auto& g : r) v.push_back(at(g));
  return Pattern(r, std::move(v));
}

Pattern PeriodicPoint::translated_pattern(const GroupDescriptor& desc, const GroupPoint& g,
                                          const FiniteRegion& r) const {
  std::vector<Symbol> v;
  v.reserve(r.size());
  for (const auto& p : r) v.push_back(at(desc.multiply(p, g)));
  return Pattern(r, std::move(v));
}

std::string to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::exact_markov_1d: return "exact_markov_1d";
    case OracleKind::exact_torus: return "exact_torus";
    case OracleKind::atomic_point: return "atomic_point";
    case OracleKind::periodic_orbit: return "periodic_orbit";
    case OracleKind::empirical_samples: return "empirical_samples";
    case OracleKind::gibbs_bracket: return "gibbs_bracket";
  }
  return "unknown";
}

// ---------------------------------------------------------------- MeasureOracle

Interval MeasureOracle::conditional(const Pattern& target, const Pattern& given) const {
  const Interval g = cylinder(given);
  if (!(g.hi > 0.0)) throw ZeroProbabilityError("conditioning cylinder has probability zero");
  if (!compatible(target, given)) return Interval{0.0, 0.0};
  const Interval j = cylinder(concat(target, given));
  if (exact()) return Interval::point(std::min(1.0, j.lo / g.lo));
  const double lo = j.lo / g.hi;
  const double hi = g.lo > 0.0 ? std::min(1.0, j.hi / g.lo) : 1.0;
  return Interval{std::min(lo, hi), hi};
}

std::vector<WeightedPattern> MeasureOracle::marginal(const FiniteRegion& r) const {
  std::vector<WeightedPattern> out;
  const auto& pts = r.points();
  std::vector<GroupPoint> prefix;
  std::vector<Symbol> values;
  std::function<void(std::size_t)> dfs = [&](std::size_t k) {
    if (k == pts.size()) {
      Pattern p(r, values);
      const Interval c = cylinder(p);
      if (c.hi > 0.0) out.push_back({std::move(p), exact() ? c.lo : c.mid()});
      return;
    }
    prefix.push_back(pts[k]);
    for (int s = 0; s < alphabet_size(); ++s) {
      values.push_back(static_cast<Symbol>(s));
      if (cylinder(Pattern(FiniteRegion(prefix), values)).hi > 0.0) dfs(k + 1);
      values.pop_back();
    }
    prefix.pop_back();
  };
  dfs(0);
  return out;
}

// ---------------------------------------------------------------- MarkovOracle

namespace {

FiniteRegion column_region(const GroupDescriptor& desc, std::int32_t t) {
  std::vector<GroupPoint> pts;
  for (int c = 0; c < desc.index(); ++c) pts.push_back(GroupPoint{c, Lattice{t, 0, 0, 0}});
  return FiniteRegion(std::move(pts));
}

Pattern column_pattern(const GroupDescriptor& desc, int q, std::size_t code, std::int32_t t) {
  const std::size_t k = static_cast<std::size_t>(desc.index());
  std::vector<Symbol> v(k);
  for (std::size_t i = k; i-- > 0;) {
    v[i] = static_cast<Symbol>(code % static_cast<std::size_t>(q));
    code /= static_cast<std::size_t>(q);
  }
  return Pattern(column_region(desc, t), std::move(v));
}

// Strongly connected check on the positive entries among `alive` states.
bool strongly_connected(const std::vector<std::vector<double>>& m, const std::vector<int>& alive) {
  if (alive.empty()) return false;
  auto reach = [&](bool forward) {
    std::vector<char> seen(m.size(), 0);
    std::queue<int> todo;
    todo.push(alive[0]);
    seen[static_cast<std::size_t>(alive[0])] = 1;
    while (!todo.empty()) {
      const int a = todo.front();
      todo.pop();
      for (int b : alive) {
        const double w = forward ? m[a][b] : m[b][a];
        if (w > 0.0 && !seen[static_cast<std::size_t>(b)]) {
          seen[static_cast<std::size_t>(b)] = 1;
          todo.push(b);
        }
      }
    }
    return std::all_of(alive.begin(), alive.end(), [&](int a) { return seen[static_cast<std::size_t>(a)] != 0; });
  };
  return reach(true) && reach(false);
}

struct Perron {
  double rho = 0.0;
  Eigen::VectorXd right;
  Eigen::VectorXd left;
};

Eigen::VectorXd perron_vector(const Eigen::MatrixXd& m, double* root) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw Error("eigensolver failed");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()[i].real() > es.eigenvalues()[best].real()) best = i;
  }
  *root = es.eigenvalues()[best].real();
  Eigen::VectorXd v = es.eigenvectors().col(best).real();
  if (v.sum() < 0) v = -v;
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::max(v[i], 0.0);
  // One power step polishes the eigensolver output.
  Eigen::VectorXd w = m * v;
  if (w.norm() > 0) v = w / *root;
  return v / v.sum();
}

Perron perron(const Eigen::MatrixXd& m) {
  Perron p;
  double r2 = 0.0;
  p.right = perron_vector(m, &p.rho);
  p.left = perron_vector(m.transpose(), &r2);
  return p;
}

nlohmann::json group_to_json(const GroupDescriptor& d) {
  nlohmann::json j;
  j["rank"] = d.rank();
  j["labels"] = d.labels();
  nlohmann::json table = nlohmann::json::array();
  for (int a = 0; a < d.index(); ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (int b = 0; b < d.index(); ++b) {
      const auto& e = d.entry(a, b);
      row.push_back({{"product", e.product}, {"shift", std::vector<int>(e.shift.begin(), e.shift.end())}});
    }
    table.push_back(row);
  }
  j["table"] = table;
  nlohmann::json conj = nlohmann::json::array();
  for (int c = 0; c < d.index(); ++c) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : d.conjugation(c)) rows.push_back(std::vector<int>(r.begin(), r.end()));
    conj.push_back(rows);
  }
  j["conjugation"] = conj;
  j["partition"] = d.partition();
  return j;
}

GroupDescriptor group_from_json(const nlohmann::json& j) {
  std::vector<std::vector<ExtensionEntry>> table;
  for (const auto& row : j.at("table")) {
    std::vector<ExtensionEntry> r;
    for (const auto& e : row) {
      ExtensionEntry x;
      x.product = e.at("product").get<int>();
      const auto s = e.at("shift").get<std::vector<int>>();
      for (std::size_t i = 0; i < s.size() && i < static_cast<std::size_t>(kMaxRank); ++i) x.shift[i] = s[i];
      r.push_back(x);
    }
    table.push_back(std::move(r));
  }
  std::vector<LatticeMap> conj;
  for (const auto& m : j.at("conjugation")) {
    LatticeMap lm{};
    std::size_t i = 0;
    for (const auto& row : m) {
      const auto v = row.get<std::vector<int>>();
      for (std::size_t k = 0; k < v.size() && k < static_cast<std::size_t>(kMaxRank); ++k) lm[i][k] = v[k];
      ++i;
    }
    conj.push_back(lm);
  }
  return GroupDescriptor(j.at("rank").get<int>(), j.at("labels").get<std::vector<std::string>>(), std::move(table),
                         std::move(conj), j.at("partition").get<std::vector<std::vector<int>>>());
}

}  // namespace

MarkovOracle::MarkovOracle(GroupDescriptor desc, int q, std::vector<std::vector<double>> p, std::vector<double> pi,
                           std::optional<double> log_rho)
    : desc_(std::move(desc)), q_(q), p_(std::move(p)), stationary_(std::move(pi)), log_rho_(log_rho) {
  ergodic_ = true;
}

MarkovOracle MarkovOracle::gibbs(const Interaction& phi, const SftSpec& sft) {
  const auto& desc = sft.desc();
  if (desc.rank() != 1) throw PreconditionError("exact Markov measures need a rank-1 lattice");
  if (phi.desc().index() != desc.index() || phi.desc().rank() != desc.rank()) {
    throw PreconditionError("potential and subshift live on different groups");
  }
  const int q = sft.alphabet().size();
  if (phi.alphabet_size() != q) throw PreconditionError("potential and subshift alphabets differ");
  const std::size_t n = ipow(q, static_cast<std::size_t>(desc.index()));
  if (n > 4096) throw ResourceError("column alphabet too large for a transfer matrix: " + std::to_string(n));

  const FiniteRegion col0 = column_region(desc, 0);
  const FiniteRegion two = unite(col0, column_region(desc, 1));
  auto spans_two_columns = [&](const FiniteRegion& shape) {
    for (const auto& pl : placements_meeting(desc, shape, col0)) {
      std::int32_t lo = pl.sites.front().h[0], hi = lo;
      for (const auto& s : pl.sites) {
        lo = std::min(lo, s.h[0]);
        hi = std::max(hi, s.h[0]);
      }
      if (hi - lo > 1) return false;
    }
    return true;
  };
  for (const auto& t : phi.terms()) {
    if (!spans_two_columns(t.shape)) throw PreconditionError("potential is not nearest-neighbor along the lattice");
  }
  for (const auto& b : sft.blocks()) {
    if (!spans_two_columns(b.window)) throw PreconditionError("subshift windows are not nearest-neighbor");
  }

  auto energy_inside = [&](const Pattern& x, const FiniteRegion& region) {
    CompensatedSum s;
    for (std::size_t t = 0; t < phi.terms().size(); ++t) {
      for (const auto& pl : placements_inside(desc, phi.terms()[t].shape, region)) s.add(phi.term_value(t, pl, x));
    }
    return s.value();
  };

  std::vector<int> alive;
  std::vector<double> e1(n, 0.0);
  std::vector<Pattern> cols;
  for (std::size_t a = 0; a < n; ++a) {
    cols.push_back(column_pattern(desc, q, a, 0));
    if (locally_admissible(sft, cols.back())) {
      alive.push_back(static_cast<int>(a));
      e1[a] = energy_inside(cols.back(), col0);
    }
  }
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (int a : alive) {
    for (int b : alive) {
      const Pattern x = concat(cols[static_cast<std::size_t>(a)], column_pattern(desc, q, static_cast<std::size_t>(b), 1));
      if (!locally_admissible(sft, x)) continue;
      m[a][b] = std::exp(-(energy_inside(x, two) - e1[static_cast<std::size_t>(a)]));
    }
  }
  if (!strongly_connected(m, alive)) throw PreconditionError("transfer matrix is reducible");

  const Eigen::Index k = static_cast<Eigen::Index>(alive.size());
  Eigen::MatrixXd mm(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) mm(i, j) = m[alive[i]][alive[j]];
  }
  const Perron pd = perron(mm);
  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
  std::vector<double> pi(n, 0.0);
  double total = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) total += pd.left[i] * pd.right[i];
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto a = static_cast<std::size_t>(alive[i]);
    pi[a] = pd.left[i] * pd.right[i] / total;
    double row = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto b = static_cast<std::size_t>(alive[j]);
      p[a][b] = mm(i, j) * pd.right[j] / (pd.rho * pd.right[i]);
      row += p[a][b];
    }
    for (Eigen::Index j = 0; j < k; ++j) p[a][static_cast<std::size_t>(alive[j])] /= row;
  }
  return MarkovOracle(desc, q, std::move(p), std::move(pi), std::log(pd.rho) / desc.index());
}

MarkovOracle MarkovOracle::from_chain(const GroupDescriptor& desc, int alphabet_size,
                                      const std::vector<std::vector<double>>& transition) {
  if (desc.rank() != 1) throw PreconditionError("exact Markov measures need a rank-1 lattice");
  const std::size_t n = ipow(alphabet_size, static_cast<std::size_t>(desc.index()));
  if (transition.size() != n) throw PreconditionError("transition matrix must have one row per column symbol");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n) + 1, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (transition[i].size() != n) throw PreconditionError("transition matrix must be square");
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (transition[i][j] < 0.0) throw PreconditionError("transition probabilities must be nonnegative");
      row += transition[i][j];
    }
    if (std::fabs(row - 1.0) > 1e-12) throw PreconditionError("transition rows must sum to 1");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = transition[i][j] - (i == j ? 1.0 : 0.0);
    }
  }
  a.row(static_cast<Eigen::Index>(n)).setOnes();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a.topRows(static_cast<Eigen::Index>(n)));
  lu.setThreshold(1e-10);
  if (lu.rank() != static_cast<Eigen::Index>(n) - 1) {
    throw PreconditionError("transition structure does not have a unique stationary law");
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) + 1);
  rhs[static_cast<Eigen::Index>(n)] = 1.0;
  const Eigen::VectorXd sol = a.colPivHouseholderQr().solve(rhs);
  std::vector<double> pi(n);
  for (std::size_t i = 0; i < n; ++i) pi[i] = std::max(0.0, sol[static_cast<Eigen::Index>(i)]);
  double s = 0.0;
  for (double v : pi) s += v;
  for (double& v : pi) v /= s;
  return MarkovOracle(desc, alphabet_size, transition, std::move(pi), std::nullopt);
}

nlohmann::json MarkovOracle::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind());
  j["group"] = group_to_json(desc_);
  j["alphabet_size"] = q_;
  j["transition"] = p_;
  j["stationary"] = stationary_;
  if (log_rho_) j["log_perron_root"] = *log_rho_;
  j["ergodic"] = ergodic_;
  return j;
}

MarkovOracle MarkovOracle::from_json(const nlohmann::json& j) {
  if (j.at("kind").get<std::string>() != "exact_markov_1d") throw PreconditionError("not a Markov oracle document");
  std::optional<double> rho;
  if (j.contains("log_perron_root")) rho = j.at("log_perron_root").get<double>();
  MarkovOracle m(group_from_json(j.at("group")), j.at("alphabet_size").get<int>(),
                 j.at("transition").get<std::vector<std::vector<double>>>(),
                 j.at("stationary").get<std::vector<double>>(), rho);
  m.set_ergodic(j.value("ergodic", true));
  return m;
}

std::string MarkovOracle::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "markov_1d;q=" << q_ << ";index=" << desc_.index() << ";pi=";
  for (double v : stationary_) os << v << ",";
  return os.str();
}

Interval MarkovOracle::cylinder(const Pattern& p) const {
  if (p.empty()) return Interval::point(1.0);
  const std::size_t n = stationary_.size();
  std::map<std::int32_t, std::vector<std::pair<int, Symbol>>> constraints;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& g = p.support().points()[i];
    for (int a = 1; a < kMaxRank; ++a) {
      if (g.h[a] != 0) throw PreconditionError("pattern is not supported on K x Z");
    }
    constraints[g.h[0]].push_back({g.coset, p.values()[i]});
  }
  const std::int32_t t0 = constraints.begin()->first;
  const std::int32_t t1 = constraints.rbegin()->first;
  const int k = desc_.index();
  auto allowed = [&](std::int32_t t, std::size_t code) {
    const auto it = constraints.find(t);
    if (it == constraints.end()) return true;
    for (const auto& [c, s] : it->second) {
      std::size_t v = code;
      for (int i = k - 1; i > c; --i) v /= static_cast<std::size_t>(q_);
      if (static_cast<Symbol>(v % static_cast<std::size_t>(q_)) != s) return false;
    }
    return true;
  };
  std::vector<double> alpha(n, 0.0), next(n);
  for (std::size_t a = 0; a < n; ++a) alpha[a] = allowed(t0, a) ? stationary_[a] : 0.0;
  for (std::int32_t t = t0 + 1; t <= t1; ++t) {
    std::vector<char> ok(n);
    for (std::size_t b = 0; b < n; ++b) ok[b] = allowed(t, b);
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t a = 0; a < n; ++a) {
      if (alpha[a] == 0.0) continue;
      for (std::size_t b = 0; b < n; ++b) {
        if (ok[b]) next[b] += alpha[a] * p_[a][b];
      }
    }
    alpha.swap(next);
  }
  CompensatedSum s;
  for (double v : alpha) s.add(v);
  return Interval::point(std::clamp(s.value(), 0.0, 1.0));
}

std::optional<double> MarkovOracle::entropy_rate() const {
  CompensatedSum s;
  for (std::size_t a = 0; a < stationary_.size(); ++a) {
    for (std::size_t b = 0; b < stationary_.size(); ++b) {
      const double v = p_[a][b];
      if (v > 0.0 && stationary_[a] > 0.0) s.add(-stationary_[a] * v * std::log(v));
    }
  }
  return s.value() / desc_.index();
}

PeriodicPoint MarkovOracle::sample_path(int length, std::uint64_t seed) const {
  if (length < 1) throw PreconditionError("path length must be positive");
  std::mt19937_64 rng(seed);
  auto draw = [&](const std::vector<double>& w) {
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] <= 0.0) continue;
      acc += w[i];
      last = i;
      if (u < acc) return i;
    }
    return last;
  };
  const int k = desc_.index();
  std::vector<Symbol> values(static_cast<std::size_t>(k * length));
  std::size_t state = draw(stationary_);
  for (int t = 0; t < length; ++t) {
    if (t > 0) state = draw(p_[state]);
    std::size_t code = state;
    for (int c = k - 1; c >= 0; --c) {
      values[static_cast<std::size_t>(c * length + t)] = static_cast<Symbol>(code % static_cast<std::size_t>(q_));
      code /= static_cast<std::size_t>(q_);
    }
  }
  return PeriodicPoint(desc_, Lattice{length, 0, 0, 0}, std::move(values));
}

// ---------------------------------------------------------------- PointMixtureOracle

PointMixtureOracle::PointMixtureOracle(OracleKind kind, GroupDescriptor desc, int alphabet_size,
                                       std::vector<Atom> atoms, bool average_translates)
    : kind_(kind), desc_(std::move(desc)), q_(alphabet_size), atoms_(std::move(atoms)),
      average_translates_(average_translates) {
  if (atoms_.empty()) throw PreconditionError("a point mixture needs at least one point");
  double total = 0.0;
  for (const auto& a : atoms_) {
    if (a.weight < 0.0) throw PreconditionError("mixture weights must be nonnegative");
    if (a.point.index() != desc_.index() || a.point.rank() != desc_.rank()) {
      throw PreconditionError("mixture point does not match the group");
    }
    total += a.weight;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw PreconditionError("mixture weights must sum to 1");
}

PointMixtureOracle PointMixtureOracle::atomic(const GroupDescriptor& desc, int alphabet_size, const PeriodicPoint& x) {
  PointMixtureOracle o(OracleKind::atomic_point, desc, alphabet_size, {{x, 1.0}}, false);
  o.set_ergodic(true);
  return o;
}

PointMixtureOracle PointMixtureOracle::periodic_orbit(const GroupDescriptor& desc, int alphabet_size,
                                                      const PeriodicPoint& x) {
  PointMixtureOracle o(OracleKind::periodic_orbit, desc, alphabet_size, {{x, 1.0}}, true);
  o.set_ergodic(true);
  return o;
}

PointMixtureOracle PointMixtureOracle::empirical(const GroupDescriptor& desc, int alphabet_size,
                                                 const std::vector<PeriodicPoint>& samples, std::uint64_t seed) {
  if (samples.empty()) throw PreconditionError("empirical measure needs samples");
  std::vector<Atom> atoms;
  for (const auto& s : samples) atoms.push_back({s, 1.0 / static_cast<double>(samples.size())});
  PointMixtureOracle o(OracleKind::empirical_samples, desc, alphabet_size, std::move(atoms), true);
  o.set_seed(seed);
  return o;
}

std::string PointMixtureOracle::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << to_string(kind_) << ";q=" << q_ << ";atoms=" << atoms_.size() << ";average=" << average_translates_
     << ";seed=" << seed_;
  return os.str();
}

std::vector<WeightedPattern> PointMixtureOracle::weighted_views(const FiniteRegion& r) const {
  std::vector<WeightedPattern> out;
  for (const auto& a : atoms_) {
    if (!average_translates_) {
      out.push_back({a.point.pattern(r), a.weight});
      continue;
    }
    const std::size_t box = a.point.box_size();
    for (std::size_t i = 0; i < box; ++i) {
      out.push_back({a.point.translated_pattern(desc_, GroupPoint{0, a.point.box_point(i)}, r),
                     a.weight / static_cast<double>(box)});
    }
  }
  return out;
}

Interval PointMixtureOracle::cylinder(const Pattern& p) const {
  CompensatedSum s;
  for (const auto& a : atoms_) {
    if (!average_translates_) {
      if (a.point.pattern(p.support()) == p) s.add(a.weight);
      continue;
    }
    const std::size_t box = a.point.box_size();
    std::size_t hits = 0;
    for (std::size_t i = 0; i < box; ++i) {
      const GroupPoint g{0, a.point.box_point(i)};
      bool match = true;
      for (std::size_t k = 0; k < p.size() && match; ++k) {
        match = a.point.at(desc_.multiply(p.support().points()[k], g)) == p.values()[k];
      }
      hits += match ? 1 : 0;
    }
    s.add(a.weight * static_cast<double>(hits) / static_cast<double>(box));
  }
  return Interval::point(std::clamp(s.value(), 0.0, 1.0));
}

std::vector<WeightedPattern> PointMixtureOracle::marginal(const FiniteRegion& r) const {
  std::map<Pattern, CompensatedSum> grouped;
  for (auto& v : weighted_views(r)) grouped[v.pattern].add(v.weight);
  std::vector<WeightedPattern> out;
  for (const auto& [p, w] : grouped) out.push_back({p, w.value()});
  return out;
}

std::optional<double> PointMixtureOracle::entropy_rate() const {
  if (kind_ != OracleKind::empirical_samples) return 0.0;
  // Plug-in conditional block entropy of one column given a depth-3 truncated past.
  const FiniteRegion column = coset_fill(desc_, FiniteRegion({desc_.identity()}));
  std::vector<GroupPoint> past;
  for (const auto& g : ball(desc_, desc_.identity(), 3)) {
    if (lattice_negative(g.h)) past.push_back(g);
  }
  const FiniteRegion c(std::move(past));
  auto block_entropy = [&](const FiniteRegion& r) {
    CompensatedSum s;
    for (const auto& w : marginal(r)) {
      if (w.weight > 0.0) s.add(-w.weight * std::log(w.weight));
    }
    return s.value();
  };
  return (block_entropy(unite(column, c)) - block_entropy(c)) / desc_.index();
}

// ---------------------------------------------------------------- torus helpers

namespace {

struct Torus {
  const GroupDescriptor& desc;
  Lattice sides;
  std::size_t box;

  Torus(const GroupDescriptor& d, const Lattice& s) : desc(d), sides(s), box(box_count(s, d.rank())) {
    for (int a = 0; a < d.rank(); ++a) {
      if (s[a] < 1) throw PreconditionError("torus sides must be positive");
    }
  }
  std::size_t size() const { return box * static_cast<std::size_t>(desc.index()); }
  GroupPoint point(std::size_t i) const {
    return GroupPoint{static_cast<int>(i / box), box_decode(sides, desc.rank(), i % box)};
  }
  int site(const GroupPoint& g) const {
    return static_cast<int>(static_cast<std::size_t>(g.coset) * box + box_offset(sides, desc.rank(), g.h));
  }
  // Site lists of the distinct translates M g, g in K x box, listed in M's sorted order.
  std::vector<std::vector<int>> placements(const FiniteRegion& shape) const {
    std::set<std::vector<GroupPoint>> seen;
    std::vector<std::vector<int>> out;
    for (std::size_t i = 0; i < size(); ++i) {
      const GroupPoint g = point(i);
      std::vector<GroupPoint> pts;
      for (const auto& m : shape) pts.push_back(desc.multiply(m, g));
      std::vector<GroupPoint> key = pts;
      std::sort(key.begin(), key.end());
      if (!seen.insert(key).second) continue;
      std::vector<int> sites;
      for (const auto& p : pts) sites.push_back(site(p));
      out.push_back(std::move(sites));
    }
    return out;
  }
};

std::size_t code_of(const std::vector<int>& sites, const std::vector<Symbol>& x, int q) {
  std::size_t code = 0;
  for (int s : sites) code = code * static_cast<std::size_t>(q) + x[static_cast<std::size_t>(s)];
  return code;
}

struct TorusModel {
  struct Window {
    const std::vector<bool>* forbidden;
    std::vector<int> sites;
  };
  struct Term {
    const std::vector<double>* table;
    std::vector<int> sites;
  };
  std::vector<Window> windows;
  std::vector<Term> terms;

  TorusModel(const Interaction& phi, const SftSpec& sft, const Torus& torus) {
    for (const auto& b : sft.blocks()) {
      for (auto& s : torus.placements(b.window)) windows.push_back({&b.forbidden, std::move(s)});
    }
    for (const auto& t : phi.terms()) {
      for (auto& s : torus.placements(t.shape)) terms.push_back({&t.table, std::move(s)});
    }
  }
};

}  // namespace

PointMixtureOracle exact_torus(const Interaction& phi, const SftSpec& sft, const Lattice& sides,
                               std::size_t max_sites) {
  const auto& desc = sft.desc();
  const Torus torus(desc, sides);
  const std::size_t n = torus.size();
  if (n > max_sites) {
    throw ResourceError("torus has " + std::to_string(n) + " sites, budget is " + std::to_string(max_sites));
  }
  const int q = sft.alphabet().size();
  const TorusModel model(phi, sft, torus);
  // Each check runs once its highest site is assigned.
  std::vector<std::vector<std::size_t>> win_at(n), term_at(n);
  for (std::size_t i = 0; i < model.windows.size(); ++i) {
    const auto& s = model.windows[i].sites;
    win_at[static_cast<std::size_t>(*std::max_element(s.begin(), s.end()))].push_back(i);
  }
  for (std::size_t i = 0; i < model.terms.size(); ++i) {
    const auto& s = model.terms[i].sites;
    term_at[static_cast<std::size_t>(*std::max_element(s.begin(), s.end()))].push_back(i);
  }
  const std::size_t budget = std::size_t{1} << 22;
  std::vector<Symbol> x(n, 0);
  std::vector<std::vector<Symbol>> configs;
  std::vector<double> energies;
  std::function<void(std::size_t, double)> dfs = [&](std::size_t k, double e) {
    if (k == n) {
      if (configs.size() >= budget) throw ResourceError("torus enumeration exceeds budget");
      configs.push_back(x);
      energies.push_back(e);
      return;
    }
    for (int s = 0; s < q; ++s) {
      x[k] = static_cast<Symbol>(s);
      bool ok = true;
      for (std::size_t w : win_at[k]) {
        if ((*model.windows[w].forbidden)[code_of(model.windows[w].sites, x, q)]) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      double de = 0.0;
      for (std::size_t t : term_at[k]) de += (*model.terms[t].table)[code_of(model.terms[t].sites, x, q)];
      dfs(k + 1, e + de);
    }
  };
  dfs(0, 0.0);
  if (configs.empty()) throw ZeroProbabilityError("torus has no admissible configuration");
  std::vector<double> logw;
  for (double e : energies) logw.push_back(-e);
  const double log_z = log_sum_exp(logw);
  std::vector<PointMixtureOracle::Atom> atoms;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    atoms.push_back({PeriodicPoint(desc, sides, configs[i]), std::exp(logw[i] - log_z)});
  }
  // Renormalize the rounding residue so the constructor check is strict.
  double total = 0.0;
  for (const auto& a : atoms) total += a.weight;
  for (auto& a : atoms) a.weight /= total;
  PointMixtureOracle o(OracleKind::exact_torus, desc, q, std::move(atoms), false);
  o.set_log_partition(log_z);
  return o;
}

std::vector<PeriodicPoint> glauber_samples(const Interaction& phi, const SftSpec& sft, const GlauberOptions& opt) {
  const auto& desc = sft.desc();
  const Torus torus(desc, opt.sides);
  const std::size_t n = torus.size();
  const int q = sft.alphabet().size();
  if (opt.sweeps < 0 || opt.samples < 1 || opt.thin < 1) throw PreconditionError("invalid sampler schedule");
  std::vector<Symbol> x;
  if (opt.initial) {
    if (opt.initial->period() != PeriodicPoint(desc, opt.sides, std::vector<Symbol>(n, 0)).period()) {
      throw PreconditionError("initial configuration does not match the torus");
    }
    x = opt.initial->values();
  } else {
    const auto s = safe_symbol(sft);
    if (!s) throw PreconditionError("subshift has no safe symbol; supply an initial configuration");
    x.assign(n, *s);
  }
  const TorusModel model(phi, sft, torus);
  std::vector<std::vector<std::size_t>> win_of(n), term_of(n);
  for (std::size_t i = 0; i < model.windows.size(); ++i) {
    std::set<int> sites(model.windows[i].sites.begin(), model.windows[i].sites.end());
    for (int s : sites) win_of[static_cast<std::size_t>(s)].push_back(i);
  }
  for (std::size_t i = 0; i < model.terms.size(); ++i) {
    std::set<int> sites(model.terms[i].sites.begin(), model.terms[i].sites.end());
    for (int s : sites) term_of[static_cast<std::size_t>(s)].push_back(i);
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return raster_less(torus.point(a), torus.point(b)); });

  std::mt19937_64 rng(opt.seed);
  std::vector<double> logw(static_cast<std::size_t>(q));
  auto sweep_once = [&] {
    for (std::size_t site : order) {
      for (int s = 0; s < q; ++s) {
        x[site] = static_cast<Symbol>(s);
        bool ok = true;
        for (std::size_t w : win_of[site]) {
          if ((*model.windows[w].forbidden)[code_of(model.windows[w].sites, x, q)]) {
            ok = false;
            break;
          }
        }
        double e = 0.0;
        if (ok) {
          for (std::size_t t : term_of[site]) e += (*model.terms[t].table)[code_of(model.terms[t].sites, x, q)];
        }
        logw[static_cast<std::size_t>(s)] = ok ? -e : -kInf;
      }
      const double m = *std::max_element(logw.begin(), logw.end());
      double total = 0.0;
      for (double& w : logw) {
        w = std::isfinite(w) ? std::exp(w - m) : 0.0;
        total += w;
      }
      const double u = uniform01(rng) * total;
      double acc = 0.0;
      int pick = q - 1;
      for (int s = 0; s < q; ++s) {
        acc += logw[static_cast<std::size_t>(s)];
        if (logw[static_cast<std::size_t>(s)] > 0.0 && u < acc) {
          pick = s;
          break;
        }
      }
      while (logw[static_cast<std::size_t>(pick)] == 0.0 && pick > 0) --pick;
      x[site] = static_cast<Symbol>(pick);
    }
  };
  std::vector<PeriodicPoint> out;
  for (int s = 0; s < opt.sweeps; ++s) sweep_once();
  out.emplace_back(desc, opt.sides, x);
  for (int k = 1; k < opt.samples; ++k) {
    for (int s = 0; s < opt.thin; ++s) sweep_once();
    out.emplace_back(desc, opt.sides, x);
  }
  return out;
}

PointMixtureOracle glauber_sampler(const Interaction& phi, const SftSpec& sft, const GlauberOptions& opt) {
  return PointMixtureOracle::empirical(sft.desc(), sft.alphabet().size(), glauber_samples(phi, sft, opt), opt.seed);
}

// ---------------------------------------------------------------- partition functions

double log_partition_free(const Interaction& phi, const SftSpec& sft, const FiniteRegion& t, int collar_radius,
                          std::size_t state_budget) {
  if (t.empty()) return 0.0;
  if (collar_radius > 0) {
    std::vector<double> logw;
    for (const auto& p : enumerate_patterns(sft, t, collar_radius, {state_budget, state_budget})) {
      logw.push_back(-energy(phi, p));
    }
    return log_sum_exp(logw);
  }
  const SiteIndex idx(t);
  SweepProblem problem(sft.alphabet().size(), idx.size());
  add_window_factors(problem, sft, idx);
  add_energy_factors(problem, phi, idx);
  return sweep(problem, state_budget).log_z;
}

namespace {

// Sites outside `w` touched by a window or interaction translate meeting `w`.
FiniteRegion interaction_rim(const Interaction& phi, const SftSpec& sft, const FiniteRegion& w) {
  std::vector<GroupPoint> pts;
  auto collect = [&](const FiniteRegion& shape) {
    for (const auto& pl : placements_meeting(sft.desc(), shape, w)) {
      for (const auto& s : pl.sites) {
        if (!w.contains(s)) pts.push_back(s);
      }
    }
  };
  for (const auto& b : sft.blocks()) collect(b.window);
  for (const auto& t : phi.terms()) collect(t.shape);
  return FiniteRegion(std::move(pts));
}

}  // namespace

BoundaryPartition partition_boundary(const Interaction& phi, const SftSpec& sft, const FiniteRegion& t,
                                     const Pattern& y, std::size_t state_budget) {
  if (!intersect(t, y.support()).empty()) throw PreconditionError("boundary pattern overlaps the volume");
  const FiniteRegion needed = interaction_rim(phi, sft, t);
  if (!y.support().includes(needed)) {
    throw PreconditionError("boundary pattern does not cover the interaction range; required collar radius " +
                            std::to_string(std::max(phi.range(), sft.window_diameter())));
  }
  BoundaryPartition out;
  if (!locally_admissible(sft, y)) {
    out.log_z = -kInf;
    out.all_inadmissible = true;
    return out;
  }
  const SiteIndex idx(unite(t, y.support()));
  SweepProblem problem(sft.alphabet().size(), idx.size());
  add_window_factors(problem, sft, idx, &t);
  add_energy_factors(problem, phi, idx, &t);
  fix_pattern(problem, idx, y);
  out.log_z = sweep(problem, state_budget).log_z;
  out.all_inadmissible = !std::isfinite(out.log_z);
  out.z = std::exp(out.log_z);
  return out;
}

double specification_prob(const Interaction& phi, const SftSpec& sft, const Pattern& x, const Pattern& y) {
  const BoundaryPartition z = partition_boundary(phi, sft, x.support(), y);
  if (z.all_inadmissible) throw ZeroProbabilityError("boundary condition admits no configuration");
  const double e = boundary_energy(phi, sft, x, y);
  if (!std::isfinite(e)) return 0.0;
  return std::exp(-e - z.log_z);
}

// ---------------------------------------------------------------- conditional brackets

namespace {

struct BracketSetup {
  SiteIndex index;
  SweepProblem base;
  SweepProblem with_target;
  FiniteRegion rim;
  FiniteRegion free_target;
};

// Two-coloring that makes every pair factor log-supermodular after flipping one color class.
std::optional<std::vector<int>> monotone_coloring(const SweepProblem& problem) {
  if (problem.alphabet_size() != 2) return std::nullopt;
  std::map<std::pair<int, int>, std::array<double, 4>> pairs;
  for (const auto& f : problem.factors()) {
    if (f.vars.size() > 2) return std::nullopt;
    if (f.vars.size() < 2) continue;
    auto [it, fresh] = pairs.try_emplace({f.vars[0], f.vars[1]}, std::array<double, 4>{1, 1, 1, 1});
    for (int i = 0; i < 4; ++i) it->second[static_cast<std::size_t>(i)] *= f.weights[static_cast<std::size_t>(i)];
  }
  const int n = problem.size();
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(n));
  for (const auto& [vars, w] : pairs) {
    const double a = w[0] * w[3];
    const double b = w[1] * w[2];
    const double scale = std::max(a, b);
    if (std::fabs(a - b) <= 1e-14 * scale) continue;
    const int rel = a > b ? 0 : 1;  // 0: same color, 1: opposite
    adj[static_cast<std::size_t>(vars.first)].push_back({vars.second, rel});
    adj[static_cast<std::size_t>(vars.second)].push_back({vars.first, rel});
  }
  std::vector<int> color(static_cast<std::size_t>(n), -1);
  for (int s = 0; s < n; ++s) {
    if (color[static_cast<std::size_t>(s)] >= 0) continue;
    color[static_cast<std::size_t>(s)] = 0;
    std::queue<int> todo;
    todo.push(s);
    while (!todo.empty()) {
      const int a = todo.front();
      todo.pop();
      for (const auto& [b, rel] : adj[static_cast<std::size_t>(a)]) {
        const int want = color[static_cast<std::size_t>(a)] ^ rel;
        if (color[static_cast<std::size_t>(b)] < 0) {
          color[static_cast<std::size_t>(b)] = want;
          todo.push(b);
        } else if (color[static_cast<std::size_t>(b)] != want) {
          return std::nullopt;
        }
      }
    }
  }
  return color;
}

// log of pi^y(x_target x_given) / pi^y(x_given), or nullopt when pi^y(x_given) = 0.
std::optional<double> log_ratio(const BracketSetup& s, const Pattern& rim, std::size_t budget) {
  SweepProblem den = s.base;
  fix_pattern(den, s.index, rim);
  const double d = sweep(den, budget).log_z;
  if (!std::isfinite(d)) return std::nullopt;
  SweepProblem num = s.with_target;
  fix_pattern(num, s.index, rim);
  return sweep(num, budget).log_z - d;
}

}  // namespace

Bracket conditional_bracket(const Interaction& phi, const SftSpec& sft, const Pattern& target, const Pattern& given,
                            const BracketOptions& opt) {
  const auto& desc = sft.desc();
  if (opt.radius < std::max(phi.range(), 1)) {
    throw PreconditionError("bracket radius must be at least the interaction range");
  }
  Bracket out;
  if (!compatible(target, given)) {
    out.prob = Interval{0.0, 0.0};
    return out;
  }
  const FiniteRegion free_target = subtract(target.support(), given.support());
  if (free_target.empty()) {
    out.prob = Interval{1.0, 1.0};
    return out;
  }
  const FiniteRegion w =
      unite(unite(target.support(), collar(desc, target.support(), opt.radius)), given.support());
  const FiniteRegion rim = interaction_rim(phi, sft, w);
  BracketSetup s{SiteIndex(unite(w, rim)), SweepProblem(sft.alphabet().size(), 0), SweepProblem(1, 0), rim,
                 free_target};
  s.base = SweepProblem(sft.alphabet().size(), s.index.size());
  add_window_factors(s.base, sft, s.index, &w);
  add_energy_factors(s.base, phi, s.index, &w);
  fix_pattern(s.base, s.index, given);
  s.with_target = s.base;
  fix_pattern(s.with_target, s.index, target.restrict(free_target));

  auto finish = [&](double lo, double hi) {
    out.prob = Interval{std::clamp(std::exp(lo), 0.0, 1.0), std::clamp(std::exp(hi), 0.0, 1.0)};
    return out;
  };

  if (rim.empty()) {
    const auto r = log_ratio(s, Pattern(), opt.state_budget);
    if (!r) throw ZeroProbabilityError("conditioning pattern has probability zero");
    out.rims = 1;
    out.strategy = BracketStrategy::exhaustive;
    return finish(*r, *r);
  }

  if (opt.strategy != BracketStrategy::exhaustive) {
    const auto color = monotone_coloring(s.base);
    bool usable = color.has_value();
    int direction = -1;
    if (usable) {
      for (std::size_t i = 0; i < free_target.size() && usable; ++i) {
        const int v = s.index.of(free_target.points()[i]);
        const int d = target.value(free_target.points()[i]) ^ (*color)[static_cast<std::size_t>(v)];
        if (direction < 0) direction = d;
        usable = d == direction;
      }
    }
    if (usable) {
      std::vector<Symbol> low, high;
      for (const auto& g : rim) {
        const int c = (*color)[static_cast<std::size_t>(s.index.of(g))];
        low.push_back(static_cast<Symbol>(c));
        high.push_back(static_cast<Symbol>(1 - c));
      }
      const auto a = log_ratio(s, Pattern(rim, low), opt.state_budget);
      const auto b = log_ratio(s, Pattern(rim, high), opt.state_budget);
      if (a && b) {
        out.rims = 2;
        out.strategy = BracketStrategy::monotone;
        return finish(std::min(*a, *b), std::max(*a, *b));
      }
    }
    if (opt.strategy == BracketStrategy::monotone) {
      throw PreconditionError("monotone bracket does not apply to this model and event");
    }
  }

  const auto rims = enumerate_patterns(sft, rim, 0, {opt.rim_budget, opt.state_budget});
  const auto ratios = parallel_map<std::optional<double>>(
      rims.size(), [&](std::size_t i) { return log_ratio(s, rims[i], opt.state_budget); });
  double lo = kInf, hi = -kInf;
  for (const auto& r : ratios) {
    if (!r) continue;
    lo = std::min(lo, *r);
    hi = std::max(hi, *r);
    ++out.rims;
  }
  if (out.rims == 0) throw ZeroProbabilityError("conditioning pattern has probability zero under every rim");
  out.strategy = BracketStrategy::exhaustive;
  return finish(lo, hi);
}

GibbsBracketOracle::GibbsBracketOracle(Interaction phi, SftSpec sft, BracketOptions opt)
    : phi_(std::move(phi)), sft_(std::move(sft)), opt_(opt) {}

std::string GibbsBracketOracle::describe() const {
  return "gibbs_bracket;" + sft_.describe() + ";" + phi_.describe() + ";radius=" + std::to_string(opt_.radius);
}

Interval GibbsBracketOracle::cylinder(const Pattern& p) const { return conditional(p, Pattern()); }

Interval GibbsBracketOracle::conditional(const Pattern& target, const Pattern& given) const {
  const auto key = std::make_pair(target.key(), given.key());
  {
    std::lock_guard<std::mutex> lock(mu_);
    const auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  const Interval v = conditional_bracket(phi_, sft_, target, given, opt_).prob;
  std::lock_guard<std::mutex> lock(mu_);
  memo_.emplace(key, v);
  return v;
}

// ---------------------------------------------------------------- bounds

RnBound rn_bound(const Interaction& phi, const SftSpec& sft, const FiniteRegion& t, const FiniteRegion& t_hat) {
  if (!t_hat.includes(t)) throw PreconditionError("T_hat must contain T");
  const auto& desc = sft.desc();
  RnBound out;
  out.collar_sites = subtract(t_hat, t).size();
  out.potential_norm = norm(phi);
  struct Straddle {
    std::size_t term;
    Placement pl;
  };
  std::vector<Straddle> straddling;
  std::vector<GroupPoint> pts;
  for (std::size_t k = 0; k < phi.terms().size(); ++k) {
    for (const auto& pl : placements_meeting(desc, phi.terms()[k].shape, t)) {
      if (std::all_of(pl.sites.begin(), pl.sites.end(), [&](const GroupPoint& g) { return t.contains(g); })) continue;
      pts.insert(pts.end(), pl.sites.begin(), pl.sites.end());
      straddling.push_back({k, pl});
    }
  }
  if (!straddling.empty()) {
    for (const auto& z : enumerate_patterns(sft, FiniteRegion(pts), 0)) {
      CompensatedSum s;
      for (const auto& st : straddling) s.add(phi.term_value(st.term, st.pl, z));
      out.boundary_sup = std::max(out.boundary_sup, std::fabs(s.value()));
    }
  }
  out.value = static_cast<double>(out.collar_sites) *
                  (std::log(static_cast<double>(sft.alphabet().size())) + 4.0 * out.potential_norm) +
              2.0 * out.boundary_sup;
  return out;
}

SandwichResult sandwich_check(const MeasureOracle& mu, const Interaction& phi, const SftSpec& sft,
                              const FiniteRegion& t, double r, double tol) {
  SandwichResult out;
  const double log_z = log_partition_free(phi, sft, t);
  for (const auto& p : enumerate_patterns(sft, t, sft.window_diameter())) {
    const double m = mu.cylinder(p).mid();
    ++out.cylinders;
    if (!(m > 0.0)) {
      out.passed = false;
      out.max_abs_log = kInf;
      continue;
    }
    const double v = std::log(m) + energy(phi, p) + log_z;
    out.max_abs_log = std::max(out.max_abs_log, std::fabs(v));
    out.max_smb_ratio = std::max(out.max_smb_ratio, -std::log(m) / static_cast<double>(t.size()));
  }
  out.passed = out.passed && out.max_abs_log <= r + tol;
  return out;
}

}  // namespace cavitypress
