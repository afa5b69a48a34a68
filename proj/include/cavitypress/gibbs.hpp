#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cavitypress/group.hpp"
#include "cavitypress/numeric.hpp"
#include "cavitypress/potential.hpp"
#include "cavitypress/subshift.hpp"
#include "json.hpp"

namespace cavitypress {

/// A point of S^G that is periodic under a sublattice of H: x(k_c h) = values[c][h mod period].
class PeriodicPoint {
 public:
  PeriodicPoint() = default;
  /// `values` lists the fundamental box [0, period) in lexicographic order, one block per coset.
  PeriodicPoint(const GroupDescriptor& desc, Lattice period, std::vector<Symbol> values);
  static PeriodicPoint constant(const GroupDescriptor& desc, Symbol s);

  int index() const { return index_; }
  int rank() const { return rank_; }
  const Lattice& period() const { return period_; }
  const std::vector<Symbol>& values() const { return values_; }
  /// Number of lattice points in the fundamental box.
  std::size_t box_size() const;
  /// The i-th lattice point of the fundamental box.
  Lattice box_point(std::size_t i) const;

  Symbol at(const GroupPoint& g) const;
  Pattern pattern(const FiniteRegion& r) const;
  /// (g . x) restricted to r, read as x on r g.
  Pattern translated_pattern(const GroupDescriptor& desc, const GroupPoint& g, const FiniteRegion& r) const;

  friend bool operator==(const PeriodicPoint&, const PeriodicPoint&) = default;

 private:
  std::size_t offset(const GroupPoint& g) const;

  int index_ = 1;
  int rank_ = 0;
  Lattice period_{};
  std::vector<Symbol> values_;
};

enum class OracleKind { exact_markov_1d, exact_torus, atomic_point, periodic_orbit, empirical_samples, gibbs_bracket };

std::string to_string(OracleKind kind);

struct WeightedPattern {
  Pattern pattern;
  double weight = 0.0;
};

/// A shift-invariant measure answering cylinder and conditional-cylinder queries.
/// Exact kinds return degenerate intervals.
class MeasureOracle {
 public:
  virtual ~MeasureOracle() = default;

  virtual OracleKind kind() const = 0;
  virtual const GroupDescriptor& desc() const = 0;
  virtual int alphabet_size() const = 0;
  virtual bool exact() const { return true; }
  virtual std::string describe() const = 0;

  bool ergodic() const { return ergodic_; }
  void set_ergodic(bool flag) { ergodic_ = flag; }

  virtual Interval cylinder(const Pattern& p) const = 0;
  /// mu([target] | [given]); throws ZeroProbabilityError when [given] is null.
  virtual Interval conditional(const Pattern& target, const Pattern& given) const;
  /// Patterns on r with positive probability (upper bound positive for interval kinds).
  virtual std::vector<WeightedPattern> marginal(const FiniteRegion& r) const;
  /// Entropy per site of G, when available.
  virtual std::optional<double> entropy_rate() const { return std::nullopt; }

 protected:
  bool ergodic_ = false;
};

/// Stationary Markov measure on S^G for G = K x Z, over the column alphabet S^K.
class MarkovOracle : public MeasureOracle {
 public:
  /// The unique Gibbs measure of a nearest-neighbor model on a rank-1 group.
  static MarkovOracle gibbs(const Interaction& phi, const SftSpec& sft);
  /// A chain given by its column transition matrix; columns are coded by pattern_code over K.
  static MarkovOracle from_chain(const GroupDescriptor& desc, int alphabet_size,
                                 const std::vector<std::vector<double>>& transition);
  static MarkovOracle from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  OracleKind kind() const override { return OracleKind::exact_markov_1d; }
  const GroupDescriptor& desc() const override { return desc_; }
  int alphabet_size() const override { return q_; }
  std::string describe() const override;

  Interval cylinder(const Pattern& p) const override;
  std::optional<double> entropy_rate() const override;

  int columns() const { return static_cast<int>(stationary_.size()); }
  double stationary(int a) const { return stationary_[static_cast<std::size_t>(a)]; }
  double transition(int a, int b) const { return p_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; }
  /// log of the Perron root of the weighted transfer matrix (Gibbs chains only).
  std::optional<double> log_perron_root() const { return log_rho_; }

  /// A path of the chain on [0, length), wrapped periodically outside that range.
  PeriodicPoint sample_path(int length, std::uint64_t seed) const;

 private:
  MarkovOracle(GroupDescriptor desc, int q, std::vector<std::vector<double>> p, std::vector<double> pi,
               std::optional<double> log_rho);

  GroupDescriptor desc_;
  int q_;
  std::vector<std::vector<double>> p_;
  std::vector<double> stationary_;
  std::optional<double> log_rho_;
};

/// A finite mixture of periodic points, optionally averaged over the H-translates in each
/// point's fundamental box. Covers atomic, periodic-orbit, empirical and torus measures.
class PointMixtureOracle : public MeasureOracle {
 public:
  struct Atom {
    PeriodicPoint point;
    double weight = 0.0;
  };

  PointMixtureOracle(OracleKind kind, GroupDescriptor desc, int alphabet_size, std::vector<Atom> atoms,
                     bool average_translates);

  static PointMixtureOracle atomic(const GroupDescriptor& desc, int alphabet_size, const PeriodicPoint& x);
  static PointMixtureOracle periodic_orbit(const GroupDescriptor& desc, int alphabet_size, const PeriodicPoint& x);
  /// Uniform over samples, each averaged over its translates.
  static PointMixtureOracle empirical(const GroupDescriptor& desc, int alphabet_size,
                                      const std::vector<PeriodicPoint>& samples, std::uint64_t seed);

  OracleKind kind() const override { return kind_; }
  const GroupDescriptor& desc() const override { return desc_; }
  int alphabet_size() const override { return q_; }
  std::string describe() const override;

  Interval cylinder(const Pattern& p) const override;
  std::vector<WeightedPattern> marginal(const FiniteRegion& r) const override;
  /// Zero for finite mixtures of periodic points; a plug-in estimate for empirical samples.
  std::optional<double> entropy_rate() const override;

  const std::vector<Atom>& atoms() const { return atoms_; }
  bool average_translates() const { return average_translates_; }
  std::uint64_t seed() const { return seed_; }
  /// Partition function of the torus measure (exact_torus only).
  std::optional<double> log_partition() const { return log_z_; }
  void set_log_partition(double v) { log_z_ = v; }
  void set_seed(std::uint64_t s) { seed_ = s; }

  /// The pattern on r of every atom (and translate, when averaging), with its weight.
  std::vector<WeightedPattern> weighted_views(const FiniteRegion& r) const;

 private:
  OracleKind kind_;
  GroupDescriptor desc_;
  int q_;
  std::vector<Atom> atoms_;
  bool average_translates_;
  std::uint64_t seed_ = 0;
  std::optional<double> log_z_;
};

/// Exact Boltzmann measure on K x (Z^d / sides), as a mixture of periodic points.
PointMixtureOracle exact_torus(const Interaction& phi, const SftSpec& sft, const Lattice& sides,
                               std::size_t max_sites = 20);

struct GlauberOptions {
  Lattice sides{};
  int sweeps = 0;
  int samples = 1;  // one sample after each of the last `samples` blocks of `thin` sweeps
  int thin = 1;
  std::uint64_t seed = 1;
  std::optional<PeriodicPoint> initial;
};

/// Single-site heat bath on the torus, raster proposal order. Starts from the safe symbol
/// unless an initial configuration is given.
std::vector<PeriodicPoint> glauber_samples(const Interaction& phi, const SftSpec& sft, const GlauberOptions& opt);
PointMixtureOracle glauber_sampler(const Interaction& phi, const SftSpec& sft, const GlauberOptions& opt);

/// log Z(T) with free boundary. With collar_radius > 0 only patterns extendable to the collar count.
double log_partition_free(const Interaction& phi, const SftSpec& sft, const FiniteRegion& t, int collar_radius = 0,
                          std::size_t state_budget = std::size_t{1} << 22);

struct BoundaryPartition {
  double z = 0.0;
  double log_z = 0.0;
  bool all_inadmissible = false;
};

/// Z(T | y) with exp(-inf) = 0; y must cover every window and interaction translate meeting T.
BoundaryPartition partition_boundary(const Interaction& phi, const SftSpec& sft, const FiniteRegion& t,
                                     const Pattern& y, std::size_t state_budget = std::size_t{1} << 22);

/// pi^y_T([x_T]).
double specification_prob(const Interaction& phi, const SftSpec& sft, const Pattern& x, const Pattern& y);

enum class BracketStrategy { automatic, exhaustive, monotone };

struct BracketOptions {
  int radius = 1;
  BracketStrategy strategy = BracketStrategy::automatic;
  std::size_t state_budget = std::size_t{1} << 22;
  std::size_t rim_budget = std::size_t{1} << 16;
};

struct Bracket {
  Interval prob;
  BracketStrategy strategy = BracketStrategy::exhaustive;
  std::size_t rims = 0;  // boundary patterns evaluated
};

/// Enclosure of mu([target] | [given]) over all Gibbs measures mu, from the specification on
/// the radius-R neighborhood of the target united with the conditioning region, extremized
/// over locally admissible rim patterns.
Bracket conditional_bracket(const Interaction& phi, const SftSpec& sft, const Pattern& target, const Pattern& given,
                            const BracketOptions& opt);

/// Interval-valued oracle for the Gibbs measures of (sft, phi). Queries are memoized.
class GibbsBracketOracle : public MeasureOracle {
 public:
  GibbsBracketOracle(Interaction phi, SftSpec sft, BracketOptions opt);

  OracleKind kind() const override { return OracleKind::gibbs_bracket; }
  const GroupDescriptor& desc() const override { return sft_.desc(); }
  int alphabet_size() const override { return sft_.alphabet().size(); }
  bool exact() const override { return false; }
  std::string describe() const override;

  Interval cylinder(const Pattern& p) const override;
  Interval conditional(const Pattern& target, const Pattern& given) const override;

  const BracketOptions& options() const { return opt_; }

 private:
  Interaction phi_;
  SftSpec sft_;
  BracketOptions opt_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<std::string, std::string>, Interval> memo_;
};

struct RnBound {
  double value = 0.0;
  double boundary_sup = 0.0;  // sup |E(z_T | z) - E(z_T)|
  double potential_norm = 0.0;
  std::size_t collar_sites = 0;
};

/// |T_hat \ T| (log|S| + 4 ||Phi||) + 2 sup |E(z_T | z) - E(z_T)|.
RnBound rn_bound(const Interaction& phi, const SftSpec& sft, const FiniteRegion& t, const FiniteRegion& t_hat);

struct SandwichResult {
  bool passed = true;
  double max_abs_log = 0.0;    // max |log(mu([x_T]) e^{E(x_T)} Z(T))|
  double max_smb_ratio = 0.0;  // max -log mu([x_T]) / |T|
  std::size_t cylinders = 0;
};

/// Checks e^{-r} <= mu([x_T]) e^{E(x_T)} Z(T) <= e^{r} over globally extendable patterns on T.
SandwichResult sandwich_check(const MeasureOracle& mu, const Interaction& phi, const SftSpec& sft,
                              const FiniteRegion& t, double r, double tol = 1e-9);

}  // namespace cavitypress
