#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cavitypress/gibbs.hpp"
#include "cavitypress/group.hpp"
#include "cavitypress/numeric.hpp"
#include "cavitypress/potential.hpp"
#include "cavitypress/subshift.hpp"

namespace cavitypress {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 14695981039346656037ull);
std::string hex64(std::uint64_t v);
/// Content hash of a model (subshift plus potential).
std::string model_hash(const SftSpec& sft, const Interaction& phi);

struct SeriesPoint {
  int n = 0;
  std::size_t count = 0;  // sites, points or translates behind the entry
  Interval value;
  double stderr_estimate = 0.0;
};

class ConvergenceSeries {
 public:
  ConvergenceSeries() = default;
  ConvergenceSeries(std::string estimator, std::string model_hash, std::string schedule)
      : estimator_(std::move(estimator)), model_hash_(std::move(model_hash)), schedule_(std::move(schedule)) {}

  /// Entries must have strictly increasing n and finite values.
  void add(int n, std::size_t count, Interval value, double stderr_estimate = 0.0);

  const std::string& estimator() const { return estimator_; }
  const std::string& model_hash() const { return model_hash_; }
  const std::string& schedule() const { return schedule_; }
  const std::vector<SeriesPoint>& points() const { return points_; }
  bool empty() const { return points_.empty(); }
  const SeriesPoint& back() const { return points_.back(); }
  /// Largest hi minus smallest lo over the last `tail` entries.
  double tail_spread(std::size_t tail) const;

 private:
  std::string estimator_;
  std::string model_hash_;
  std::string schedule_;
  std::vector<SeriesPoint> points_;
};

/// |T_n|^{-1} log Z(T_n) for n = 1..n_max, checked against log|S| + ||Phi||.
ConvergenceSeries pressure_sequence(const Interaction& phi, const SftSpec& sft, const FolnerSchedule& sched,
                                    int n_max, std::size_t state_budget = std::size_t{1} << 22);

/// Pressure per site of G from the Perron root of the column transfer matrix (rank 1).
double transfer_pressure_1d(const Interaction& phi, const SftSpec& sft);

struct StripWidth {
  int width = 0;
  double free_log_rho = 0.0;      // log Perron root, free rows
  double periodic_log_rho = 0.0;  // log Perron root, rows wrapped mod width
  bool symmetric = false;
};

struct StripResult {
  std::vector<StripWidth> widths;
  ConvergenceSeries free_series;      // free_log_rho / w
  ConvergenceSeries periodic_series;  // periodic_log_rho / w
  /// lo: max over odd m, even p of (f(m+p) - f(m)) / p; hi: min over even w of f_per(w) / w.
  Interval bracket;
  bool certified = false;  // every transfer matrix was symmetric and both bounds exist
};

/// Exact transfer computations on strips Z x [0, w) of a rank-2, index-1 model, w = 1..max_width.
StripResult strip_pressure_2d(const Interaction& phi, const SftSpec& sft, int max_width,
                              std::size_t column_budget = 4096);

/// A local function f(x) = eval(x restricted to support).
struct LocalFunction {
  std::string name;
  FiniteRegion support;
  std::function<double(const Pattern&)> eval;

  static LocalFunction constant(const GroupDescriptor& desc, double c);
  static LocalFunction indicator(const GroupPoint& g, Symbol s);
  /// phi_K(x) = sum over cosets of phi(k_i . x).
  static LocalFunction coset_energy(const Interaction& phi);
  /// phi(k_i . x).
  static LocalFunction coset_energy_at(const Interaction& phi, int coset);
};

struct Estimate {
  double value = 0.0;
  double stderr_estimate = 0.0;
};

/// Integral of f against nu: exact for exact kinds and finite mixtures, with a standard error
/// across samples for empirical measures.
Estimate expectation(const MeasureOracle& nu, const LocalFunction& f);

/// |F_n|^{-1} sum over h in F_n of f(h . x), n = 1..n_max.
ConvergenceSeries ergodic_average(const LocalFunction& f, const PeriodicPoint& x, const GroupDescriptor& desc,
                                  const FolnerSchedule& sched, int n_max);

struct SmbSeries {
  ConvergenceSeries ratio;       // -|T_n|^{-1} log nu([x_{T_n}])
  ConvergenceSeries prediction;  // P - [G:H]^{-1} (ergodic average of phi_K at x); empty without a potential
  std::optional<double> expected_limit;  // P - [G:H]^{-1} E_nu[phi_K] when nu is flagged ergodic
};

/// Throws ZeroProbabilityError naming the first n with a null cylinder.
SmbSeries smb_ratio_series(const MeasureOracle& nu, const PeriodicPoint& x, const FolnerSchedule& sched, int n_max,
                           const Interaction* phi = nullptr, std::optional<double> pressure = std::nullopt);

struct DecompositionResult {
  double total = 0.0;  // -log mu([x_{T_n}])
  double sum = 0.0;    // sum over blocks i and h in F_n of the information terms
  double residual = 0.0;
  std::size_t terms = 0;
};

/// Chain-rule decomposition of -log mu([x_{T_n}]) along the coset partition of `desc`, each
/// term I_mu(L_i | T^-_{n,h}(i)) evaluated at h . x through a translated query.
DecompositionResult decomposition_check(const MeasureOracle& mu, const GroupDescriptor& desc,
                                        const FolnerSchedule& sched, int n, const Pattern& x);

/// L_i as a region: the cosets of block i (1-based) at the identity of H.
FiniteRegion block_region(const GroupDescriptor& desc, int block);
/// Word ball of radius `depth` intersected with the i-th coset past.
FiniteRegion truncated_past(const GroupDescriptor& desc, int block, int depth);

struct ConditioningStep {
  int label = 0;  // depth, or n for directed-index chains
  FiniteRegion region;
};

/// Conditioning regions T^-_{n,h}(i) along a chain in the directed order; throws
/// PreconditionError if consecutive indices are not ordered.
std::vector<ConditioningStep> directed_chain(const GroupDescriptor& desc, const FolnerSchedule& sched, int block,
                                             const std::vector<DirectedIndex>& chain);
std::vector<ConditioningStep> depth_chain(const GroupDescriptor& desc, int block, const std::vector<int>& depths);

struct InformationNet {
  ConvergenceSeries series;  // nu-averaged bracket of I_mu(L_i | region) per step
  double cauchy_defect = 0.0;
  std::size_t skipped = 0;  // nu-points whose conditioning has mu-probability zero
  double skipped_weight = 0.0;
};

/// Averages over nu's marginal on L_i united with each conditioning region.
InformationNet information_net(const MeasureOracle& mu, const MeasureOracle& nu, const GroupDescriptor& desc,
                               int block, const std::vector<ConditioningStep>& steps, std::size_t tail = 3);

struct L1Defect {
  Interval total;  // bracket of the nu-average of |avg_h (I - f)(h . x)|
  Interval core;   // part of the average over h in F_{n,nu}
  Interval tail;   // part over F_n \ F_{n,nu}
  std::size_t core_size = 0;
  std::size_t tail_size = 0;
  double stderr_estimate = 0.0;
};

/// L^1_nu defect of the averaged information against a candidate f_i. The core F_{n,nu} is the
/// shrunk core of the gamma schedule for M_j = Ball(j) in H; pass split = false to skip it.
L1Defect l1_defect(const MeasureOracle& mu, const PointMixtureOracle& nu, const GroupDescriptor& desc,
                   const FolnerSchedule& sched, int block, int n, const LocalFunction& f, bool split = true);

struct CavityOptions {
  int margin = 0;  // bracket radius = depth + margin
  BracketStrategy strategy = BracketStrategy::automatic;
  double tolerance = 1e-6;  // maximal Cauchy defect over the last three depths
  std::size_t state_budget = std::size_t{1} << 22;
};

struct CavityResult {
  std::optional<Interval> value;  // hull over the last three depths; empty when refused
  std::vector<int> depths;
  std::vector<Interval> per_depth;  // full estimate at each depth
  std::vector<Interval> information;  // per block, deepest depth
  double energy_term = 0.0;           // [G:H]^{-1} E_nu[phi_K]
  double cauchy_defect = 0.0;
  std::size_t skipped = 0;
  bool refused() const { return !value.has_value(); }
};

/// [G:H]^{-1} sum_i E_nu[I(L_i | truncated past) + phi_K / l] with Gibbs brackets at depths
/// depth-2, depth-1, depth.
CavityResult cavity_pressure(const Interaction& phi, const SftSpec& sft, const GroupDescriptor& desc,
                             const MeasureOracle& nu, int depth, const CavityOptions& opt = {});

struct VariationalGap {
  double gap = 0.0;
  double entropy = 0.0;
  double energy = 0.0;  // [G:H]^{-1} E_nu[phi_K]
  std::string warning;
};

/// P - (h(nu) + [G:H]^{-1} E_nu[phi_K]).
VariationalGap variational_gap(double pressure, const Interaction& phi, const MeasureOracle& nu);

struct EntropyDecomposition {
  Interval value;
  std::vector<double> blocks;  // H(alpha^{L_i} | truncated past) per block
};

/// [G:H]^{-1} sum_i H_nu(alpha^{L_i} | Ball(depth) in G^-_i), from block entropies.
EntropyDecomposition entropy_decomposition(const MeasureOracle& nu, const GroupDescriptor& desc, int depth);

}  // namespace cavitypress
