#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cavitypress/gibbs.hpp"
#include "cavitypress/group.hpp"
#include "cavitypress/potential.hpp"
#include "cavitypress/subshift.hpp"

namespace cavitypress {

/// Points are written "x,y,..." in the unit coset or "label@x,y,...".
GroupPoint parse_point(const GroupDescriptor& desc, const std::string& text);
std::string format_point_spec(const GroupDescriptor& desc, const GroupPoint& g);

struct ScheduleSpec {
  std::string shape = "centered_boxes";
  int n_max = 8;
  int depth = 8;
  int collar = 0;
  int max_width = 8;
  int margin = 0;
  std::size_t budget = std::size_t{1} << 22;
};

struct MeasureSpec {
  std::string name;
  std::string kind;  // atomic, periodic_orbit, markov, chain, torus, glauber, bracket
  Lattice period{};
  std::vector<Symbol> values;
  std::vector<std::vector<double>> transition;
  Lattice sides{};
  int max_sites = 20;
  int sweeps = 100;
  int samples = 1;
  int thin = 1;
  int radius = 1;
  BracketStrategy strategy = BracketStrategy::automatic;
  std::optional<bool> ergodic;
};

struct RunSpec {
  std::string measure;  // nu
  std::string mu;       // reference Gibbs measure; empty selects a default
  std::optional<double> tolerance;
  std::optional<double> reference;
  std::uint64_t seed = 1;
  std::string out;
  int threads = 1;
};

struct ModelSpec {
  std::string text;  // source text, kept for cache recomputation
  GroupDescriptor group = GroupDescriptor::lattice(1);
  SftSpec sft = SftSpec::full(GroupDescriptor::lattice(1), Alphabet::binary());
  Interaction phi = Interaction::zero(GroupDescriptor::lattice(1), 2);
  ScheduleSpec schedule;
  std::map<std::string, MeasureSpec> measures;
  RunSpec run;
};

/// Parses a YAML model spec. Unknown keys and malformed values raise ParseError with the
/// line and column of the offending node; semantic violations raise PreconditionError.
ModelSpec parse_model_spec(const std::string& text);
ModelSpec load_model_spec(const std::filesystem::path& path);

FolnerSchedule make_schedule(const ScheduleSpec& s);

/// Builds the named measure. `seed` drives samplers.
std::unique_ptr<MeasureOracle> build_measure(const ModelSpec& spec, const MeasureSpec& m, std::uint64_t seed);
std::unique_ptr<MeasureOracle> build_measure(const ModelSpec& spec, const std::string& name, std::uint64_t seed);

/// Binary-tagged CSV for sampled configurations: a "# seed=<u64>" header, a column header, then
/// one row per sample with its period and values as digit strings.
std::string samples_to_csv(const std::vector<PeriodicPoint>& samples, std::uint64_t seed);
std::vector<PeriodicPoint> samples_from_csv(const GroupDescriptor& desc, const std::string& csv,
                                            std::uint64_t* seed = nullptr);

}  // namespace cavitypress
