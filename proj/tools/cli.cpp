#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "cavitypress/cache.hpp"
#include "cavitypress/errors.hpp"
#include "cavitypress/gibbs.hpp"
#include "cavitypress/model_spec.hpp"
#include "cavitypress/parallel.hpp"
#include "cavitypress/pressure.hpp"
#include "json.hpp"

namespace cavitypress::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Flags {
  std::string spec;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::size_t> budget;
  std::optional<double> tol;
  // cache subcommand
  std::string cache_action;
  std::string cache_dir;
  std::int64_t max_age = 30 * 24 * 3600;
  double verify_fraction = 0.01;
};

struct Context {
  ModelSpec spec;
  FolnerSchedule sched = FolnerSchedule::centered_boxes();
  fs::path out_dir;
  std::uint64_t seed = 1;
  std::size_t budget = 0;
  std::optional<double> tol;
  std::string hash;

  double tolerance() const {
    if (!tol) throw PreconditionError("no tolerance given: set run.tolerance or pass --tol");
    return *tol;
  }
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

json jnum(double v) { return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : (v < 0 ? "-inf" : "nan")); }

json interval_json(const Interval& v) { return json{{"lo", jnum(v.lo)}, {"hi", jnum(v.hi)}}; }

json estimate_json(double value, double stderr_estimate) {
  return json{{"value", jnum(value)}, {"stderr", jnum(stderr_estimate)}};
}

json series_json(const ConvergenceSeries& s) {
  json points = json::array();
  for (const auto& p : s.points()) {
    points.push_back(json{{"n", p.n}, {"count", p.count}, {"value", interval_json(p.value)}, {"stderr", jnum(p.stderr_estimate)}});
  }
  return json{{"estimator", s.estimator()}, {"model_hash", s.model_hash()}, {"schedule", s.schedule()}, {"points", points}};
}

class CsvTable {
 public:
  void add(const ConvergenceSeries& s, const std::string& hash) {
    for (const auto& p : s.points()) {
      rows_ << s.estimator() << "," << p.n << "," << p.count << "," << num(p.value.lo) << "," << num(p.value.hi) << ","
            << num(p.stderr_estimate) << "," << hash << "\n";
    }
  }
  std::string str() const { return "series,n,count,lo,hi,stderr,hash\n" + rows_.str(); }

 private:
  std::ostringstream rows_;
};

std::string timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw PreconditionError("cannot write " + p.string());
  out << text;
}

struct Verdict {
  bool pass = true;
  std::string text;
};

int emit(const Context& ctx, const std::string& command, json results, const CsvTable& csv, const Verdict& v,
         std::ostream& out) {
  json doc;
  doc["command"] = command;
  doc["model_hash"] = ctx.hash;
  doc["model"] = json{{"group", ctx.spec.group.describe()}, {"subshift", ctx.spec.sft.describe()},
                      {"potential", ctx.spec.phi.describe()}};
  doc["schedule"] = json{{"shape", ctx.sched.name()},       {"n_max", ctx.spec.schedule.n_max},
                         {"depth", ctx.spec.schedule.depth}, {"collar", ctx.spec.schedule.collar},
                         {"margin", ctx.spec.schedule.margin}, {"max_width", ctx.spec.schedule.max_width}};
  doc["seed"] = ctx.seed;
  doc["budget"] = ctx.budget;
  doc["tolerance"] = ctx.tol ? jnum(*ctx.tol) : json(nullptr);
  doc["results"] = std::move(results);
  doc["verdict"] = v.pass ? "PASS" : "FAIL";
  doc["verdict_detail"] = v.text;
  doc["timestamp"] = timestamp();
  fs::create_directories(ctx.out_dir);
  write_file(ctx.out_dir / (command + ".json"), doc.dump(2) + "\n");
  write_file(ctx.out_dir / (command + ".csv"), csv.str());
  out << (v.pass ? "PASS " : "FAIL ") << command << ": " << v.text << "\n";
  return v.pass ? ok : tolerance;
}

/// Reference pressure: the spec's value, the 1D transfer value, or the 2D strip bracket.
std::optional<Interval> reference_pressure(const Context& ctx, json* info) {
  const auto& spec = ctx.spec;
  if (spec.run.reference) {
    if (info) (*info)["reference_source"] = "spec";
    return Interval::point(*spec.run.reference);
  }
  if (spec.group.rank() == 1) {
    const auto mu = MarkovOracle::gibbs(spec.phi, spec.sft);
    if (info) {
      (*info)["reference_source"] = "transfer";
      (*info)["oracle"] = mu.to_json();
    }
    return Interval::point(*mu.log_perron_root());
  }
  if (spec.group.rank() == 2 && spec.group.index() == 1) {
    const auto strip = strip_pressure_2d(spec.phi, spec.sft, spec.schedule.max_width);
    if (info) {
      (*info)["reference_source"] = "strip";
      (*info)["strip_certified"] = strip.certified;
    }
    return strip.bracket;
  }
  return std::nullopt;
}

double distance_to(const Interval& iv, double v) {
  if (v < iv.lo) return iv.lo - v;
  if (v > iv.hi) return v - iv.hi;
  return 0.0;
}

std::string region_text(const GroupDescriptor& desc, const FiniteRegion& r) {
  std::string s;
  for (const auto& g : r) s += (s.empty() ? "" : ";") + format_point_spec(desc, g);
  return s;
}

FiniteRegion region_from_text(const GroupDescriptor& desc, const std::string& text) {
  std::vector<GroupPoint> pts;
  std::istringstream is(text);
  for (std::string tok; std::getline(is, tok, ';');) {
    if (!tok.empty()) pts.push_back(parse_point(desc, tok));
  }
  return FiniteRegion(std::move(pts));
}

std::unique_ptr<MeasureOracle> reference_mu(const Context& ctx) {
  if (!ctx.spec.run.mu.empty()) return build_measure(ctx.spec, ctx.spec.run.mu, ctx.seed);
  if (ctx.spec.group.rank() == 1) {
    auto mu = std::make_unique<MarkovOracle>(MarkovOracle::gibbs(ctx.spec.phi, ctx.spec.sft));
    mu->set_ergodic(true);
    return mu;
  }
  throw PreconditionError("run.mu must name a reference measure for rank > 1");
}

std::unique_ptr<MeasureOracle> nu_measure(const Context& ctx) {
  if (ctx.spec.run.measure.empty()) throw PreconditionError("run.measure must name the measure nu");
  return build_measure(ctx.spec, ctx.spec.run.measure, ctx.seed);
}

void dump_samples(const Context& ctx, const MeasureOracle& nu, json& results) {
  const auto* mix = dynamic_cast<const PointMixtureOracle*>(&nu);
  if (mix == nullptr || mix->kind() != OracleKind::empirical_samples) return;
  std::vector<PeriodicPoint> pts;
  for (const auto& a : mix->atoms()) pts.push_back(a.point);
  fs::create_directories(ctx.out_dir);
  write_file(ctx.out_dir / "nu_samples.csv", samples_to_csv(pts, mix->seed()));
  results["samples_file"] = "nu_samples.csv";
}

// ---------------------------------------------------------------- subcommands

int cmd_pressure(const Context& ctx, std::ostream& out) {
  const auto& spec = ctx.spec;
  const int n_max = spec.schedule.n_max;
  if (n_max < 1) throw PreconditionError("pressure needs n_max >= 1 (empty schedule)");
  std::optional<ResultCache> cache;
  if (const auto dir = ResultCache::from_environment()) cache.emplace(*dir);
  const double bound = std::log(static_cast<double>(spec.sft.alphabet().size())) + norm(spec.phi);
  ConvergenceSeries series("pressure_sequence", ctx.hash, ctx.sched.name());
  for (int n = 1; n <= n_max; ++n) {
    const FiniteRegion t = ctx.sched.tiles(spec.group, n);
    auto compute = [&] { return log_partition_free(spec.phi, spec.sft, t, spec.schedule.collar, ctx.budget); };
    double log_z = 0.0;
    if (cache) {
      CacheEntry e;
      e.region = region_text(spec.group, t);
      e.key = ResultCache::make_key(spec.sft.describe(), spec.phi.describe(), e.region, spec.schedule.collar);
      e.spec = spec.text;
      e.collar = spec.schedule.collar;
      e.created = static_cast<std::int64_t>(std::time(nullptr));
      log_z = cache->get_or_compute(e, compute);
    } else {
      log_z = compute();
    }
    if (!std::isfinite(log_z)) throw ZeroProbabilityError("no admissible pattern on T_" + std::to_string(n));
    const double v = log_z / static_cast<double>(t.size());
    if (v > bound + 1e-12) throw Error("pressure estimate exceeds log|S| + ||Phi||");
    series.add(n, t.size(), Interval::point(v));
  }
  json results;
  results["series"] = series_json(series);
  results["bound"] = interval_json(Interval{-std::numeric_limits<double>::infinity(), bound});
  CsvTable csv;
  csv.add(series, ctx.hash);
  const auto ref = reference_pressure(ctx, &results);
  const double tol = ctx.tolerance();
  const double last = series.back().value.lo;
  Verdict v;
  if (ref) {
    results["reference"] = interval_json(*ref);
    const double d = distance_to(*ref, last);
    v.pass = d <= tol;
    v.text = "distance from P_" + std::to_string(n_max) + " = " + short_num(last) + " to reference [" + num(ref->lo) +
             ", " + num(ref->hi) + "] is " + short_num(d) + (v.pass ? " <= " : " > ") + "tol " + short_num(tol);
  } else {
    const double spread = series.tail_spread(3);
    v.pass = spread <= tol;
    v.text = "tail spread " + short_num(spread) + (v.pass ? " <= " : " > ") + "tol " + short_num(tol);
  }
  return emit(ctx, "pressure", std::move(results), csv, v, out);
}

int cmd_cavity(const Context& ctx, std::ostream& out) {
  const auto& spec = ctx.spec;
  const auto nu = nu_measure(ctx);
  CavityOptions opt;
  opt.margin = spec.schedule.margin;
  opt.tolerance = ctx.tolerance();
  opt.state_budget = ctx.budget;
  const CavityResult r = cavity_pressure(spec.phi, spec.sft, spec.group, *nu, spec.schedule.depth, opt);
  json results;
  ConvergenceSeries series("cavity_pressure", ctx.hash, "depth");
  for (std::size_t k = 0; k < r.depths.size(); ++k) series.add(r.depths[k], 0, r.per_depth[k]);
  results["series"] = series_json(series);
  results["measure"] = nu->describe();
  results["energy_term"] = interval_json(Interval::point(r.energy_term));
  results["cauchy_defect"] = jnum(r.cauchy_defect);
  results["skipped"] = r.skipped;
  json info = json::array();
  for (const auto& i : r.information) info.push_back(interval_json(i));
  results["information"] = info;
  results["value"] = r.value ? interval_json(*r.value) : json(nullptr);
  dump_samples(ctx, *nu, results);
  CsvTable csv;
  csv.add(series, ctx.hash);
  Verdict v;
  if (r.refused()) {
    v.pass = false;
    v.text = "refused: Cauchy defect " + short_num(r.cauchy_defect) + " > tol " + short_num(opt.tolerance);
  } else {
    const auto ref = reference_pressure(ctx, &results);
    v.text = "interval [" + num(r.value->lo) + ", " + num(r.value->hi) + "], defect " + short_num(r.cauchy_defect) +
             " <= tol " + short_num(opt.tolerance);
    if (ref) {
      results["reference"] = interval_json(*ref);
      const bool meets = r.value->lo - opt.tolerance <= ref->hi && ref->lo <= r.value->hi + opt.tolerance;
      v.pass = meets;
      v.text += meets ? ", meets reference" : ", misses reference [" + num(ref->lo) + ", " + num(ref->hi) + "]";
    }
  }
  return emit(ctx, "cavity", std::move(results), csv, v, out);
}

const PointMixtureOracle& as_mixture(const MeasureOracle& nu) {
  const auto* mix = dynamic_cast<const PointMixtureOracle*>(&nu);
  if (mix == nullptr) throw PreconditionError("nu must be a point mixture (atomic, periodic, torus or glauber)");
  return *mix;
}

int cmd_smb(const Context& ctx, std::ostream& out) {
  const auto& spec = ctx.spec;
  const auto mu = reference_mu(ctx);
  const auto nu = nu_measure(ctx);
  const auto& mix = as_mixture(*nu);
  const PeriodicPoint& x = mix.atoms().front().point;
  json results;
  const auto ref = reference_pressure(ctx, &results);
  if (!ref) throw PreconditionError("smb needs a reference pressure (run.reference)");
  const double p = ref->mid();
  const int n_max = spec.schedule.n_max;
  const SmbSeries smb = smb_ratio_series(*mu, x, ctx.sched, n_max, &spec.phi, p);
  const auto phi_k = LocalFunction::coset_energy(spec.phi);
  const ConvergenceSeries avg = ergodic_average(phi_k, x, spec.group, ctx.sched, n_max);
  ConvergenceSeries gap_series("smb_minus_prediction", ctx.hash, ctx.sched.name());
  for (std::size_t k = 0; k < smb.ratio.points().size(); ++k) {
    const auto& a = smb.ratio.points()[k];
    const auto& b = smb.prediction.points()[k];
    gap_series.add(a.n, a.count, (a.value + b.value * -1.0).abs());
  }
  // Candidate limits f_i: the information each block carries at the reference pressure.
  const double e_phi = expectation(mix, phi_k).value;
  const double f_const = (spec.group.index() * p - e_phi) / spec.group.blocks();
  ConvergenceSeries l1("l1_defect", ctx.hash, ctx.sched.name());
  for (int n = 1; n <= n_max; ++n) {
    Interval total{0.0, 0.0};
    double se = 0.0;
    std::size_t count = 0;
    for (int i = 1; i <= spec.group.blocks(); ++i) {
      const L1Defect d = l1_defect(*mu, mix, spec.group, ctx.sched, i, n,
                                   LocalFunction::constant(spec.group, f_const), false);
      total = total + d.total;
      se += d.stderr_estimate;
      count += d.core_size + d.tail_size;
    }
    l1.add(n, count, total, se);
  }
  results["measure"] = nu->describe();
  results["mu"] = mu->describe();
  results["smb_ratio"] = series_json(smb.ratio);
  results["prediction"] = series_json(smb.prediction);
  results["smb_minus_prediction"] = series_json(gap_series);
  results["ergodic_average_phi_K"] = series_json(avg);
  results["l1_defect"] = series_json(l1);
  results["expected_limit"] = smb.expected_limit ? interval_json(Interval::point(*smb.expected_limit)) : json(nullptr);
  dump_samples(ctx, *nu, results);
  CsvTable csv;
  csv.add(smb.ratio, ctx.hash);
  csv.add(smb.prediction, ctx.hash);
  csv.add(gap_series, ctx.hash);
  csv.add(avg, ctx.hash);
  csv.add(l1, ctx.hash);
  const double tol = ctx.tolerance();
  const double d = gap_series.back().value.hi;
  Verdict v;
  v.pass = d <= tol;
  v.text = "|SMB - prediction| at n=" + std::to_string(n_max) + " is " + short_num(d) + (v.pass ? " <= " : " > ") +
           "tol " + short_num(tol);
  return emit(ctx, "smb", std::move(results), csv, v, out);
}

int cmd_decompose(const Context& ctx, std::ostream& out) {
  const auto& spec = ctx.spec;
  const auto mu = reference_mu(ctx);
  if (spec.schedule.n_max < 1) throw PreconditionError("decompose needs n_max >= 1 (empty schedule)");
  ConvergenceSeries series("decomposition_max_residual", ctx.hash, ctx.sched.name());
  EnumerationLimits limits;
  limits.patterns = ctx.budget;
  limits.states = ctx.budget;
  for (int n = 1; n <= spec.schedule.n_max; ++n) {
    const FiniteRegion t = ctx.sched.tiles(spec.group, n);
    const auto patterns = enumerate_patterns(spec.sft, t, spec.schedule.collar, limits);
    double worst = 0.0;
    std::size_t used = 0;
    for (const auto& x : patterns) {
      if (!(mu->cylinder(x).lo > 0.0)) continue;
      worst = std::max(worst, decomposition_check(*mu, spec.group, ctx.sched, n, x).residual);
      ++used;
    }
    series.add(n, used, Interval::point(worst));
  }
  json results;
  results["mu"] = mu->describe();
  results["series"] = series_json(series);
  CsvTable csv;
  csv.add(series, ctx.hash);
  const double tol = ctx.tolerance();
  double worst = 0.0;
  for (const auto& p : series.points()) worst = std::max(worst, p.value.hi);
  Verdict v;
  v.pass = worst <= tol;
  v.text = "max residual " + short_num(worst) + (v.pass ? " <= " : " > ") + "tol " + short_num(tol);
  return emit(ctx, "decompose", std::move(results), csv, v, out);
}

int cmd_check(const Context& ctx, std::ostream& out) {
  const auto& spec = ctx.spec;
  const auto& desc = spec.group;
  const int n_max = std::max(2, spec.schedule.n_max);
  json results;
  CsvTable csv;
  const auto safe = safe_symbol(spec.sft);
  results["safe_symbol"] = safe ? json(spec.sft.alphabet().label(*safe)) : json(nullptr);
  json folner = json::array();
  for (const auto& g : desc.generators()) {
    ConvergenceSeries s("folner_defect " + format_point_spec(desc, g), ctx.hash, ctx.sched.name());
    double c = 0.0;
    for (int n = 1; n <= n_max; ++n) {
      const Ratio r = folner_defect(desc, ctx.sched, n, g);
      s.add(n, 0, Interval::point(r.value()));
      c = std::max(c, n * r.value());
    }
    csv.add(s, ctx.hash);
    folner.push_back(json{{"generator", format_point_spec(desc, g)}, {"fitted_constant", jnum(c)}, {"series", series_json(s)}});
  }
  results["folner"] = folner;
  const Ratio tc = tempered_constant(desc, ctx.sched, n_max);
  results["tempered_constant"] = json{{"num", tc.num}, {"den", tc.den}};
  const int n_d = desc.rank() == 1 ? std::clamp(spec.schedule.n_max, 1, 3) : 1;
  const FiniteRegion t = ctx.sched.tiles(desc, n_d);
  const CheckMode mode = desc.rank() == 1 ? CheckMode::exhaustive : CheckMode::sampled;
  const FiniteRegion t_hat = unite(t, collar(desc, t, spec.sft.window_diameter()));
  EnumerationLimits limits;
  limits.patterns = ctx.budget;
  limits.states = ctx.budget;
  const ConditionDResult d = condition_d_check(spec.sft, t, t_hat, mode, 1000, ctx.seed, limits);
  results["condition_d"] = json{{"passed", d.passed}, {"n", n_d}, {"collar_radius", d.collar_radius},
                                {"pairs_checked", d.pairs_checked}, {"warning", d.warning},
                                {"mode", mode == CheckMode::exhaustive ? "exhaustive" : "sampled"}};
  Lattice hi{};
  int side = 2;
  auto arena_size = [&](int s) { return desc.index() * static_cast<int>(std::pow(s, desc.rank())); };
  while (side < 5 && arena_size(side + 1) <= (desc.rank() == 1 ? 9 : 4)) ++side;
  for (int a = 0; a < desc.rank(); ++a) hi[a] = side - 1;
  FiniteRegion arena = coset_fill(desc, FiniteRegion::box(0, Lattice{}, hi, desc.rank()));
  const int gap = 2;
  const TssmResult tssm = tssm_gap_check(spec.sft, gap, arena, -1, std::size_t{1} << 26);
  results["tssm"] = json{{"passed", tssm.passed}, {"gap", gap}, {"arena_points", arena.size()},
                         {"collar_radius", tssm.collar_radius}, {"pairs_checked", tssm.pairs_checked},
                         {"label", "finite-scale certificate"}};
  Verdict v;
  v.pass = d.passed && tssm.passed;
  v.text = std::string("safe symbol ") + (safe ? spec.sft.alphabet().label(*safe) : "none") + ", condition (D) " +
           (d.passed ? "pass" : "fail") + ", TSSM(g=2) " + (tssm.passed ? "pass" : "fail") + ", tempered constant " +
           short_num(tc.value());
  return emit(ctx, "check", std::move(results), csv, v, out);
}

int cmd_entropy(const Context& ctx, std::ostream& out) {
  const auto& spec = ctx.spec;
  const auto nu = nu_measure(ctx);
  json results;
  const auto ref = reference_pressure(ctx, &results);
  if (!ref) throw PreconditionError("entropy needs a reference pressure (run.reference)");
  results["measure"] = nu->describe();
  results["reference"] = interval_json(*ref);
  CsvTable csv;
  const bool decomposable = nu->exact() || dynamic_cast<const PointMixtureOracle*>(nu.get()) != nullptr;
  if (decomposable && spec.schedule.depth >= 1) {
    ConvergenceSeries s("entropy_decomposition", ctx.hash, "depth");
    for (int d = 1; d <= spec.schedule.depth; ++d) {
      s.add(d, 0, entropy_decomposition(*nu, spec.group, d).value);
    }
    csv.add(s, ctx.hash);
    results["entropy_decomposition"] = series_json(s);
  }
  const VariationalGap lo = variational_gap(ref->lo, spec.phi, *nu);
  const VariationalGap hi = variational_gap(ref->hi, spec.phi, *nu);
  results["variational_gap"] = interval_json(Interval{lo.gap, hi.gap});
  results["entropy_rate"] = nu->kind() == OracleKind::empirical_samples ? estimate_json(lo.entropy, 0.0)
                                                                         : interval_json(Interval::point(lo.entropy));
  results["energy"] = interval_json(Interval::point(lo.energy));
  results["warning"] = lo.warning;
  dump_samples(ctx, *nu, results);
  const double tol = ctx.tolerance();
  Verdict v;
  v.pass = hi.gap >= -tol;
  v.text = "variational gap [" + num(lo.gap) + ", " + num(hi.gap) + "]" + (v.pass ? " >= " : " < ") + "-tol " +
           short_num(tol);
  return emit(ctx, "entropy", std::move(results), csv, v, out);
}

int cmd_cache(const Flags& f, std::ostream& out) {
  fs::path dir;
  if (!f.cache_dir.empty()) {
    dir = f.cache_dir;
  } else if (const auto env = ResultCache::from_environment()) {
    dir = *env;
  } else {
    throw PreconditionError("no cache directory: pass --dir or set CAVITYPRESS_CACHE");
  }
  ResultCache cache(dir, false);
  if (f.cache_action == "stats") {
    const CacheStats s = cache.stats();
    out << "entries " << s.entries << "\nhits " << s.hits << "\nmisses " << s.misses << "\nhit_rate "
        << num(s.hit_rate()) << "\nbytes " << s.bytes << "\n";
    return ok;
  }
  if (f.cache_action == "gc") {
    const auto dropped = cache.gc(f.max_age, static_cast<std::int64_t>(std::time(nullptr)));
    out << "evicted " << dropped << "\n";
    return ok;
  }
  const std::size_t budget = f.budget.value_or(std::size_t{1} << 22);
  const VerifyReport r = cache.verify(f.verify_fraction, f.seed.value_or(1), [&](const CacheEntry& e) {
    const ModelSpec spec = parse_model_spec(e.spec);
    return log_partition_free(spec.phi, spec.sft, region_from_text(spec.group, e.region), e.collar, budget);
  });
  out << "entries " << r.entries << "\nrecomputed " << r.recomputed << "\nmismatches " << r.mismatches << "\n";
  for (const auto& p : r.problems) out << "corrupt " << p.key << ": " << p.reason << "\n";
  return r.problems.empty() ? ok : tolerance;
}

Context make_context(const Flags& f) {
  Context ctx;
  ctx.spec = load_model_spec(f.spec);
  ctx.sched = make_schedule(ctx.spec.schedule);
  ctx.seed = f.seed.value_or(ctx.spec.run.seed);
  ctx.budget = f.budget.value_or(ctx.spec.schedule.budget);
  ctx.spec.schedule.budget = ctx.budget;
  ctx.tol = f.tol ? f.tol : ctx.spec.run.tolerance;
  if (f.tol && *f.tol <= 0.0) throw PreconditionError("--tol must be positive");
  ctx.out_dir = !f.out.empty() ? fs::path(f.out) : (!ctx.spec.run.out.empty() ? fs::path(ctx.spec.run.out) : fs::path("."));
  set_thread_count(f.threads.value_or(ctx.spec.run.threads));
  ctx.hash = model_hash(ctx.spec.sft, ctx.spec.phi);
  return ctx;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pressure, cavity and SMB estimators for Gibbs measures on shifts of finite type", "cavitypress"};
  app.require_subcommand(1);
  Flags f;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--spec", f.spec, "model spec file")->required();
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--seed", f.seed, "random seed");
    sub->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--budget", f.budget, "state budget")->check(CLI::PositiveNumber);
    sub->add_option("--tol", f.tol, "tolerance for the verdict");
  };
  std::vector<std::pair<std::string, int (*)(const Context&, std::ostream&)>> commands{
      {"pressure", cmd_pressure}, {"cavity", cmd_cavity}, {"smb", cmd_smb},
      {"decompose", cmd_decompose}, {"check", cmd_check}, {"entropy", cmd_entropy}};
  const std::map<std::string, std::string> help{
      {"pressure", "finite-volume pressure sequence against a transfer or strip reference"},
      {"cavity", "cavity pressure from conditional information brackets"},
      {"smb", "SMB ratios, predictions and L1 defects along the schedule"},
      {"decompose", "sequential decomposition residuals over admissible cylinders"},
      {"check", "Folner, tempered, condition (D), TSSM and safe-symbol checks"},
      {"entropy", "entropy decomposition and variational gap"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, fn] : commands) {
    auto* sub = app.add_subcommand(name, help.at(name));
    add_common(sub);
    subs.push_back(sub);
  }
  auto* cache = app.add_subcommand("cache", "cache administration");
  cache->add_option("action", f.cache_action, "verify, gc or stats")
      ->required()
      ->check(CLI::IsMember({"verify", "gc", "stats"}));
  cache->add_option("--dir", f.cache_dir, "cache directory (default: CAVITYPRESS_CACHE)");
  cache->add_option("--max-age", f.max_age, "gc: evict entries older than this many seconds");
  cache->add_option("--fraction", f.verify_fraction, "verify: fraction of entries to recompute")
      ->check(CLI::Range(0.0, 1.0));
  cache->add_option("--seed", f.seed, "verify: sampling seed");
  cache->add_option("--budget", f.budget, "verify: state budget");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return parse_error;
  }
  try {
    if (cache->parsed()) return cmd_cache(f, out);
    for (std::size_t k = 0; k < subs.size(); ++k) {
      if (subs[k]->parsed()) {
        const Context ctx = make_context(f);
        return commands[k].second(ctx, out);
      }
    }
  } catch (const ParseError& e) {
    err << "parse error: " << f.spec << ":" << e.what() << "\n";
    return parse_error;
  } catch (const ResourceError& e) {
    err << "resource budget exceeded: " << e.what() << "\n";
    return resource;
  } catch (const ToleranceError& e) {
    err << "tolerance failure: " << e.what() << "\n";
    return tolerance;
  } catch (const PreconditionError& e) {
    err << "precondition violated: " << e.what() << "\n";
    return precondition;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return precondition;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "file error: " << e.what() << "\n";
    return precondition;
  }
  return parse_error;
}

}  // namespace cavitypress::cli
