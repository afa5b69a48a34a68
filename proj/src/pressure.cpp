#include "cavitypress/pressure.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <set>

#include "cavitypress/errors.hpp"
#include "cavitypress/parallel.hpp"

namespace cavitypress {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double entropy_of(const std::vector<WeightedPattern>& dist) {
  CompensatedSum s;
  for (const auto& w : dist) {
    if (w.weight > 0.0) s.add(-w.weight * std::log(w.weight));
  }
  return s.value();
}

}  // namespace

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string model_hash(const SftSpec& sft, const Interaction& phi) {
  return hex64(fnv1a(sft.describe() + "|" + phi.describe()));
}

// ---------------------------------------------------------------- series

void ConvergenceSeries::add(int n, std::size_t count, Interval value, double stderr_estimate) {
  if (!points_.empty() && n <= points_.back().n) throw PreconditionError("series indices must increase");
  if (!std::isfinite(value.lo) || !std::isfinite(value.hi)) {
    throw PreconditionError("series value at n=" + std::to_string(n) + " is not finite");
  }
  points_.push_back({n, count, value, stderr_estimate});
}

double ConvergenceSeries::tail_spread(std::size_t tail) const {
  if (points_.empty()) return 0.0;
  const std::size_t start = points_.size() > tail ? points_.size() - tail : 0;
  double lo = kInf, hi = -kInf;
  for (std::size_t i = start; i < points_.size(); ++i) {
    lo = std::min(lo, points_[i].value.lo);
    hi = std::max(hi, points_[i].value.hi);
  }
  return hi - lo;
}

// ---------------------------------------------------------------- pressure estimators

ConvergenceSeries pressure_sequence(const Interaction& phi, const SftSpec& sft, const FolnerSchedule& sched,
                                    int n_max, std::size_t state_budget) {
  if (n_max < 1) throw PreconditionError("pressure sequence needs n_max >= 1 (empty schedule)");
  const auto& desc = sft.desc();
  const double bound = std::log(static_cast<double>(sft.alphabet().size())) + norm(phi);
  ConvergenceSeries out("pressure_sequence", model_hash(sft, phi), sched.name());
  for (int n = 1; n <= n_max; ++n) {
    const FiniteRegion t = sched.tiles(desc, n);
    const double log_z = log_partition_free(phi, sft, t, 0, state_budget);
    if (!std::isfinite(log_z)) throw ZeroProbabilityError("no admissible pattern on T_" + std::to_string(n));
    const double v = log_z / static_cast<double>(t.size());
    if (v > bound + 1e-12) {
      throw Error("pressure estimate " + std::to_string(v) + " exceeds the a priori bound " + std::to_string(bound));
    }
    out.add(n, t.size(), Interval::point(v));
  }
  return out;
}

double transfer_pressure_1d(const Interaction& phi, const SftSpec& sft) {
  return *MarkovOracle::gibbs(phi, sft).log_perron_root();
}

namespace {

struct StripGeometry {
  // Local site index col * w + row for col in {0, 1}.
  struct Item {
    std::size_t owner;  // block or term index
    std::vector<int> sites;
  };
  std::vector<Item> windows_in_col, windows_two, terms_in_col, terms_two;
};

StripGeometry strip_geometry(const Interaction& phi, const SftSpec& sft, int w, bool periodic) {
  const auto& desc = sft.desc();
  StripGeometry g;
  auto place = [&](const FiniteRegion& shape, std::size_t owner, std::vector<StripGeometry::Item>& in_col,
                   std::vector<StripGeometry::Item>& two) {
    std::int32_t reach = 0;
    for (const auto& m : shape) reach = std::max({reach, std::abs(m.h[0]), std::abs(m.h[1])});
    std::set<std::vector<GroupPoint>> seen;
    const std::int32_t j_lo = periodic ? 0 : -reach;
    const std::int32_t j_hi = periodic ? w - 1 : w - 1 + reach;
    for (std::int32_t t = -reach; t <= 1 + reach; ++t) {
      for (std::int32_t j = j_lo; j <= j_hi; ++j) {
        std::vector<GroupPoint> pts;
        for (const auto& m : shape) pts.push_back(desc.multiply(m, GroupPoint{0, Lattice{t, j, 0, 0}}));
        bool inside = true;
        bool col0 = true;
        std::vector<int> sites;
        for (const auto& p : pts) {
          if (p.h[0] < 0 || p.h[0] > 1) inside = false;
          if (p.h[0] != 0) col0 = false;
          std::int32_t row = p.h[1];
          if (periodic) {
            row = ((row % w) + w) % w;
          } else if (row < 0 || row >= w) {
            inside = false;
          }
          sites.push_back(p.h[0] * w + row);
        }
        if (!inside) continue;
        auto key = pts;
        std::sort(key.begin(), key.end());
        if (!seen.insert(key).second) continue;
        if (col0) in_col.push_back({owner, sites});
        two.push_back({owner, std::move(sites)});
      }
    }
  };
  for (std::size_t b = 0; b < sft.blocks().size(); ++b) {
    place(sft.blocks()[b].window, b, g.windows_in_col, g.windows_two);
  }
  for (std::size_t t = 0; t < phi.terms().size(); ++t) place(phi.terms()[t].shape, t, g.terms_in_col, g.terms_two);
  return g;
}

struct StripTransfer {
  double log_rho = 0.0;
  bool symmetric = false;
};

StripTransfer strip_transfer(const Interaction& phi, const SftSpec& sft, int w, bool periodic,
                             std::size_t column_budget) {
  const int q = sft.alphabet().size();
  const StripGeometry geo = strip_geometry(phi, sft, w, periodic);
  std::size_t total = 1;
  for (int i = 0; i < w; ++i) {
    total *= static_cast<std::size_t>(q);
    if (total > (std::size_t{1} << 24)) throw ResourceError("strip width too large to enumerate columns");
  }
  auto code = [&](const StripGeometry::Item& it, const std::vector<Symbol>& x) {
    std::size_t c = 0;
    for (int s : it.sites) c = c * static_cast<std::size_t>(q) + x[static_cast<std::size_t>(s)];
    return c;
  };
  std::vector<std::vector<Symbol>> cols;
  std::vector<double> e1;
  std::vector<Symbol> x(static_cast<std::size_t>(2 * w), 0);
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t r = c;
    for (int i = w - 1; i >= 0; --i) {
      x[static_cast<std::size_t>(i)] = static_cast<Symbol>(r % static_cast<std::size_t>(q));
      r /= static_cast<std::size_t>(q);
    }
    bool ok = true;
    for (const auto& it : geo.windows_in_col) {
      if (sft.blocks()[it.owner].forbidden[code(it, x)]) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    CompensatedSum e;
    for (const auto& it : geo.terms_in_col) e.add(phi.terms()[it.owner].table[code(it, x)]);
    cols.emplace_back(x.begin(), x.begin() + w);
    e1.push_back(e.value());
    if (cols.size() > column_budget) {
      throw ResourceError("strip width " + std::to_string(w) + " exceeds the column budget");
    }
  }
  if (cols.empty()) throw ZeroProbabilityError("strip has no admissible column");
  const auto n = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    std::copy(cols[a].begin(), cols[a].end(), x.begin());
    for (Eigen::Index b = 0; b < n; ++b) {
      std::copy(cols[b].begin(), cols[b].end(), x.begin() + w);
      bool ok = true;
      for (const auto& it : geo.windows_two) {
        if (sft.blocks()[it.owner].forbidden[code(it, x)]) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      CompensatedSum e;
      for (const auto& it : geo.terms_two) e.add(phi.terms()[it.owner].table[code(it, x)]);
      // Symmetrized weight: similar to the transfer matrix exp(-(E2 - E1(a))).
      s(a, b) = std::exp(-(e.value() - 0.5 * e1[a] - 0.5 * e1[b]));
    }
  }
  StripTransfer out;
  out.symmetric = (s - s.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * std::max(1.0, s.cwiseAbs().maxCoeff());
  double rho = 0.0;
  if (out.symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
    rho = es.eigenvalues().maxCoeff();
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> es(s, false);
    rho = es.eigenvalues().real().maxCoeff();
  }
  if (!(rho > 0.0)) throw ZeroProbabilityError("strip transfer matrix is nilpotent");
  out.log_rho = std::log(rho);
  return out;
}

}  // namespace

StripResult strip_pressure_2d(const Interaction& phi, const SftSpec& sft, int max_width, std::size_t column_budget) {
  const auto& desc = sft.desc();
  if (desc.rank() != 2 || desc.index() != 1) throw PreconditionError("strip transfer needs Z^2 with index 1");
  if (max_width < 1) throw PreconditionError("strip widths must be positive");
  StripResult out;
  const std::string hash = model_hash(sft, phi);
  out.free_series = ConvergenceSeries("strip_free", hash, "strip");
  out.periodic_series = ConvergenceSeries("strip_periodic", hash, "strip");
  bool all_symmetric = true;
  for (int w = 1; w <= max_width; ++w) {
    const StripTransfer f = strip_transfer(phi, sft, w, false, column_budget);
    const StripTransfer p = strip_transfer(phi, sft, w, true, column_budget);
    out.widths.push_back({w, f.log_rho, p.log_rho, f.symmetric && p.symmetric});
    all_symmetric = all_symmetric && f.symmetric && p.symmetric;
    out.free_series.add(w, static_cast<std::size_t>(w), Interval::point(f.log_rho / w));
    out.periodic_series.add(w, static_cast<std::size_t>(w), Interval::point(p.log_rho / w));
  }
  double lo = -kInf, hi = kInf;
  auto f = [&](int w) { return out.widths[static_cast<std::size_t>(w - 1)].free_log_rho; };
  for (int m = 1; m <= max_width; m += 2) {
    for (int p = 2; m + p <= max_width; p += 2) lo = std::max(lo, (f(m + p) - f(m)) / p);
  }
  for (int w = 2; w <= max_width; w += 2) {
    hi = std::min(hi, out.widths[static_cast<std::size_t>(w - 1)].periodic_log_rho / w);
  }
  out.certified = all_symmetric && std::isfinite(lo) && std::isfinite(hi);
  out.bracket = Interval{lo, hi};
  return out;
}

// ---------------------------------------------------------------- local functions and averages

LocalFunction LocalFunction::constant(const GroupDescriptor&, double c) {
  return {"constant", FiniteRegion(), [c](const Pattern&) { return c; }};
}

LocalFunction LocalFunction::indicator(const GroupPoint& g, Symbol s) {
  return {"indicator", FiniteRegion({g}), [g, s](const Pattern& p) { return p.value(g) == s ? 1.0 : 0.0; }};
}

LocalFunction LocalFunction::coset_energy(const Interaction& phi) {
  auto shared = std::make_shared<Interaction>(phi);
  return {"phi_K", coset_energy_support(phi),
          [shared](const Pattern& p) { return coset_sum_local_energy(*shared, p); }};
}

LocalFunction LocalFunction::coset_energy_at(const Interaction& phi, int coset) {
  auto shared = std::make_shared<Interaction>(phi);
  return {"phi_" + std::to_string(coset),
          right_translate(phi.desc(), local_energy_support(phi), GroupPoint{coset, {}}),
          [shared, coset](const Pattern& p) { return coset_local_energy(*shared, p, coset); }};
}

Estimate expectation(const MeasureOracle& nu, const LocalFunction& f) {
  if (const auto* mix = dynamic_cast<const PointMixtureOracle*>(&nu)) {
    if (mix->kind() == OracleKind::empirical_samples) {
      std::vector<double> per_sample;
      for (const auto& a : mix->atoms()) {
        CompensatedSum s;
        const std::size_t box = a.point.box_size();
        for (std::size_t i = 0; i < box; ++i) {
          s.add(f.eval(a.point.translated_pattern(nu.desc(), GroupPoint{0, a.point.box_point(i)}, f.support)));
        }
        per_sample.push_back(s.value() / static_cast<double>(box));
      }
      CompensatedSum mean;
      for (double v : per_sample) mean.add(v);
      Estimate e;
      e.value = mean.value() / static_cast<double>(per_sample.size());
      if (per_sample.size() > 1) {
        CompensatedSum var;
        for (double v : per_sample) var.add((v - e.value) * (v - e.value));
        e.stderr_estimate = std::sqrt(var.value() / static_cast<double>(per_sample.size() - 1) /
                                      static_cast<double>(per_sample.size()));
      }
      return e;
    }
    CompensatedSum s;
    for (const auto& v : mix->weighted_views(f.support)) s.add(v.weight * f.eval(v.pattern));
    return {s.value(), 0.0};
  }
  if (!nu.exact()) throw PreconditionError("expectation needs an exact oracle or a point mixture");
  if (f.support.empty()) return {f.eval(Pattern()), 0.0};
  CompensatedSum s;
  for (const auto& v : nu.marginal(f.support)) s.add(v.weight * f.eval(v.pattern));
  return {s.value(), 0.0};
}

ConvergenceSeries ergodic_average(const LocalFunction& f, const PeriodicPoint& x, const GroupDescriptor& desc,
                                  const FolnerSchedule& sched, int n_max) {
  if (n_max < 1) throw PreconditionError("ergodic average needs n_max >= 1");
  ConvergenceSeries out("ergodic_average:" + f.name, "", sched.name());
  for (int n = 1; n <= n_max; ++n) {
    const FiniteRegion core = sched.core(desc, n);
    CompensatedSum s;
    for (const auto& h : core) s.add(f.eval(x.translated_pattern(desc, h, f.support)));
    out.add(n, core.size(), Interval::point(s.value() / static_cast<double>(core.size())));
  }
  return out;
}

SmbSeries smb_ratio_series(const MeasureOracle& nu, const PeriodicPoint& x, const FolnerSchedule& sched, int n_max,
                           const Interaction* phi, std::optional<double> pressure) {
  if (n_max < 1) throw PreconditionError("SMB series needs n_max >= 1");
  const auto& desc = nu.desc();
  SmbSeries out;
  out.ratio = ConvergenceSeries("smb_ratio", nu.describe(), sched.name());
  const bool predict = phi != nullptr && pressure.has_value();
  std::optional<LocalFunction> phi_k;
  if (predict) {
    phi_k = LocalFunction::coset_energy(*phi);
    out.prediction = ConvergenceSeries("smb_prediction", nu.describe(), sched.name());
  }
  for (int n = 1; n <= n_max; ++n) {
    const FiniteRegion t = sched.tiles(desc, n);
    const Interval c = nu.cylinder(x.pattern(t));
    if (!(c.hi > 0.0)) throw ZeroProbabilityError("cylinder on T_" + std::to_string(n) + " has probability zero");
    out.ratio.add(n, t.size(), c.neg_log() * (1.0 / static_cast<double>(t.size())));
    if (predict) {
      const FiniteRegion core = sched.core(desc, n);
      CompensatedSum s;
      for (const auto& h : core) s.add(phi_k->eval(x.translated_pattern(desc, h, phi_k->support)));
      const double avg = s.value() / static_cast<double>(core.size());
      out.prediction.add(n, core.size(), Interval::point(*pressure - avg / desc.index()));
    }
  }
  if (predict && nu.ergodic() && (nu.exact() || dynamic_cast<const PointMixtureOracle*>(&nu))) {
    out.expected_limit = *pressure - expectation(nu, *phi_k).value / desc.index();
  }
  return out;
}

// ---------------------------------------------------------------- decomposition and information

FiniteRegion block_region(const GroupDescriptor& desc, int block) {
  if (block < 1 || block > desc.blocks()) throw PreconditionError("block index out of range");
  std::vector<GroupPoint> pts;
  for (int c : desc.partition()[static_cast<std::size_t>(block - 1)]) pts.push_back(GroupPoint{c, {}});
  return FiniteRegion(std::move(pts));
}

FiniteRegion truncated_past(const GroupDescriptor& desc, int block, int depth) {
  if (depth < 0) throw PreconditionError("depth must be >= 0");
  std::vector<GroupPoint> pts;
  for (const auto& g : ball(desc, desc.identity(), depth)) {
    if (coset_past_membership(desc, block, g)) pts.push_back(g);
  }
  return FiniteRegion(std::move(pts));
}

DecompositionResult decomposition_check(const MeasureOracle& mu, const GroupDescriptor& desc,
                                        const FolnerSchedule& sched, int n, const Pattern& x) {
  const FiniteRegion tiles = sched.tiles(desc, n);
  if (!x.support().includes(tiles)) throw PreconditionError("pattern does not cover T_n");
  const Pattern xt = x.restrict(tiles);
  DecompositionResult out;
  const Interval total = mu.cylinder(xt);
  if (!(total.lo > 0.0)) throw ZeroProbabilityError("cylinder on T_n has probability zero");
  out.total = -std::log(total.lo);
  const FiniteRegion core = sched.core(desc, n);
  struct Job {
    int block;
    GroupPoint h;
  };
  std::vector<Job> jobs;
  for (int i = 1; i <= desc.blocks(); ++i) {
    for (const auto& h : core) jobs.push_back({i, h});
  }
  const auto values = parallel_map<double>(jobs.size(), [&](std::size_t k) {
    const auto& job = jobs[k];
    const FiniteRegion l = block_region(desc, job.block);
    const FiniteRegion c = local_past(desc, sched, n, job.h, job.block);
    auto read = [&](const FiniteRegion& r) {
      std::vector<Symbol> v;
      for (const auto& g : r) v.push_back(xt.value(desc.multiply(g, job.h)));
      return Pattern(r, std::move(v));
    };
    const Interval p = mu.conditional(read(l), read(c));
    if (!(p.lo > 0.0)) throw ZeroProbabilityError("conditional information term is infinite");
    return -std::log(p.lo);
  });
  CompensatedSum s;
  for (double v : values) s.add(v);
  out.sum = s.value();
  out.terms = values.size();
  out.residual = std::fabs(out.total - out.sum);
  return out;
}

std::vector<ConditioningStep> directed_chain(const GroupDescriptor& desc, const FolnerSchedule& sched, int block,
                                             const std::vector<DirectedIndex>& chain) {
  std::vector<ConditioningStep> out;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    if (k > 0 && !directed_leq(desc, sched, chain[k - 1], chain[k])) {
      throw PreconditionError("schedule is not a chain in the directed order at step " + std::to_string(k));
    }
    out.push_back({chain[k].n, local_past(desc, sched, chain[k].n, chain[k].h, block)});
  }
  return out;
}

std::vector<ConditioningStep> depth_chain(const GroupDescriptor& desc, int block, const std::vector<int>& depths) {
  std::vector<ConditioningStep> out;
  for (int d : depths) out.push_back({d, truncated_past(desc, block, d)});
  return out;
}

InformationNet information_net(const MeasureOracle& mu, const MeasureOracle& nu, const GroupDescriptor& desc,
                               int block, const std::vector<ConditioningStep>& steps, std::size_t tail) {
  InformationNet out;
  out.series = ConvergenceSeries("information_net", mu.describe(), "block " + std::to_string(block));
  const FiniteRegion l = block_region(desc, block);
  for (const auto& step : steps) {
    const auto views = nu.marginal(unite(l, step.region));
    struct Term {
      bool skipped = true;
      Interval info;
    };
    const auto terms = parallel_map<Term>(views.size(), [&](std::size_t k) {
      const Pattern& p = views[k].pattern;
      Term t;
      try {
        const Interval c = mu.conditional(p.restrict(l), p.restrict(step.region));
        if (c.hi > 0.0) {
          t.skipped = false;
          t.info = c.neg_log();
        }
      } catch (const ZeroProbabilityError&) {
      }
      return t;
    });
    CompensatedSum lo, hi, kept;
    for (std::size_t k = 0; k < views.size(); ++k) {
      if (terms[k].skipped || !std::isfinite(terms[k].info.hi)) {
        ++out.skipped;
        out.skipped_weight += views[k].weight;
        continue;
      }
      lo.add(views[k].weight * terms[k].info.lo);
      hi.add(views[k].weight * terms[k].info.hi);
      kept.add(views[k].weight);
    }
    if (!(kept.value() > 0.0)) {
      throw ZeroProbabilityError("every nu-point has a null conditioning event at step " + std::to_string(step.label));
    }
    out.series.add(step.label, views.size(), Interval{lo.value() / kept.value(), hi.value() / kept.value()});
  }
  out.cauchy_defect = out.series.tail_spread(tail);
  return out;
}

L1Defect l1_defect(const MeasureOracle& mu, const PointMixtureOracle& nu, const GroupDescriptor& desc,
                   const FolnerSchedule& sched, int block, int n, const LocalFunction& f, bool split) {
  const FiniteRegion core = sched.core(desc, n);
  const FiniteRegion l = block_region(desc, block);
  FiniteRegion inner = core;
  if (split) {
    auto family = [&desc](int j) {
      std::vector<GroupPoint> pts;
      for (const auto& g : ball(desc, desc.identity(), j)) {
        if (g.coset == 0) pts.push_back(g);
      }
      return FiniteRegion(std::move(pts));
    };
    const GammaSchedule gamma = gamma_schedule(desc, sched, family, n);
    inner = shrunk_core(desc, sched, n, family(gamma(n)));
  }
  std::vector<FiniteRegion> pasts;
  for (const auto& h : core) pasts.push_back(local_past(desc, sched, n, h, block));

  struct PointValue {
    Interval total, core, tail;
  };
  std::vector<PointValue> per_point;
  std::vector<double> weights;
  const double size = static_cast<double>(core.size());
  for (const auto& a : nu.atoms()) {
    const std::size_t box = nu.average_translates() ? a.point.box_size() : 1;
    for (std::size_t t = 0; t < box; ++t) {
      const GroupPoint shift{0, nu.average_translates() ? a.point.box_point(t) : Lattice{}};
      const auto terms = parallel_map<Interval>(core.size(), [&](std::size_t k) {
        const GroupPoint g = desc.multiply(core.points()[k], shift);
        const Interval c = mu.conditional(a.point.translated_pattern(desc, g, l),
                                          a.point.translated_pattern(desc, g, pasts[k]));
        if (!(c.hi > 0.0)) throw ZeroProbabilityError("information term is infinite at a nu-point");
        return c.neg_log() + (-f.eval(a.point.translated_pattern(desc, g, f.support)));
      });
      Interval in_core{0.0, 0.0}, in_tail{0.0, 0.0};
      for (std::size_t k = 0; k < core.size(); ++k) {
        if (inner.contains(core.points()[k])) {
          in_core = in_core + terms[k];
        } else {
          in_tail = in_tail + terms[k];
        }
      }
      per_point.push_back({((in_core + in_tail) * (1.0 / size)).abs(), (in_core * (1.0 / size)).abs(),
                           (in_tail * (1.0 / size)).abs()});
      weights.push_back(a.weight / static_cast<double>(box));
    }
  }
  L1Defect out;
  out.core_size = inner.size();
  out.tail_size = core.size() - inner.size();
  CompensatedSum tlo, thi, clo, chi, slo, shi;
  for (std::size_t k = 0; k < per_point.size(); ++k) {
    tlo.add(weights[k] * per_point[k].total.lo);
    thi.add(weights[k] * per_point[k].total.hi);
    clo.add(weights[k] * per_point[k].core.lo);
    chi.add(weights[k] * per_point[k].core.hi);
    slo.add(weights[k] * per_point[k].tail.lo);
    shi.add(weights[k] * per_point[k].tail.hi);
  }
  out.total = {tlo.value(), thi.value()};
  out.core = {clo.value(), chi.value()};
  out.tail = {slo.value(), shi.value()};
  if (nu.kind() == OracleKind::empirical_samples && nu.atoms().size() > 1) {
    // Spread of per-sample means of the midpoint.
    std::vector<double> sample_means;
    std::size_t k = 0;
    for (const auto& a : nu.atoms()) {
      const std::size_t box = a.point.box_size();
      CompensatedSum s;
      for (std::size_t t = 0; t < box; ++t, ++k) s.add(per_point[k].total.mid());
      sample_means.push_back(s.value() / static_cast<double>(box));
    }
    CompensatedSum mean;
    for (double v : sample_means) mean.add(v);
    const double m = mean.value() / static_cast<double>(sample_means.size());
    CompensatedSum var;
    for (double v : sample_means) var.add((v - m) * (v - m));
    const double count = static_cast<double>(sample_means.size());
    out.stderr_estimate = std::sqrt(var.value() / (count - 1.0) / count);
  }
  return out;
}

// ---------------------------------------------------------------- cavity pressure

CavityResult cavity_pressure(const Interaction& phi, const SftSpec& sft, const GroupDescriptor& desc,
                             const MeasureOracle& nu, int depth, const CavityOptions& opt) {
  if (depth < 1) throw PreconditionError("cavity depth must be >= 1");
  CavityResult out;
  out.energy_term = expectation(nu, LocalFunction::coset_energy(phi)).value / desc.index();
  for (int d = std::max(1, depth - 2); d <= depth; ++d) out.depths.push_back(d);
  for (int d : out.depths) {
    BracketOptions bo;
    bo.radius = std::max({d + opt.margin, phi.range(), 1});
    bo.strategy = opt.strategy;
    bo.state_budget = opt.state_budget;
    const GibbsBracketOracle mu(phi, sft, bo);
    Interval sum{0.0, 0.0};
    std::vector<Interval> info;
    for (int i = 1; i <= desc.blocks(); ++i) {
      const InformationNet net = information_net(mu, nu, desc, i, depth_chain(desc, i, {d}));
      info.push_back(net.series.back().value);
      sum = sum + info.back();
      if (d == depth) out.skipped += net.skipped;
    }
    out.per_depth.push_back(sum * (1.0 / desc.index()) + out.energy_term);
    if (d == depth) out.information = info;
  }
  Interval hull = out.per_depth.front();
  for (const auto& v : out.per_depth) hull = hull.hull(v);
  out.cauchy_defect = hull.width();
  if (out.cauchy_defect <= opt.tolerance) out.value = hull;
  return out;
}

VariationalGap variational_gap(double pressure, const Interaction& phi, const MeasureOracle& nu) {
  const auto h = nu.entropy_rate();
  if (!h) throw PreconditionError("entropy estimator unavailable for oracle kind " + to_string(nu.kind()));
  VariationalGap out;
  out.entropy = *h;
  out.energy = expectation(nu, LocalFunction::coset_energy(phi)).value / nu.desc().index();
  out.gap = pressure - (out.entropy + out.energy);
  if (nu.kind() == OracleKind::empirical_samples) out.warning = "plug-in entropy estimate is biased";
  return out;
}

EntropyDecomposition entropy_decomposition(const MeasureOracle& nu, const GroupDescriptor& desc, int depth) {
  EntropyDecomposition out;
  CompensatedSum s;
  for (int i = 1; i <= desc.blocks(); ++i) {
    const FiniteRegion l = block_region(desc, i);
    const FiniteRegion c = truncated_past(desc, i, depth);
    const double h = entropy_of(nu.marginal(unite(l, c))) - entropy_of(nu.marginal(c));
    out.blocks.push_back(h);
    s.add(h);
  }
  out.value = Interval::point(s.value() / desc.index());
  return out;
}

}  // namespace cavitypress
