#include "cavitypress/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "cavitypress/errors.hpp"
#include "cavitypress/numeric.hpp"
#include "cavitypress/sweep.hpp"

namespace cavitypress {

namespace {

std::size_t table_size(int q, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < k; ++i) r *= static_cast<std::size_t>(q);
  return r;
}

std::vector<Symbol> decode(std::size_t code, std::size_t k, int q) {
  std::vector<Symbol> v(k);
  for (std::size_t i = k; i-- > 0;) {
    v[i] = static_cast<Symbol>(code % static_cast<std::size_t>(q));
    code /= static_cast<std::size_t>(q);
  }
  return v;
}

// Right translations s with M s = M.
std::vector<GroupPoint> stabilizer(const GroupDescriptor& desc, const FiniteRegion& shape) {
  std::vector<GroupPoint> out;
  const auto m0 = shape.points()[0];
  for (const auto& m : shape) {
    const auto s = desc.multiply(desc.inverse(m0), m);
    if (right_translate(desc, shape, s) == shape) out.push_back(s);
  }
  return out;
}

}  // namespace

Interaction::Interaction(std::string name, GroupDescriptor desc, int alphabet_size,
                         std::vector<InteractionTerm> terms)
    : Interaction(std::move(name), std::move(desc), alphabet_size, std::move(terms), true) {}

Interaction Interaction::unchecked(std::string name, GroupDescriptor desc, int alphabet_size,
                                   std::vector<InteractionTerm> terms) {
  return Interaction(std::move(name), std::move(desc), alphabet_size, std::move(terms), false);
}

Interaction::Interaction(std::string name, GroupDescriptor desc, int alphabet_size,
                         std::vector<InteractionTerm> terms, bool check)
    : name_(std::move(name)), desc_(std::move(desc)), q_(alphabet_size), terms_(std::move(terms)) {
  if (q_ < 1) throw PreconditionError("alphabet size must be positive");
  std::set<std::vector<GroupPoint>> shapes;
  for (const auto& t : terms_) {
    if (!t.shape.contains(desc_.identity())) throw PreconditionError("interaction shape must contain e");
    if (t.table.size() != table_size(q_, t.shape.size())) {
      throw PreconditionError("interaction table does not match its shape");
    }
    for (double v : t.table) {
      if (!std::isfinite(v)) throw PreconditionError("interaction values must be finite");
    }
    if (!shapes.insert(t.shape.points()).second) throw PreconditionError("interaction shapes must be distinct");
    if (check) {
      // Translates equal as sets must carry equal values.
      for (const auto& s : stabilizer(desc_, t.shape)) {
        std::vector<GroupPoint> moved;
        for (const auto& m : t.shape) moved.push_back(desc_.multiply(m, s));
        for (std::size_t code = 0; code < t.table.size(); ++code) {
          const Pattern x(t.shape, decode(code, t.shape.size(), q_));
          if (t.table[pattern_code(x, moved, q_)] != t.table[code]) {
            throw PreconditionError("interaction table is not invariant under the shape stabilizer");
          }
        }
      }
    }
    anchored_.push_back(placements_meeting(desc_, t.shape, FiniteRegion({desc_.identity()})));
    range_ = std::max(range_, region_diameter(desc_, t.shape));
  }
}

Interaction Interaction::zero(const GroupDescriptor& desc, int alphabet_size) {
  return Interaction("zero", desc, alphabet_size, {});
}

Interaction Interaction::hardcore(const GroupDescriptor& desc, double lambda) {
  if (!(lambda > 0.0)) throw PreconditionError("hardcore activity must be positive");
  InteractionTerm t{FiniteRegion({desc.identity()}), {0.0, -std::log(lambda)}};
  std::ostringstream name;
  name.precision(17);
  name << "hardcore(lambda=" << lambda << ")";
  return Interaction(name.str(), desc, 2, {t});
}

Interaction Interaction::ising(const GroupDescriptor& desc, double beta, double field) {
  std::vector<InteractionTerm> terms;
  const double spin[2] = {-1.0, 1.0};
  if (field != 0.0) terms.push_back({FiniteRegion({desc.identity()}), {field, -field}});
  for (int a = 0; a < desc.rank(); ++a) {
    InteractionTerm t{FiniteRegion({desc.identity(), desc.lattice_point(unit_vector(a))}), {}};
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) t.table.push_back(-beta * spin[x] * spin[y]);
    }
    terms.push_back(std::move(t));
  }
  std::ostringstream name;
  name.precision(17);
  name << "ising(beta=" << beta << ",field=" << field << ")";
  return Interaction(name.str(), desc, 2, std::move(terms));
}

std::string Interaction::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "potential=" << name_ << ";q=" << q_;
  for (const auto& t : terms_) {
    os << ";shape=";
    for (const auto& g : t.shape) os << format_point(desc_, g) << ",";
    os << "table=";
    for (double v : t.table) os << v << ",";
  }
  return os.str();
}

double Interaction::term_value(std::size_t t, const Placement& pl, const Pattern& x) const {
  return terms_[t].table[pattern_code(x, pl.sites, q_)];
}

double Interaction::term_value_on(std::size_t t, const FiniteRegion& a, const Pattern& x) const {
  const auto& shape = terms_[t].shape;
  const auto m0 = shape.points()[0];
  for (const auto& p : a) {
    const auto g = desc_.multiply(desc_.inverse(m0), p);
    Placement pl{g, {}};
    for (const auto& m : shape) pl.sites.push_back(desc_.multiply(m, g));
    if (FiniteRegion(pl.sites) == a) return term_value(t, pl, x);
  }
  throw PreconditionError("region is not a translate of the interaction shape");
}

double norm(const Interaction& phi) {
  CompensatedSum sum;
  for (std::size_t t = 0; t < phi.terms().size(); ++t) {
    double sup = 0.0;
    for (double v : phi.terms()[t].table) sup = std::max(sup, std::fabs(v));
    sum.add(static_cast<double>(phi.anchored(t).size()) * sup);
  }
  return sum.value();
}

double norm(const Interaction& phi, const SftSpec& sft) {
  CompensatedSum sum;
  const int q = phi.alphabet_size();
  for (std::size_t t = 0; t < phi.terms().size(); ++t) {
    const auto& term = phi.terms()[t];
    double sup = 0.0;
    for (std::size_t code = 0; code < term.table.size(); ++code) {
      const Pattern x(term.shape, decode(code, term.shape.size(), q));
      if (locally_admissible(sft, x)) sup = std::max(sup, std::fabs(term.table[code]));
    }
    sum.add(static_cast<double>(phi.anchored(t).size()) * sup);
  }
  return sum.value();
}

FiniteRegion local_energy_support(const Interaction& phi) {
  std::vector<GroupPoint> pts{phi.desc().identity()};
  for (std::size_t t = 0; t < phi.terms().size(); ++t) {
    for (const auto& pl : phi.anchored(t)) pts.insert(pts.end(), pl.sites.begin(), pl.sites.end());
  }
  return FiniteRegion(std::move(pts));
}

FiniteRegion coset_energy_support(const Interaction& phi) {
  const auto base = local_energy_support(phi);
  FiniteRegion out;
  for (int c = 0; c < phi.desc().index(); ++c) {
    // phi(k . x) reads x on supp . k
    out = unite(out, right_translate(phi.desc(), base, GroupPoint{c, {}}));
  }
  return out;
}

namespace {

void require_covered(const Pattern& p, const std::vector<GroupPoint>& sites, const GroupDescriptor& desc) {
  std::vector<std::string> missing;
  for (const auto& s : sites) {
    if (!p.at(s)) missing.push_back(format_point(desc, s));
  }
  if (missing.empty()) return;
  std::string msg = "pattern does not determine the local energy; missing";
  for (const auto& m : missing) msg += " " + m;
  throw PreconditionError(msg);
}

}  // namespace

double local_energy(const Interaction& phi, const Pattern& p) {
  CompensatedSum sum;
  for (std::size_t t = 0; t < phi.terms().size(); ++t) {
    const double size = static_cast<double>(phi.terms()[t].shape.size());
    for (const auto& pl : phi.anchored(t)) {
      require_covered(p, pl.sites, phi.desc());
      sum.add(-phi.term_value(t, pl, p) / size);
    }
  }
  return sum.value();
}

double coset_local_energy(const Interaction& phi, const Pattern& p, int coset) {
  return local_energy(phi, translate(phi.desc(), p, GroupPoint{coset, {}}));
}

double coset_sum_local_energy(const Interaction& phi, const Pattern& p) {
  CompensatedSum sum;
  for (int c = 0; c < phi.desc().index(); ++c) sum.add(coset_local_energy(phi, p, c));
  return sum.value();
}

double energy(const Interaction& phi, const Pattern& p) {
  CompensatedSum sum;
  for (std::size_t t = 0; t < phi.terms().size(); ++t) {
    for (const auto& pl : placements_inside(phi.desc(), phi.terms()[t].shape, p.support())) {
      sum.add(phi.term_value(t, pl, p));
    }
  }
  return sum.value();
}

double boundary_energy(const Interaction& phi, const SftSpec& sft, const Pattern& x, const Pattern& y) {
  const auto z = concat(x, y);
  const auto& region = z.support();
  const int needed = std::max(phi.range(), sft.window_diameter());
  auto require_inside = [&](const std::vector<Placement>& pls) {
    for (const auto& pl : pls) {
      for (const auto& s : pl.sites) {
        if (!region.contains(s)) {
          throw PreconditionError("boundary pattern does not cover the interaction range; required collar radius " +
                                  std::to_string(needed));
        }
      }
    }
  };
  std::vector<std::vector<Placement>> term_pls;
  for (const auto& term : phi.terms()) {
    term_pls.push_back(placements_meeting(phi.desc(), term.shape, x.support()));
    require_inside(term_pls.back());
  }
  for (const auto& b : sft.blocks()) require_inside(placements_meeting(sft.desc(), b.window, x.support()));
  if (!locally_admissible(sft, z)) return std::numeric_limits<double>::infinity();
  CompensatedSum sum;
  for (std::size_t t = 0; t < term_pls.size(); ++t) {
    for (const auto& pl : term_pls[t]) sum.add(phi.term_value(t, pl, z));
  }
  return sum.value();
}

bool invariance_check(const Interaction& phi, int samples, std::uint64_t seed, int radius) {
  if (phi.terms().empty()) return true;
  const auto& desc = phi.desc();
  const auto ball_pts = ball(desc, desc.identity(), radius).points();
  std::mt19937_64 rng(seed);
  for (int s = 0; s < samples; ++s) {
    const std::size_t t = rng() % phi.terms().size();
    const auto& shape = phi.terms()[t].shape;
    const auto g = ball_pts[rng() % ball_pts.size()];
    const auto a = right_translate(desc, shape, g);
    std::vector<Symbol> vals(a.size());
    for (auto& v : vals) v = static_cast<Symbol>(rng() % static_cast<std::uint64_t>(phi.alphabet_size()));
    const Pattern x(a, vals);
    const double translated = phi.term_value_on(t, a, x);
    const auto moved = translate(desc, x, g);
    const double direct = phi.terms()[t].table[pattern_code(moved, shape.points(), phi.alphabet_size())];
    if (translated != direct) return false;
  }
  return true;
}

void add_energy_factors(SweepProblem& problem, const Interaction& phi, const SiteIndex& index,
                        const FiniteRegion* meeting) {
  for (std::size_t t = 0; t < phi.terms().size(); ++t) {
    const auto& term = phi.terms()[t];
    std::vector<double> weights(term.table.size());
    for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = std::exp(-term.table[i]);
    for (const auto& pl : placements_inside(phi.desc(), term.shape, index.region())) {
      if (meeting) {
        bool hit = false;
        for (const auto& s : pl.sites) hit = hit || meeting->contains(s);
        if (!hit) continue;
      }
      SweepFactor f;
      for (const auto& s : pl.sites) f.vars.push_back(index.of(s));
      f.weights = weights;
      problem.add(std::move(f));
    }
  }
}

}  // namespace cavitypress
