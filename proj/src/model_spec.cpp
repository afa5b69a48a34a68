#include "cavitypress/model_spec.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cavitypress/errors.hpp"

namespace cavitypress {

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) {
  const YAML::Mark m = node.Mark();
  throw ParseError(what, m.line + 1, m.column + 1);
}

void check_keys(const YAML::Node& node, const std::string& block, std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) fail(node, block + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      fail(kv.first, "unknown key '" + key + "' in " + block);
    }
  }
}

template <class T>
T get(const YAML::Node& node, const std::string& what) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, "bad value for " + what);
  }
}

int get_int(const YAML::Node& node, const std::string& what, int lo) {
  const auto v = get<long long>(node, what);
  if (v < lo || v > 1000000000) fail(node, what + " out of range");
  return static_cast<int>(v);
}

double get_double(const YAML::Node& node, const std::string& what) {
  const auto v = get<double>(node, what);
  if (!std::isfinite(v)) fail(node, what + " must be finite");
  return v;
}

std::vector<std::string> get_strings(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence()) fail(node, what + " must be a list");
  std::vector<std::string> out;
  for (const auto& e : node) out.push_back(get<std::string>(e, what));
  return out;
}

Lattice get_lattice(const YAML::Node& node, const std::string& what, int rank, int lo) {
  if (!node.IsSequence() || static_cast<int>(node.size()) != rank) {
    fail(node, what + " must list " + std::to_string(rank) + " integers");
  }
  Lattice out{};
  for (int a = 0; a < rank; ++a) out[a] = get_int(node[a], what, lo);
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

// Runs f and rethrows library precondition failures at the node's position.
template <class F>
auto at_node(const YAML::Node& node, F&& f) {
  try {
    return f();
  } catch (const ParseError&) {
    throw;
  } catch (const PreconditionError& e) {
    fail(node, e.what());
  }
}

GroupDescriptor parse_group(const YAML::Node& node) {
  check_keys(node, "group", {"preset", "rank", "order", "split", "labels", "table", "conjugation", "partition"});
  if (!node["rank"]) fail(node, "group needs a rank");
  const int rank = get_int(node["rank"], "rank", 1);
  if (rank > kMaxRank) fail(node["rank"], "rank exceeds " + std::to_string(kMaxRank));
  const std::string preset = node["preset"] ? get<std::string>(node["preset"], "preset") : "";
  GroupDescriptor desc = GroupDescriptor::lattice(rank);
  if (preset == "lattice") {
    for (const char* k : {"order", "split", "labels", "table", "conjugation"}) {
      if (node[k]) fail(node[k], std::string("'") + k + "' does not apply to the lattice preset");
    }
  } else if (preset == "cyclic") {
    for (const char* k : {"labels", "table", "conjugation"}) {
      if (node[k]) fail(node[k], std::string("'") + k + "' does not apply to the cyclic preset");
    }
    if (!node["order"]) fail(node, "cyclic preset needs an order");
    const int order = get_int(node["order"], "order", 1);
    const bool split = node["split"] ? get<bool>(node["split"], "split") : true;
    desc = at_node(node, [&] { return GroupDescriptor::cyclic_extension(rank, order, split); });
  } else if (preset.empty()) {
    if (!node["labels"] || !node["table"]) fail(node, "group needs a preset or labels plus table");
    const auto labels = get_strings(node["labels"], "labels");
    const int k = static_cast<int>(labels.size());
    auto find_label = [&](const YAML::Node& at, const std::string& l) {
      const auto it = std::find(labels.begin(), labels.end(), l);
      if (it == labels.end()) fail(at, "unknown label '" + l + "'");
      return static_cast<int>(it - labels.begin());
    };
    std::vector<std::vector<ExtensionEntry>> table(k, std::vector<ExtensionEntry>(k));
    std::vector<std::vector<bool>> seen(k, std::vector<bool>(k, false));
    if (!node["table"].IsSequence()) fail(node["table"], "table must be a list of rows");
    for (const auto& row : node["table"]) {
      // "a b = c ; h1,h2,..."
      const auto text = get<std::string>(row, "table row");
      const auto eq = text.find('=');
      const auto semi = text.find(';');
      if (eq == std::string::npos || semi == std::string::npos || semi < eq) {
        fail(row, "table rows read 'a b = c ; h'");
      }
      const auto lhs = split_ws(text.substr(0, eq));
      const auto rhs = split_ws(text.substr(eq + 1, semi - eq - 1));
      if (lhs.size() != 2 || rhs.size() != 1) fail(row, "table rows read 'a b = c ; h'");
      const int i = find_label(row, lhs[0]), j = find_label(row, lhs[1]);
      if (seen[i][j]) fail(row, "duplicate table row for " + lhs[0] + " " + lhs[1]);
      seen[i][j] = true;
      table[i][j].product = find_label(row, rhs[0]);
      std::string h = text.substr(semi + 1);
      std::replace(h.begin(), h.end(), ',', ' ');
      const auto coords = split_ws(h);
      if (static_cast<int>(coords.size()) != rank) fail(row, "shift must have " + std::to_string(rank) + " coordinates");
      for (int a = 0; a < rank; ++a) {
        try {
          table[i][j].shift[a] = std::stoi(coords[static_cast<std::size_t>(a)]);
        } catch (const std::exception&) {
          fail(row, "bad shift coordinate '" + coords[static_cast<std::size_t>(a)] + "'");
        }
      }
    }
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        if (!seen[i][j]) fail(node["table"], "missing table row for " + labels[i] + " " + labels[j]);
      }
    }
    std::vector<LatticeMap> conj(k, identity_map());
    if (node["conjugation"] && !node["conjugation"].IsMap()) {
      fail(node["conjugation"], "conjugation must map labels to matrices");
    }
    if (const auto c = node["conjugation"]; c && c.size() > 0) {
      for (const auto& kv : c) {
        const int i = find_label(kv.first, kv.first.as<std::string>());
        if (!kv.second.IsSequence() || static_cast<int>(kv.second.size()) != rank) {
          fail(kv.second, "conjugation must be a " + std::to_string(rank) + "x" + std::to_string(rank) + " matrix");
        }
        LatticeMap m{};
        for (int r = 0; r < rank; ++r) {
          const Lattice row = get_lattice(kv.second[r], "conjugation row", rank, -1000000);
          for (int a = 0; a < rank; ++a) m[r][a] = row[a];
        }
        conj[i] = m;
      }
    }
    desc = at_node(node, [&] { return GroupDescriptor(rank, labels, table, conj, {}); });
  } else {
    fail(node["preset"], "unknown group preset '" + preset + "'");
  }
  if (node["partition"]) {
    const auto p = node["partition"];
    if (!p.IsSequence()) fail(p, "partition must be a list of label lists");
    std::vector<std::vector<int>> blocks;
    for (const auto& b : p) {
      std::vector<int> block;
      for (const auto& l : get_strings(b, "partition block")) block.push_back(at_node(b, [&] { return desc.label_index(l); }));
      blocks.push_back(block);
    }
    desc = at_node(p, [&] { return desc.with_partition(blocks); });
  }
  return desc;
}

Pattern parse_pattern_row(const GroupDescriptor& desc, const Alphabet& alphabet, const YAML::Node& row) {
  std::map<GroupPoint, Symbol> values;
  for (const auto& tok : split_ws(get<std::string>(row, "pattern row"))) {
    const auto eq = tok.rfind('=');
    if (eq == std::string::npos) fail(row, "pattern entries read 'point=symbol'");
    const GroupPoint g = at_node(row, [&] { return parse_point(desc, tok.substr(0, eq)); });
    const Symbol s = at_node(row, [&] { return alphabet.index(tok.substr(eq + 1)); });
    if (!values.emplace(g, s).second) fail(row, "point listed twice in pattern row");
  }
  if (values.empty()) fail(row, "empty pattern row");
  return Pattern::from_map(values);
}

SftSpec parse_subshift(const YAML::Node& node, const GroupDescriptor& desc) {
  check_keys(node, "subshift", {"preset", "alphabet", "transversal", "forbidden"});
  Alphabet alphabet = Alphabet::binary();
  if (node["alphabet"]) {
    alphabet = at_node(node["alphabet"], [&] { return Alphabet(get_strings(node["alphabet"], "alphabet")); });
  }
  const std::string preset = node["preset"] ? get<std::string>(node["preset"], "preset") : "";
  if (!preset.empty() && node["forbidden"]) fail(node["forbidden"], "forbidden rows and a preset are exclusive");
  if (node["transversal"] && preset != "golden_mean") fail(node["transversal"], "'transversal' needs golden_mean");
  if (preset == "full") return SftSpec::full(desc, alphabet);
  if (preset == "golden_mean" || preset == "no01_1d") {
    if (alphabet.size() != 2) fail(node["alphabet"], preset + " is binary");
    if (preset == "no01_1d") return at_node(node, [&] { return SftSpec::no01_1d(desc); });
    const bool tr = node["transversal"] ? get<bool>(node["transversal"], "transversal") : true;
    return at_node(node, [&] { return SftSpec::golden_mean(desc, tr); });
  }
  if (!preset.empty()) fail(node["preset"], "unknown subshift preset '" + preset + "'");
  if (!node["forbidden"]) fail(node, "subshift needs a preset or forbidden rows");
  const auto rows = node["forbidden"];
  if (!rows.IsSequence()) fail(rows, "forbidden must be a list of pattern rows");
  std::map<FiniteRegion, std::vector<Pattern>, bool (*)(const FiniteRegion&, const FiniteRegion&)> by_window(
      [](const FiniteRegion& a, const FiniteRegion& b) { return a.points() < b.points(); });
  for (const auto& row : rows) {
    Pattern p = parse_pattern_row(desc, alphabet, row);
    by_window[p.support()].push_back(std::move(p));
  }
  std::vector<ForbiddenBlock> blocks;
  for (const auto& [window, patterns] : by_window) {
    std::size_t size = 1;
    for (std::size_t i = 0; i < window.size(); ++i) size *= static_cast<std::size_t>(alphabet.size());
    ForbiddenBlock b{window, std::vector<bool>(size, false)};
    for (const auto& p : patterns) b.forbidden[pattern_code(p, window.points(), alphabet.size())] = true;
    blocks.push_back(std::move(b));
  }
  return at_node(rows, [&] { return SftSpec("inline", desc, alphabet, std::move(blocks)); });
}

Interaction parse_potential(const YAML::Node& node, const SftSpec& sft) {
  const auto& desc = sft.desc();
  check_keys(node, "potential", {"preset", "terms"});
  if (node["preset"] && node["terms"]) fail(node["terms"], "terms and a preset are exclusive");
  if (node["preset"]) {
    const auto tokens = split_ws(get<std::string>(node["preset"], "preset"));
    if (tokens.empty()) fail(node["preset"], "empty potential preset");
    std::map<std::string, double> params;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      const auto eq = tokens[i].find('=');
      if (eq == std::string::npos) fail(node["preset"], "preset parameters read 'name=value'");
      try {
        std::size_t used = 0;
        const std::string v = tokens[i].substr(eq + 1);
        params[tokens[i].substr(0, eq)] = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
      } catch (const std::exception&) {
        fail(node["preset"], "bad number in '" + tokens[i] + "'");
      }
    }
    auto take = [&](const std::string& k) {
      const auto it = params.find(k);
      if (it == params.end()) fail(node["preset"], tokens[0] + " needs " + k + "=...");
      const double v = it->second;
      params.erase(it);
      return v;
    };
    auto done = [&] {
      if (!params.empty()) fail(node["preset"], "unknown parameter '" + params.begin()->first + "'");
    };
    if (tokens[0] == "zero") {
      done();
      return Interaction::zero(desc, sft.alphabet().size());
    }
    if (tokens[0] == "hardcore") {
      const double lambda = take("lambda");
      done();
      return at_node(node["preset"], [&] { return Interaction::hardcore(desc, lambda); });
    }
    if (tokens[0] == "ising") {
      const double beta = take("beta");
      const double field = take("field");
      done();
      return at_node(node["preset"], [&] { return Interaction::ising(desc, beta, field); });
    }
    fail(node["preset"], "unknown potential preset '" + tokens[0] + "'");
  }
  if (!node["terms"]) return Interaction::zero(desc, sft.alphabet().size());
  const auto terms_node = node["terms"];
  if (!terms_node.IsSequence()) fail(terms_node, "terms must be a list");
  std::vector<InteractionTerm> terms;
  for (const auto& t : terms_node) {
    check_keys(t, "term", {"shape", "table"});
    if (!t["shape"] || !t["table"]) fail(t, "terms need a shape and a table");
    std::vector<GroupPoint> pts;
    for (const auto& s : get_strings(t["shape"], "shape")) pts.push_back(at_node(t["shape"], [&] { return parse_point(desc, s); }));
    const FiniteRegion shape(pts);
    if (shape.size() != pts.size()) fail(t["shape"], "shape lists a point twice");
    if (!t["table"].IsSequence()) fail(t["table"], "table must be a list of energies");
    std::vector<double> table;
    for (const auto& v : t["table"]) table.push_back(get_double(v, "energy"));
    terms.push_back({shape, std::move(table)});
  }
  return at_node(terms_node, [&] { return Interaction("inline", desc, sft.alphabet().size(), std::move(terms)); });
}

ScheduleSpec parse_schedule(const YAML::Node& node) {
  check_keys(node, "schedule", {"shape", "n_max", "depth", "collar", "max_width", "margin", "budget"});
  ScheduleSpec s;
  if (node["shape"]) {
    s.shape = get<std::string>(node["shape"], "shape");
    if (s.shape != "centered_boxes" && s.shape != "corner_boxes") fail(node["shape"], "unknown schedule shape '" + s.shape + "'");
  }
  if (node["n_max"]) s.n_max = get_int(node["n_max"], "n_max", 0);
  if (node["depth"]) s.depth = get_int(node["depth"], "depth", 0);
  if (node["collar"]) s.collar = get_int(node["collar"], "collar", 0);
  if (node["max_width"]) s.max_width = get_int(node["max_width"], "max_width", 1);
  if (node["margin"]) s.margin = get_int(node["margin"], "margin", 0);
  if (node["budget"]) s.budget = static_cast<std::size_t>(get_int(node["budget"], "budget", 1));
  return s;
}

MeasureSpec parse_measure(const YAML::Node& node, const std::string& name, const SftSpec& sft) {
  const auto& desc = sft.desc();
  check_keys(node, "measure " + name,
             {"kind", "period", "values", "transition", "sides", "max_sites", "sweeps", "samples", "thin", "radius",
              "strategy", "ergodic"});
  MeasureSpec m;
  m.name = name;
  if (!node["kind"]) fail(node, "measure " + name + " needs a kind");
  m.kind = get<std::string>(node["kind"], "kind");
  static const std::set<std::string> kinds{"atomic", "periodic_orbit", "markov", "chain", "torus", "glauber", "bracket"};
  if (!kinds.count(m.kind)) fail(node["kind"], "unknown measure kind '" + m.kind + "'");
  auto require = [&](const char* key) {
    if (!node[key]) fail(node, "measure " + name + " (" + m.kind + ") needs '" + key + "'");
  };
  for (int a = 0; a < desc.rank(); ++a) m.period[a] = 1;
  if (node["period"]) m.period = get_lattice(node["period"], "period", desc.rank(), 1);
  if (node["values"]) {
    const auto v = node["values"];
    if (v.IsScalar()) {
      for (char c : get<std::string>(v, "values")) {
        m.values.push_back(at_node(v, [&] { return sft.alphabet().index(std::string(1, c)); }));
      }
    } else {
      for (const auto& s : get_strings(v, "values")) m.values.push_back(at_node(v, [&] { return sft.alphabet().index(s); }));
    }
  }
  if (node["transition"]) {
    if (!node["transition"].IsSequence()) fail(node["transition"], "transition must be a matrix");
    for (const auto& row : node["transition"]) {
      if (!row.IsSequence()) fail(row, "transition rows must be lists");
      std::vector<double> r;
      for (const auto& x : row) r.push_back(get_double(x, "transition entry"));
      m.transition.push_back(std::move(r));
    }
  }
  if (node["sides"]) m.sides = get_lattice(node["sides"], "sides", desc.rank(), 1);
  if (node["max_sites"]) m.max_sites = get_int(node["max_sites"], "max_sites", 1);
  if (node["sweeps"]) m.sweeps = get_int(node["sweeps"], "sweeps", 0);
  if (node["samples"]) m.samples = get_int(node["samples"], "samples", 1);
  if (node["thin"]) m.thin = get_int(node["thin"], "thin", 1);
  if (node["radius"]) m.radius = get_int(node["radius"], "radius", 1);
  if (node["strategy"]) {
    const auto s = get<std::string>(node["strategy"], "strategy");
    if (s == "automatic") m.strategy = BracketStrategy::automatic;
    else if (s == "exhaustive") m.strategy = BracketStrategy::exhaustive;
    else if (s == "monotone") m.strategy = BracketStrategy::monotone;
    else fail(node["strategy"], "unknown bracket strategy '" + s + "'");
  }
  if (node["ergodic"]) m.ergodic = get<bool>(node["ergodic"], "ergodic");
  if (m.kind == "atomic" || m.kind == "periodic_orbit") require("values");
  if (m.kind == "chain") require("transition");
  if (m.kind == "torus" || m.kind == "glauber") require("sides");
  return m;
}

RunSpec parse_run(const YAML::Node& node, const std::map<std::string, MeasureSpec>& measures) {
  check_keys(node, "run", {"measure", "mu", "tolerance", "reference", "seed", "out", "threads"});
  RunSpec r;
  auto measure_name = [&](const char* key) {
    const auto v = get<std::string>(node[key], key);
    if (!measures.count(v)) fail(node[key], std::string(key) + " names an undefined measure '" + v + "'");
    return v;
  };
  if (node["measure"]) r.measure = measure_name("measure");
  if (node["mu"]) r.mu = measure_name("mu");
  if (node["tolerance"]) {
    r.tolerance = get_double(node["tolerance"], "tolerance");
    if (*r.tolerance <= 0.0) fail(node["tolerance"], "tolerance must be positive");
  }
  if (node["reference"]) r.reference = get_double(node["reference"], "reference");
  if (node["seed"]) r.seed = get<std::uint64_t>(node["seed"], "seed");
  if (node["out"]) r.out = get<std::string>(node["out"], "out");
  if (node["threads"]) r.threads = get_int(node["threads"], "threads", 1);
  return r;
}

}  // namespace

GroupPoint parse_point(const GroupDescriptor& desc, const std::string& text) {
  GroupPoint g;
  std::string coords = text;
  if (const auto at = text.find('@'); at != std::string::npos) {
    g.coset = desc.label_index(text.substr(0, at));
    coords = text.substr(at + 1);
  }
  std::replace(coords.begin(), coords.end(), ',', ' ');
  const auto parts = split_ws(coords);
  if (static_cast<int>(parts.size()) != desc.rank()) {
    throw PreconditionError("point '" + text + "' needs " + std::to_string(desc.rank()) + " coordinates");
  }
  for (int a = 0; a < desc.rank(); ++a) {
    try {
      std::size_t used = 0;
      g.h[a] = std::stoi(parts[static_cast<std::size_t>(a)], &used);
      if (used != parts[static_cast<std::size_t>(a)].size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      throw PreconditionError("bad coordinate in point '" + text + "'");
    }
  }
  return g;
}

std::string format_point_spec(const GroupDescriptor& desc, const GroupPoint& g) {
  std::string out = g.coset == 0 ? "" : desc.labels()[static_cast<std::size_t>(g.coset)] + "@";
  for (int a = 0; a < desc.rank(); ++a) out += (a ? "," : "") + std::to_string(g.h[a]);
  return out;
}

ModelSpec parse_model_spec(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root.IsMap()) throw ParseError("model spec must be a mapping", 1, 1);
  check_keys(root, "model spec", {"group", "subshift", "potential", "schedule", "measures", "run"});
  if (!root["group"]) throw ParseError("missing 'group' block", 1, 1);
  if (!root["subshift"]) throw ParseError("missing 'subshift' block", 1, 1);
  ModelSpec spec;
  spec.text = text;
  spec.group = parse_group(root["group"]);
  spec.sft = parse_subshift(root["subshift"], spec.group);
  if (root["potential"]) {
    spec.phi = parse_potential(root["potential"], spec.sft);
  } else {
    spec.phi = Interaction::zero(spec.group, spec.sft.alphabet().size());
  }
  if (root["schedule"]) spec.schedule = parse_schedule(root["schedule"]);
  if (root["measures"]) {
    const auto ms = root["measures"];
    if (!ms.IsMap()) fail(ms, "measures must map names to definitions");
    for (const auto& kv : ms) {
      const auto name = kv.first.as<std::string>();
      spec.measures[name] = parse_measure(kv.second, name, spec.sft);
    }
  }
  if (root["run"]) spec.run = parse_run(root["run"], spec.measures);
  return spec;
}

ModelSpec load_model_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot read spec file " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_model_spec(os.str());
}

FolnerSchedule make_schedule(const ScheduleSpec& s) {
  return s.shape == "corner_boxes" ? FolnerSchedule::corner_boxes() : FolnerSchedule::centered_boxes();
}

std::unique_ptr<MeasureOracle> build_measure(const ModelSpec& spec, const MeasureSpec& m, std::uint64_t seed) {
  const auto& desc = spec.group;
  const int q = spec.sft.alphabet().size();
  std::unique_ptr<MeasureOracle> out;
  if (m.kind == "atomic") {
    out = std::make_unique<PointMixtureOracle>(PointMixtureOracle::atomic(desc, q, PeriodicPoint(desc, m.period, m.values)));
  } else if (m.kind == "periodic_orbit") {
    out = std::make_unique<PointMixtureOracle>(
        PointMixtureOracle::periodic_orbit(desc, q, PeriodicPoint(desc, m.period, m.values)));
  } else if (m.kind == "markov") {
    out = std::make_unique<MarkovOracle>(MarkovOracle::gibbs(spec.phi, spec.sft));
    out->set_ergodic(true);
  } else if (m.kind == "chain") {
    out = std::make_unique<MarkovOracle>(MarkovOracle::from_chain(desc, q, m.transition));
  } else if (m.kind == "torus") {
    out = std::make_unique<PointMixtureOracle>(
        exact_torus(spec.phi, spec.sft, m.sides, static_cast<std::size_t>(m.max_sites)));
  } else if (m.kind == "glauber") {
    GlauberOptions opt;
    opt.sides = m.sides;
    opt.sweeps = m.sweeps;
    opt.samples = m.samples;
    opt.thin = m.thin;
    opt.seed = seed;
    out = std::make_unique<PointMixtureOracle>(glauber_sampler(spec.phi, spec.sft, opt));
  } else if (m.kind == "bracket") {
    BracketOptions opt;
    opt.radius = m.radius;
    opt.strategy = m.strategy;
    opt.state_budget = spec.schedule.budget;
    out = std::make_unique<GibbsBracketOracle>(spec.phi, spec.sft, opt);
  } else {
    throw PreconditionError("unknown measure kind '" + m.kind + "'");
  }
  if (m.ergodic) out->set_ergodic(*m.ergodic);
  return out;
}

std::unique_ptr<MeasureOracle> build_measure(const ModelSpec& spec, const std::string& name, std::uint64_t seed) {
  const auto it = spec.measures.find(name);
  if (it == spec.measures.end()) throw PreconditionError("undefined measure '" + name + "'");
  return build_measure(spec, it->second, seed);
}

namespace {

char symbol_digit(Symbol s) { return s < 10 ? static_cast<char>('0' + s) : static_cast<char>('a' + s - 10); }

Symbol digit_symbol(char c) {
  if (c >= '0' && c <= '9') return static_cast<Symbol>(c - '0');
  if (c >= 'a' && c <= 'z') return static_cast<Symbol>(c - 'a' + 10);
  throw PreconditionError(std::string("bad symbol digit '") + c + "'");
}

}  // namespace

std::string samples_to_csv(const std::vector<PeriodicPoint>& samples, std::uint64_t seed) {
  std::ostringstream os;
  os << "# seed=" << seed << "\n";
  os << "sample,period,values\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    os << i << ",";
    for (int a = 0; a < s.rank(); ++a) os << (a ? "x" : "") << s.period()[a];
    os << ",b";
    for (Symbol v : s.values()) os << symbol_digit(v);
    os << "\n";
  }
  return os.str();
}

std::vector<PeriodicPoint> samples_from_csv(const GroupDescriptor& desc, const std::string& csv, std::uint64_t* seed) {
  std::istringstream is(csv);
  std::string line;
  std::vector<PeriodicPoint> out;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line.rfind("# seed=", 0) != 0) throw ParseError("missing seed header", 1, 1);
      if (seed) *seed = std::stoull(line.substr(7));
      continue;
    }
    if (lineno == 2 || line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos || line.size() <= c2 + 1 || line[c2 + 1] != 'b') {
      throw ParseError("sample rows read 'index,period,b<digits>'", lineno, 1);
    }
    std::string per = line.substr(c1 + 1, c2 - c1 - 1);
    std::replace(per.begin(), per.end(), 'x', ' ');
    const auto parts = split_ws(per);
    if (static_cast<int>(parts.size()) != desc.rank()) throw ParseError("period has the wrong rank", lineno, static_cast<int>(c1) + 2);
    Lattice period{};
    for (int a = 0; a < desc.rank(); ++a) period[a] = std::stoi(parts[static_cast<std::size_t>(a)]);
    std::vector<Symbol> values;
    for (char ch : line.substr(c2 + 2)) values.push_back(digit_symbol(ch));
    out.emplace_back(desc, period, std::move(values));
  }
  return out;
}

}  // namespace cavitypress
