// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cavitypress/gibbs.hpp"
#include "cavitypress/pressure.hpp"

using namespace cavitypress;
namespace fs = std::filesystem;

namespace {

const double kLogPhi = std::log((1.0 + std::sqrt(5.0)) / 2.0);
// Width-10 strip value for hard squares at activity 1, from tests/oracles/strip_oracle.py.
const double kHardSquares = 0.407502471475487;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string sci(double v) { return fmt("%.3e", v); }

FiniteRegion seg(int lo, int hi) {
  return FiniteRegion::box(0, Lattice{lo, 0, 0, 0}, Lattice{hi - 1, 0, 0, 0}, 1);
}

Outcome topological_entropy() {
  const auto z1 = GroupDescriptor::lattice(1);
  const auto gm = SftSpec::golden_mean(z1);
  const auto zero = Interaction::zero(z1, 2);
  const double p = transfer_pressure_1d(zero, gm);
  const auto s = pressure_sequence(zero, gm, FolnerSchedule::centered_boxes(), 12);
  const double e1 = std::fabs(p - kLogPhi);
  const double e2 = std::fabs(s.back().value.mid() - kLogPhi);
  return {e1 <= 1e-12 && e2 <= 5e-2,
          "|transfer - log phi| = " + sci(e1) + " (tol 1e-12), |P_12 - log phi| = " + sci(e2) + " (tol 5e-2)"};
}

Outcome cavity_1d() {
  const auto z1 = GroupDescriptor::lattice(1);
  const auto nu = PointMixtureOracle::atomic(z1, 2, PeriodicPoint::constant(z1, 0));
  const auto c = cavity_pressure(Interaction::hardcore(z1, 1.0), SftSpec::golden_mean(z1), z1, nu, 30);
  if (c.refused()) return {false, "refused, Cauchy defect " + sci(c.cauchy_defect)};
  const bool pass = c.value->width() < 1e-6 && c.value->contains(kLogPhi);
  return {pass, "depth 30 interval [" + fmt("%.12f", c.value->lo) + ", " + fmt("%.12f", c.value->hi) + "], width " +
                    sci(c.value->width()) + " (tol 1e-6), contains log phi: " + (c.value->contains(kLogPhi) ? "yes" : "no")};
}

Outcome decomposition() {
  const auto z1 = GroupDescriptor::lattice(1);
  const auto gm = SftSpec::golden_mean(z1);
  const auto mu = MarkovOracle::gibbs(Interaction::hardcore(z1, 1.0), gm);
  const auto boxes = FolnerSchedule::centered_boxes();
  double worst_markov = 0.0;
  std::size_t cylinders = 0;
  for (int n = 1; n <= 8; ++n) {
    for (const auto& x : enumerate_patterns(gm, boxes.tiles(z1, n), 1)) {
      worst_markov = std::max(worst_markov, decomposition_check(mu, z1, boxes, n, x).residual);
      ++cylinders;
    }
  }

  const auto split = GroupDescriptor::cyclic_extension(1, 2, true);
  const auto joint = split.with_partition({{0, 1}});
  const auto sft = SftSpec::golden_mean(split, false);
  const auto pmu = MarkovOracle::gibbs(Interaction::hardcore(split, 1.0), sft);
  const auto corner = FolnerSchedule::corner_boxes();
  double worst_product = 0.0, worst_agree = 0.0;
  for (int n = 1; n <= 8; ++n) {
    for (const auto& x : enumerate_patterns(sft, corner.tiles(split, n), 1)) {
      const auto two = decomposition_check(pmu, split, corner, n, x);
      const auto one = decomposition_check(pmu, joint, corner, n, x);
      worst_product = std::max({worst_product, two.residual, one.residual});
      worst_agree = std::max(worst_agree, std::fabs(one.sum - two.sum));
      ++cylinders;
    }
  }
  const bool pass = worst_markov <= 1e-10 && worst_product <= 1e-10 && worst_agree <= 1e-10;
  return {pass, std::to_string(cylinders) + " cylinders; max residual Markov " + sci(worst_markov) + ", product " +
                    sci(worst_product) + ", |sum(l=1) - sum(l=2)| " + sci(worst_agree) + " (tol 1e-10)"};
}

Outcome hard_squares() {
  const auto z2 = GroupDescriptor::lattice(2);
  const auto gm = SftSpec::golden_mean(z2);
  const auto hc = Interaction::hardcore(z2, 1.0);
  const auto strip = strip_pressure_2d(hc, gm, 8);
  const bool strip_ok = strip.bracket.width() < 2e-2 && strip.bracket.contains(kHardSquares);
  const auto nu = PointMixtureOracle::atomic(z2, 2, PeriodicPoint::constant(z2, 0));
  CavityOptions opt;
  opt.tolerance = 1e-2;
  const auto c = cavity_pressure(hc, gm, z2, nu, 12, opt);
  std::string detail = "strip bracket [" + fmt("%.9f", strip.bracket.lo) + ", " + fmt("%.9f", strip.bracket.hi) +
                       "] width " + sci(strip.bracket.width()) + " (tol 2e-2), contains oracle " +
                       fmt("%.9f", kHardSquares) + ": " + (strip.bracket.contains(kHardSquares) ? "yes" : "no");
  if (c.refused()) return {false, detail + "; cavity refused, Cauchy defect " + sci(c.cauchy_defect)};
  const double dist = std::max(std::fabs(c.value->lo - kHardSquares), std::fabs(c.value->hi - kHardSquares));
  detail += "; cavity depth 12 [" + fmt("%.6f", c.value->lo) + ", " + fmt("%.6f", c.value->hi) +
            "], farthest endpoint " + sci(dist) + " from oracle (tol 1e-2)";
  return {strip_ok && dist <= 1e-2, detail};
}

Outcome folner_suite() {
  const auto boxes = FolnerSchedule::centered_boxes();
  double worst_defect = 0.0;
  for (int rank = 1; rank <= 2; ++rank) {
    const auto d = GroupDescriptor::lattice(rank);
    for (const auto& g : d.generators()) {
      // C_g = 1 for unit steps.
      for (int n = 1; n <= 50; ++n) worst_defect = std::max(worst_defect, n * folner_defect(d, boxes, n, g).value());
    }
  }
  const auto k2 = GroupDescriptor::cyclic_extension(1, 2);
  double worst_core = 0.0;
  for (int n = 1; n <= 50; ++n) {
    const auto t = boxes.tiles(k2, n);
    const double ratio = static_cast<double>(coset_fill(k2, inner_core(k2, t)).size()) / t.size();
    worst_core = std::max(worst_core, n * (1.0 - ratio));
  }
  const auto z1 = GroupDescriptor::lattice(1);
  const double tempered = tempered_constant(z1, FolnerSchedule::corner_boxes(), 50).value();
  auto family = [](int j) { return seg(-j, j + 1); };
  const auto gamma = gamma_schedule(z1, boxes, family, 50);
  bool gamma_ok = true;
  for (int n = 1; n <= 50; ++n) {
    const double ratio =
        static_cast<double>(shrunk_core(z1, boxes, n, family(gamma(n))).size()) / boxes.core(z1, n).size();
    gamma_ok = gamma_ok && ratio >= 1.0 - 1.0 / gamma(n);
  }
  const bool pass = worst_defect <= 1.0 && worst_core <= 1.0 && tempered <= 2.0 && gamma_ok;
  return {pass, "max n*defect " + fmt("%.4f", worst_defect) + " (C_g = 1), max n*(1 - core ratio) " +
                    fmt("%.4f", worst_core) + " (c = 1), tempered constant " + fmt("%.4f", tempered) +
                    " (<= 2), gamma inequality " + (gamma_ok ? "holds" : "fails") + " for n <= 50"};
}

Outcome gibbs_bounds() {
  const auto z1 = GroupDescriptor::lattice(1);
  const auto gm = SftSpec::golden_mean(z1);
  bool sandwich = true, smb = true;
  std::size_t cylinders = 0;
  for (double lambda : {1.0, 2.0}) {
    const auto hc = Interaction::hardcore(z1, lambda);
    const auto mu = MarkovOracle::gibbs(hc, gm);
    for (int n = 1; n <= 10; ++n) {
      const auto r = rn_bound(hc, gm, seg(0, n), seg(-1, n + 1));
      const auto s = sandwich_check(mu, hc, gm, seg(0, n), r.value);
      sandwich = sandwich && s.passed;
      smb = smb && s.max_smb_ratio <= std::log(2.0) + 2 * norm(hc) + r.value / n;
      cylinders += s.cylinders;
    }
  }
  const auto hc = Interaction::hardcore(z1, 1.0);
  bool decreasing = true;
  double prev = 1e300;
  for (int n = 1; n <= 40; ++n) {
    const double ratio = rn_bound(hc, gm, seg(0, n), seg(-1, n + 1)).value / n;
    decreasing = decreasing && ratio < prev;
    prev = ratio;
  }
  const bool pass = sandwich && smb && decreasing && prev < 0.1;
  return {pass, "sandwich " + std::string(sandwich ? "holds" : "fails") + " on " + std::to_string(cylinders) +
                    " cylinders, SMB bound " + (smb ? "holds" : "fails") + ", r_n/|T_n| " +
                    (decreasing ? "decreasing" : "not decreasing") + " to " + fmt("%.4f", prev) + " at n=40 (< 0.1)"};
}

Outcome variational() {
  const auto z1 = GroupDescriptor::lattice(1);
  const auto gm = SftSpec::golden_mean(z1);
  const auto hc = Interaction::hardcore(z1, 1.0);
  const double p = transfer_pressure_1d(hc, gm);
  const double atomic = variational_gap(p, hc, PointMixtureOracle::atomic(z1, 2, PeriodicPoint::constant(z1, 0))).gap;
  const double periodic = variational_gap(
      p, hc, PointMixtureOracle::periodic_orbit(z1, 2, PeriodicPoint(z1, Lattice{3, 0, 0, 0}, {1, 0, 0}))).gap;
  const double gibbs = variational_gap(p, hc, MarkovOracle::gibbs(hc, gm)).gap;
  // Bernoulli(3/4) charges 11, so it lives on the full shift.
  const auto full = SftSpec::full(z1, Alphabet::binary());
  const auto zero = Interaction::zero(z1, 2);
  const double bern =
      variational_gap(transfer_pressure_1d(zero, full), zero, MarkovOracle::from_chain(z1, 2, {{0.75, 0.25}, {0.75, 0.25}})).gap;
  const double h34 = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25));
  const double bern_err = std::fabs(bern - (std::log(2.0) - h34));
  const bool pass = atomic >= -1e-9 && periodic >= -1e-9 && gibbs >= -1e-9 && bern >= -1e-9 &&
                    std::fabs(gibbs) <= 1e-9 && bern_err <= 1e-9;
  return {pass, "gaps: atomic " + fmt("%.6f", atomic) + ", periodic " + fmt("%.6f", periodic) + ", Gibbs " +
                    sci(gibbs) + ", Bernoulli(3/4) " + fmt("%.6f", bern) + " (|gap - (log 2 - H)| = " + sci(bern_err) +
                    ", tol 1e-9)"};
}

Outcome l1_equivalence() {
  const auto z1 = GroupDescriptor::lattice(1);
  const auto gm = SftSpec::golden_mean(z1);
  const auto hc = Interaction::hardcore(z1, 1.0);
  const auto mu = MarkovOracle::gibbs(hc, gm);
  const auto x = PeriodicPoint::constant(z1, 0);
  const auto nu = PointMixtureOracle::atomic(z1, 2, x);
  const auto boxes = FolnerSchedule::centered_boxes();
  const int n_max = 100;
  const double p = transfer_pressure_1d(hc, gm);
  const auto smb = smb_ratio_series(mu, x, boxes, n_max, &hc, p);
  const auto f = LocalFunction::constant(z1, p);
  // Last depth at or above the threshold, plus one.
  int n_l1 = 1, n_smb = 1;
  for (int n = 1; n <= n_max; ++n) {
    const auto k = static_cast<std::size_t>(n - 1);
    const double gap = std::fabs(smb.ratio.points()[k].value.mid() - smb.prediction.points()[k].value.mid());
    if (gap >= 1e-3) n_smb = n + 1;
    if (l1_defect(mu, nu, z1, boxes, 1, n, f).total.hi >= 1e-3) n_l1 = n + 1;
  }
  const bool reached = n_l1 <= n_max && n_smb <= n_max;
  return {reached && std::abs(n_l1 - n_smb) <= 2,
          "L1 defect below 1e-3 from n=" + std::to_string(n_l1) + ", |SMB - prediction| from n=" +
              std::to_string(n_smb) + " (allowed offset 2, n <= " + std::to_string(n_max) + ")"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string without_timestamp(const std::string& text) {
  std::istringstream is(text);
  std::string out;
  for (std::string line; std::getline(is, line);) {
    if (line.find("\"timestamp\":") == std::string::npos) out += line + "\n";
  }
  return out;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("cavitypress_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::vector<std::string> specs{"hardcore_glauber.yaml", "product_z_z2.yaml"};
  const std::vector<std::string> commands{"pressure", "cavity", "smb", "decompose", "check", "entropy"};
  std::size_t compared = 0;
  std::vector<std::string> diffs;
  for (const auto& spec : specs) {
    for (const auto& cmd : commands) {
      std::vector<std::map<std::string, std::string>> runs;
      int run_id = 0;
      for (int threads : {1, 1, 8, 8}) {
        const fs::path out = root / (spec + "_" + cmd + "_" + std::to_string(run_id++));
        fs::create_directories(out);
        const std::string line = std::string("\"") + CLI_PATH + "\" " + cmd + " --spec \"" + TEST_DATA_DIR + "/" +
                                 spec + "\" --out \"" + out.string() + "\" --threads " + std::to_string(threads) +
                                 " > \"" + (out / "stdout.txt").string() + "\" 2>&1";
        std::system(line.c_str());
        std::map<std::string, std::string> files;
        for (const auto& e : fs::directory_iterator(out)) {
          const auto name = e.path().filename().string();
          files[name] = name.ends_with(".json") ? without_timestamp(slurp(e.path())) : slurp(e.path());
        }
        runs.push_back(std::move(files));
      }
      if (runs[0].size() < 2 || !runs[0].count(cmd + ".json")) {
        diffs.push_back(spec + " " + cmd + ": no output");
        continue;
      }
      for (std::size_t k = 1; k < runs.size(); ++k) {
        if (runs[k] != runs[0]) diffs.push_back(spec + " " + cmd + " run " + std::to_string(k));
      }
      compared += runs[0].size();
    }
  }
  fs::remove_all(root);
  std::string detail = std::to_string(compared) + " artifacts compared over 1,1,8,8 threads";
  for (const auto& d : diffs) detail += "; differs: " + d;
  return {diffs.empty(), detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "golden-mean topological entropy", 5, topological_entropy},
      {2, "cavity representation, hardcore 1D", 10, cavity_1d},
      {3, "sequential decomposition identity", 60, decomposition},
      {4, "hard squares strip and cavity", 600, hard_squares},
      {5, "Folner and coset suite", 5, folner_suite},
      {6, "Gibbs bound suite", 30, gibbs_bounds},
      {7, "variational principle", 5, variational},
      {8, "L1 defect and SMB equivalence", 30, l1_equivalence},
      {9, "determinism across runs and threads", 900, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail << "; "
              << fmt("%.2f", secs) << " s (limit " << fmt("%.0f", c.limit_seconds) << " s)" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
