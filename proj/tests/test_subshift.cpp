#include <doctest.h>

#include <random>

#include "cavitypress/errors.hpp"
#include "support.hpp"

using namespace cavitypress;
using namespace testing;

namespace {

const GroupDescriptor& z1() {
  static const auto d = GroupDescriptor::lattice(1);
  return d;
}

SftSpec forbid(const std::vector<std::string>& words) {
  return SftSpec::from_words("test", z1(), Alphabet::binary(), seg(0, 2), words);
}

}  // namespace

TEST_CASE("local admissibility") {
  const auto gm = SftSpec::golden_mean(z1());
  CHECK(locally_admissible(gm, word("101")));
  CHECK_FALSE(locally_admissible(gm, word("110")));
  CHECK(locally_admissible(gm, Pattern()));
  const auto full = SftSpec::full(z1(), Alphabet({"a", "b"}));
  CHECK(locally_admissible(full, word("1101", -2)));
  // Windows only count when the whole translate is inside the support.
  CHECK(locally_admissible(gm, Pattern(FiniteRegion({pt(0), pt(2)}), {1, 1})));
}

TEST_CASE("enumerate patterns") {
  const auto gm = SftSpec::golden_mean(z1());
  const auto two = enumerate_patterns(gm, seg(0, 2), 0);
  REQUIRE(two.size() == 3);
  CHECK(two[0] == word("00"));
  CHECK(two[1] == word("01"));
  CHECK(two[2] == word("10"));
  for (int n = 1; n <= 12; ++n) {
    const auto count = golden_words(n);
    CHECK(count == fibonacci(n + 2));
    for (int r = 0; r <= 2; ++r) CHECK(enumerate_patterns(gm, seg(0, n), r).size() == count);
  }
  const auto full = SftSpec::full(z1(), Alphabet({"a", "b"}));
  CHECK(enumerate_patterns(full, seg(0, 3), 0).size() == 8);

  EnumerationLimits tiny;
  tiny.patterns = 10;
  CHECK_THROWS_AS(enumerate_patterns(gm, seg(0, 10), 0, tiny), ResourceError);
}

TEST_CASE("collar shrinks the enumeration") {
  // 01 may not be followed by anything, so a collar removes words ending in 01.
  const auto sft = SftSpec::from_words("x", z1(), Alphabet::binary(), seg(0, 3), {"010", "011"});
  std::size_t prev = SIZE_MAX;
  for (int r = 0; r <= 3; ++r) {
    const auto c = enumerate_patterns(sft, seg(0, 3), r).size();
    CHECK(c <= prev);
    prev = c;
  }
  CHECK(enumerate_patterns(sft, seg(0, 3), 0).size() > enumerate_patterns(sft, seg(0, 3), 1).size());
}

TEST_CASE("golden mean on Z^2 boxes matches brute force") {
  const auto z2 = GroupDescriptor::lattice(2);
  const auto gm = SftSpec::golden_mean(z2);
  for (int w = 1; w <= 3; ++w)
    for (int h = 1; h <= 3; ++h) {
      const auto r = FiniteRegion::box(0, Lattice{0, 0, 0, 0}, Lattice{w - 1, h - 1, 0, 0}, 2);
      CHECK(enumerate_patterns(gm, r, 1).size() == static_cast<std::size_t>(grid_hardcore_partition(w, h, 1.0)));
    }
}

TEST_CASE("safe symbol") {
  CHECK(safe_symbol(SftSpec::golden_mean(z1())) == Symbol{0});
  CHECK(safe_symbol(SftSpec::full(z1(), Alphabet({"a", "b", "c"}))) == Symbol{0});
  CHECK_FALSE(safe_symbol(forbid({"00", "11"})).has_value());
  CHECK(safe_symbol(SftSpec::golden_mean(GroupDescriptor::lattice(2))) == Symbol{0});
}

TEST_CASE("tssm gap check") {
  const auto full = SftSpec::full(z1(), Alphabet::binary());
  CHECK(tssm_gap_check(full, 0, seg(0, 4)).passed);
  const auto gm = SftSpec::golden_mean(z1());
  const auto r = tssm_gap_check(gm, 2, seg(0, 6));
  CHECK(r.passed);
  CHECK(r.pairs_checked > 0);
  for (int g = 2; g <= 5; ++g) CHECK(tssm_gap_check(gm, g, seg(0, 6)).passed);
  CHECK_FALSE(tssm_gap_check(gm, 1, seg(0, 4)).passed);

  const auto no01 = SftSpec::no01_1d(z1());
  const auto bad = tssm_gap_check(no01, 2, seg(0, 6));
  CHECK_FALSE(bad.passed);
  REQUIRE(bad.witness.has_value());
  const bool glued = compatible(bad.witness->first, bad.witness->second) &&
                     extendable(no01, concat(bad.witness->first, bad.witness->second), seg(-1, 7));
  CHECK_FALSE(glued);
  CHECK_THROWS_AS(tssm_gap_check(gm, 2, seg(0, 10), -1, 100), ResourceError);
}

TEST_CASE("condition (D)") {
  const auto gm = SftSpec::golden_mean(z1());
  for (int n = 1; n <= 4; ++n) CHECK(condition_d_check(gm, seg(0, n), seg(-1, n + 1)).passed);
  const auto full = SftSpec::full(z1(), Alphabet::binary());
  CHECK(condition_d_check(full, seg(0, 3), seg(0, 3)).passed);

  const auto no01 = SftSpec::no01_1d(z1());
  const auto r = condition_d_check(no01, seg(0, 1), seg(0, 1));
  CHECK_FALSE(r.passed);
  REQUIRE(r.witness.has_value());
  CHECK_FALSE(locally_admissible(no01, concat(r.witness->first, r.witness->second)));

  // A safe symbol makes the one-step collar sufficient, on boxes up to side 4 in rank 1 and 2.
  for (int s = 1; s <= 4; ++s) CHECK(condition_d_check(gm, seg(0, s), unite(seg(0, s), collar(z1(), seg(0, s), 1))).passed);
  const auto z2 = GroupDescriptor::lattice(2);
  const auto gm2 = SftSpec::golden_mean(z2);
  for (int s = 1; s <= 2; ++s) {
    const auto t = FiniteRegion::box(0, Lattice{0, 0, 0, 0}, Lattice{s - 1, s - 1, 0, 0}, 2);
    CHECK(condition_d_check(gm2, t, unite(t, collar(z2, t, 1))).passed);
  }
  for (int s = 3; s <= 4; ++s) {
    const auto t = FiniteRegion::box(0, Lattice{0, 0, 0, 0}, Lattice{s - 1, s - 1, 0, 0}, 2);
    CHECK(condition_d_check(gm2, t, unite(t, collar(z2, t, 1)), CheckMode::sampled, 300, 5).passed);
  }
  CHECK_THROWS_AS(condition_d_check(gm, seg(0, 3), seg(0, 2)), PreconditionError);
}

TEST_CASE("translation") {
  const auto p = word("01");
  CHECK(translate(z1(), p, z1().identity()) == p);
  const auto q = translate(z1(), p, pt(1));
  CHECK(q.support() == seg(-1, 1));
  CHECK(q.value(pt(-1)) == 0);
  CHECK(q.value(pt(0)) == 1);

  const auto k2 = GroupDescriptor::cyclic_extension(2, 2);
  std::mt19937_64 rng(4);
  const auto b = ball(k2, k2.identity(), 3).points();
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<GroupPoint> sup;
    std::vector<Symbol> vals;
    for (const auto& g : b) {
      if (rng() % 4 == 0) sup.push_back(g);
    }
    const FiniteRegion r(sup);
    for (std::size_t i = 0; i < r.size(); ++i) vals.push_back(static_cast<Symbol>(rng() % 3));
    const Pattern x(r, vals);
    const auto g1 = b[rng() % b.size()], g2 = b[rng() % b.size()];
    CHECK(translate(k2, translate(k2, x, g1), g2) == translate(k2, x, k2.multiply(g2, g1)));
    CHECK(translate(k2, translate(k2, x, g1), k2.inverse(g1)) == x);
    // (g . x)(h) = x(h g)
    const auto y = translate(k2, x, g1);
    for (const auto& h : y.support()) CHECK(y.value(h) == x.value(k2.multiply(h, g1)));
  }
}

TEST_CASE("concatenation") {
  CHECK(concat(word("01"), word("10", 2)) == word("0110"));
  CHECK_THROWS_AS(concat(word("01"), word("0", 1)), PreconditionError);
  CHECK(compatible(word("01"), word("1", 1)));
}

TEST_CASE("shipped presets are nonempty") {
  for (int rank = 1; rank <= 2; ++rank) {
    const auto d = GroupDescriptor::lattice(rank);
    for (const auto& sft : {SftSpec::golden_mean(d), SftSpec::full(d, Alphabet::binary())}) {
      const auto s = safe_symbol(sft);
      REQUIRE(s.has_value());
      CHECK(locally_admissible(sft, Pattern::constant(ball(d, d.identity(), 3), *s)));
    }
  }
  const auto no01 = SftSpec::no01_1d(z1());
  CHECK(locally_admissible(no01, Pattern::constant(seg(-5, 5), 0)));
}
