#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "specdiag/model.hpp"
#include "support.hpp"

using namespace specdiag;
using specdiag::fixtures::pick;

namespace {

ConstraintSet numbered(std::size_t n, std::uint32_t ordinal_base = 0) {
  std::vector<ConstraintRef> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(make_constraint("c" + std::to_string(i), std::vector<Clause>{{static_cast<int>(i) + 1}},
                                  ordinal_base + static_cast<std::uint32_t>(i)));
  return ConstraintSet(out);
}

ConstraintSet by_mask(const ConstraintSet& s, unsigned mask) {
  std::vector<bool> keep(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) keep[i] = (mask >> i) & 1u;
  return subset_by_mask(s, keep);
}

}  // namespace

TEST(Constraint, RejectsMalformedClauses) {
  EXPECT_THROW(Constraint("a", {{}}), ContractViolation);
  EXPECT_THROW(Constraint("a", {{1, 0}}), ContractViolation);
  EXPECT_THROW(Constraint("", {{1}}), ContractViolation);
  EXPECT_TRUE(Constraint("a", {}).is_tautology());
  EXPECT_TRUE(Constraint::contradiction("f").is_contradiction());
  EXPECT_FALSE(Constraint::contradiction("f").is_tautology());
}

TEST(VariableTable, DeclareFindAndAuxiliaries) {
  VariableTable t;
  EXPECT_EQ(t.declare("a"), 1);
  EXPECT_EQ(t.declare("b"), 2);
  EXPECT_THROW(t.declare("a"), Error);
  const int aux = t.add_auxiliary();
  EXPECT_EQ(aux, 3);
  EXPECT_TRUE(t.is_auxiliary(aux));
  EXPECT_EQ(t.named_count(), 2);
  EXPECT_EQ(t.find("b"), 2);
  EXPECT_FALSE(t.find("zz"));
  EXPECT_THROW(t.declare("late"), Error);
  VariableTable copy(t);
  EXPECT_NE(copy.identity(), t.identity());
}

TEST(ConstraintSet, RejectsDuplicateIds) {
  auto a = make_constraint("a", std::vector<Clause>{{1}});
  auto a2 = make_constraint("a", std::vector<Clause>{{2}});
  EXPECT_THROW(ConstraintSet(std::vector<ConstraintRef>{a, a2}), ContractViolation);
}

TEST(ConstraintSet, SplitUniteDifferenceKeepOrder) {
  const auto c = numbered(5);
  auto [l, r] = split(c);
  EXPECT_EQ(l.ids(), (std::vector<std::string>{"c0", "c1"}));
  EXPECT_EQ(r.ids(), (std::vector<std::string>{"c2", "c3", "c4"}));
  EXPECT_THROW(split(pick(c, {"c0"})), ContractViolation);
  EXPECT_THROW(split(ConstraintSet{}), ContractViolation);

  EXPECT_EQ(unite(r, l).ids(), (std::vector<std::string>{"c2", "c3", "c4", "c0", "c1"}));
  EXPECT_EQ(unite(c, l), c);
  EXPECT_EQ(difference(c, pick(c, {"c3", "c1"})).ids(), (std::vector<std::string>{"c0", "c2", "c4"}));
  EXPECT_TRUE(difference(c, c).empty());
}

TEST(Antilex, SmartwatchPreferenceIsTheMaximum) {
  const auto c = numbered(4);
  // Diagnoses of the running example, relabelled c0..c3 for c10..c13.
  const auto d1 = pick(c, {"c0", "c2"});
  const auto d4 = pick(c, {"c1", "c3"});
  EXPECT_TRUE(antilex_precedes(d1, d4, c));
  EXPECT_FALSE(antilex_precedes(d4, d1, c));
  EXPECT_TRUE(antilex_precedes(d4, d1, fixtures::reversed(c)));
}

TEST(Antilex, RejectsForeignMembers) {
  const auto c = numbered(3);
  const auto other = numbered(5);
  EXPECT_THROW(antilex_precedes(pick(other, {"c4"}), pick(c, {"c0"}), c), ContractViolation);
}

TEST(Antilex, StrictTotalOrderUpToSixElements) {
  for (std::size_t n = 0; n <= 6; ++n) {
    const auto order = numbered(n);
    const unsigned subsets = 1u << n;
    std::vector<ConstraintSet> sets;
    for (unsigned m = 0; m < subsets; ++m) sets.push_back(by_mask(order, m));
    for (unsigned x = 0; x < subsets; ++x) {
      ASSERT_FALSE(antilex_precedes(sets[x], sets[x], order));
      for (unsigned y = 0; y < subsets; ++y) {
        if (x == y) continue;
        const bool xy = antilex_precedes(sets[x], sets[y], order);
        const bool yx = antilex_precedes(sets[y], sets[x], order);
        ASSERT_NE(xy, yx) << "n=" << n << " x=" << x << " y=" << y;
      }
    }
  }
}

TEST(CheckKey, InvariantUnderPermutationAndPartition) {
  const auto kb = numbered(3);
  std::vector<ConstraintRef> reqs_v;
  for (int i = 0; i < 5; ++i)
    reqs_v.push_back(make_constraint("r" + std::to_string(i), std::vector<Clause>{{i + 4}}, 3 + i));
  const ConstraintSet reqs(reqs_v);
  const auto reference = canonical_key({std::cref(kb), std::cref(reqs)});
  EXPECT_EQ(reference.str(), "c0|c1|c2|r0|r1|r2|r3|r4");

  std::mt19937_64 rng(7);
  std::vector<ConstraintRef> all(kb.begin(), kb.end());
  all.insert(all.end(), reqs.begin(), reqs.end());
  for (int trial = 0; trial < 200; ++trial) {
    std::shuffle(all.begin(), all.end(), rng);
    const auto cut = std::uniform_int_distribution<std::size_t>(0, all.size())(rng);
    const ConstraintSet a(std::vector<ConstraintRef>(all.begin(), all.begin() + cut));
    const ConstraintSet b(std::vector<ConstraintRef>(all.begin() + cut, all.end()));
    const auto key = canonical_key({std::cref(b), std::cref(a)});
    ASSERT_EQ(key, reference);
    ASSERT_EQ(CheckKeyHash{}(key), CheckKeyHash{}(reference));
  }
}

TEST(CheckKey, OverlappingPartsCountOnce) {
  const auto c = numbered(4);
  const auto k1 = canonical_key({std::cref(c), std::cref(c)});
  EXPECT_EQ(k1, canonical_key({std::cref(c)}));
  const auto left = split(c).first;
  EXPECT_NE(k1, canonical_key({std::cref(left)}));
}

TEST(Diagnosis, PartitionsRequirements) {
  const auto c = numbered(4);
  const auto d = Diagnosis::from_removed(c, pick(c, {"c3", "c1"}));
  EXPECT_EQ(d.removed().ids(), (std::vector<std::string>{"c1", "c3"}));
  EXPECT_EQ(d.complement().ids(), (std::vector<std::string>{"c0", "c2"}));
  EXPECT_EQ(Diagnosis::from_complement(c, d.complement()), d);
  EXPECT_TRUE(Diagnosis::from_removed(c, {}).empty());
  EXPECT_THROW(Diagnosis::from_removed(c, numbered(5)), ContractViolation);
}
