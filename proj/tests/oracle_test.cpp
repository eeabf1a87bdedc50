#include <gtest/gtest.h>

#include "specdiag/oracle.hpp"
#include "support.hpp"

using namespace specdiag;

namespace {

std::vector<std::vector<std::string>> ids_of(const std::vector<ConstraintSet>& sets) {
  std::vector<std::vector<std::string>> out;
  for (const auto& s : sets) out.push_back(s.ids());
  return out;
}

std::vector<std::vector<std::string>> ids_of(const std::vector<Diagnosis>& ds) {
  std::vector<std::vector<std::string>> out;
  for (const auto& d : ds) out.push_back(d.removed().ids());
  return out;
}

using Sets = std::vector<std::vector<std::string>>;

}  // namespace

TEST(Oracle, SmartwatchListings) {
  const auto task = specdiag::fixtures::smartwatch().task();
  EXPECT_EQ(ids_of(all_minimal_conflicts(task)), (Sets{{"c10", "c11"}, {"c12", "c13"}}));
  EXPECT_EQ(ids_of(all_minimal_diagnoses(task)),
            (Sets{{"c10", "c12"}, {"c10", "c13"}, {"c11", "c12"}, {"c11", "c13"}}));
  EXPECT_EQ(preferred_diagnosis(task).removed().ids(), (std::vector<std::string>{"c11", "c13"}));
}

TEST(Oracle, PreferenceKeepsTheMostPreferredRequirements) {
  // {r3,r5} keeps r1 and r2; {r3,r4,r7} wins only at the least preferred end.
  const auto t = specdiag::fixtures::exclusion_task(7, {{1, 3}, {3, 4}, {4, 5}, {5, 7}});
  EXPECT_EQ(preferred_diagnosis(t.task()).removed().ids(), (std::vector<std::string>{"r3", "r5"}));
  EXPECT_EQ(antilex_maximal_diagnosis(t.task()).removed().ids(), (std::vector<std::string>{"r3", "r4", "r7"}));
  const auto watch = specdiag::fixtures::smartwatch().task();
  EXPECT_EQ(antilex_maximal_diagnosis(watch), preferred_diagnosis(watch));
}

TEST(Oracle, ConsistentInput) {
  const auto task = specdiag::fixtures::smartwatch("smartwatch_ok.req").task();
  EXPECT_TRUE(all_minimal_conflicts(task).empty());
  const auto ds = all_minimal_diagnoses(task);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_TRUE(ds[0].empty());
  EXPECT_TRUE(preferred_diagnosis(task).empty());
}

TEST(Oracle, GuardRejectsLargeTasks) {
  const auto t = specdiag::fixtures::exclusion_task(21, {{1, 2}});
  EXPECT_THROW(all_minimal_diagnoses(t.task()), GuardExceeded);
  EXPECT_THROW(all_minimal_conflicts(t.task(), 20), GuardExceeded);
  EXPECT_EQ(all_minimal_conflicts(t.task(), 21).size(), 1u);
}

TEST(Oracle, DiagnosesAreMinimalHittingSetsOfConflicts) {
  for (const auto& t : specdiag::fixtures::random_tasks(40, 11)) {
    const auto task = t.task();
    const auto conflicts = all_minimal_conflicts(task);
    const auto diagnoses = all_minimal_diagnoses(task);
    ASSERT_FALSE(conflicts.empty());
    for (const auto& d : diagnoses) ASSERT_TRUE(is_minimal_hitting_set(d.removed(), conflicts));
  }
}

TEST(Oracle, HittingSetCheck) {
  const auto f = specdiag::fixtures::smartwatch();
  const auto conflicts = all_minimal_conflicts(f.task());
  using specdiag::fixtures::pick;
  EXPECT_TRUE(is_minimal_hitting_set(pick(f.reqs, {"c11", "c13"}), conflicts));
  EXPECT_FALSE(is_minimal_hitting_set(pick(f.reqs, {"c10", "c11", "c13"}), conflicts));
  EXPECT_FALSE(is_minimal_hitting_set(pick(f.reqs, {"c11"}), conflicts));
}

TEST(WorstCaseChecks, Values) {
  EXPECT_EQ(worst_case_checks(4, 2), 8u);
  EXPECT_EQ(worst_case_checks(16, 1), 10u);
  EXPECT_EQ(worst_case_checks(10, 3), 18u);
  EXPECT_EQ(worst_case_checks(5, 5), 10u);
  EXPECT_THROW(worst_case_checks(3, 0), ContractViolation);
  EXPECT_THROW(worst_case_checks(3, 4), ContractViolation);
}
