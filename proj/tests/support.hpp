#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "specdiag/ingest.hpp"
#include "specdiag/model.hpp"
#include "specdiag/sat.hpp"
#include "specdiag/task.hpp"

namespace specdiag::fixtures {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(SPECDIAG_DATA_DIR) / name;
}

struct Fixture {
  KnowledgeBase kb;
  ConstraintSet reqs;

  DiagnosisTask task() const { return DiagnosisTask(reqs, kb.constraints, kb.variables); }
};

inline Fixture smartwatch(const std::string& reqs_file = "smartwatch.req") {
  Fixture f;
  f.kb = load_kb(data_path("smartwatch.kb"));
  f.reqs = load_requirements(data_path(reqs_file), f.kb);
  return f;
}

inline ConstraintSet pick(const ConstraintSet& s, std::initializer_list<const char*> ids) {
  std::vector<ConstraintRef> out;
  for (const char* id : ids)
    for (const auto& c : s)
      if (c->id() == id) out.push_back(c);
  return ConstraintSet(out);
}

inline ConstraintSet reversed(const ConstraintSet& s) {
  std::vector<ConstraintRef> out(s.begin(), s.end());
  std::reverse(out.begin(), out.end());
  return ConstraintSet(out);
}

// Reference satisfiability by enumerating all assignments.
inline bool truth_table_sat(const CnfFormula& f) {
  const auto n = static_cast<unsigned>(f.variable_count);
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << n); ++a) {
    bool all = true;
    for (const auto& clause : f.clauses) {
      bool sat = false;
      for (Literal lit : clause)
        if (((a >> (std::abs(lit) - 1)) & 1u) == (lit > 0 ? 1u : 0u)) {
          sat = true;
          break;
        }
      if (!sat) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

inline Clause random_clause(std::mt19937_64& rng, int vars, int min_width, int max_width) {
  std::uniform_int_distribution<int> width(min_width, max_width), var(1, vars), sign(0, 1);
  Clause c;
  const int w = width(rng);
  for (int i = 0; i < w; ++i) c.push_back(sign(rng) ? var(rng) : -var(rng));
  return c;
}

inline CnfFormula random_cnf(std::mt19937_64& rng, int max_vars = 12) {
  std::uniform_int_distribution<int> nv(1, max_vars);
  CnfFormula f;
  f.variable_count = nv(rng);
  std::uniform_int_distribution<int> nc(0, 4 * f.variable_count + 2);
  const int m = nc(rng);
  for (int i = 0; i < m; ++i) f.clauses.push_back(random_clause(rng, f.variable_count, 1, 3));
  return f;
}

// Random inconsistent diagnosis task: consistent KB of <= 25 clauses over
// <= 12 variables, and 2..10 requirements of width 1 or 2 that together
// contradict it.
struct RandomTask {
  std::shared_ptr<VariableTable> vars;
  ConstraintSet kb;
  ConstraintSet reqs;

  DiagnosisTask task() const { return DiagnosisTask(reqs, kb, vars); }
};

inline RandomTask random_task(std::mt19937_64& rng) {
  for (;;) {
    RandomTask t;
    t.vars = std::make_shared<VariableTable>();
    const int n = std::uniform_int_distribution<int>(3, 12)(rng);
    for (int i = 1; i <= n; ++i) t.vars->declare("v" + std::to_string(i));
    const int m = std::uniform_int_distribution<int>(1, std::min(25, 2 * n))(rng);
    const int k = std::uniform_int_distribution<int>(2, 10)(rng);
    std::vector<ConstraintRef> kb, reqs;
    std::uint32_t ordinal = 0;
    for (int i = 0; i < m; ++i)
      kb.push_back(make_constraint("k" + std::to_string(i), std::vector<Clause>{random_clause(rng, n, 2, 3)},
                                   ordinal++, "", t.vars->identity()));
    for (int i = 0; i < k; ++i)
      reqs.push_back(make_constraint("r" + std::to_string(i), std::vector<Clause>{random_clause(rng, n, 1, 2)},
                                     ordinal++, "", t.vars->identity()));
    t.kb = ConstraintSet(kb);
    t.reqs = ConstraintSet(reqs);
    if (!check_union({std::cref(t.kb)}).consistent) continue;
    if (check_union({std::cref(t.kb), std::cref(t.reqs)}).consistent) continue;
    return t;
  }
}

inline std::vector<RandomTask> random_tasks(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<RandomTask> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_task(rng));
  return out;
}

// Requirements x1..xn = t over a KB of pairwise exclusions; each
// exclusion is one minimal conflict, so |Δ| equals the number of pairs.
inline RandomTask exclusion_task(int n, const std::vector<std::pair<int, int>>& exclusions) {
  RandomTask t;
  t.vars = std::make_shared<VariableTable>();
  for (int i = 1; i <= n; ++i) t.vars->declare("x" + std::to_string(i));
  std::vector<ConstraintRef> kb, reqs;
  std::uint32_t ordinal = 0;
  for (const auto& [a, b] : exclusions)
    kb.push_back(make_constraint("k" + std::to_string(kb.size()), std::vector<Clause>{{-a, -b}}, ordinal++, "",
                                 t.vars->identity()));
  for (int i = 1; i <= n; ++i)
    reqs.push_back(
        make_constraint("r" + std::to_string(i), std::vector<Clause>{{i}}, ordinal++, "", t.vars->identity()));
  t.kb = ConstraintSet(kb);
  t.reqs = ConstraintSet(reqs);
  return t;
}

}  // namespace specdiag::fixtures
