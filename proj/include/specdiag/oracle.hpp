#pragma once

// Brute-force ground truth for small tasks: minimal conflicts, minimal
// diagnoses and the preferred diagnosis, found by enumerating subsets of
// the requirements in order of cardinality and then position.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "specdiag/error.hpp"
#include "specdiag/model.hpp"
#include "specdiag/sat.hpp"
#include "specdiag/task.hpp"

namespace specdiag {

constexpr std::size_t kDefaultOracleLimit = 20;

namespace detail {

inline void check_guard(const DiagnosisTask& task, std::size_t limit) {
  if (task.requirements().size() > limit)
    throw GuardExceeded(std::to_string(task.requirements().size()) + " requirements exceed the enumeration limit of " +
                        std::to_string(limit) + " (raise it with --max-n)");
}

// Calls visit(mask) for every subset of {0..n-1}, ascending by
// cardinality, lexicographic by position within a cardinality.
template <class Visit>
void for_each_subset(std::size_t n, Visit visit) {
  for (std::size_t k = 0; k <= n; ++k) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    for (;;) {
      std::uint32_t mask = 0;
      for (auto i : idx) mask |= 1u << i;
      visit(mask);
      std::size_t i = k;
      while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
}

inline ConstraintSet select(const ConstraintSet& s, std::uint32_t mask) {
  std::vector<bool> keep(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) keep[i] = (mask >> i) & 1u;
  return subset_by_mask(s, keep);
}

inline bool has_subset_in(std::uint32_t mask, const std::vector<std::uint32_t>& found) {
  return std::any_of(found.begin(), found.end(), [&](std::uint32_t f) { return (f & mask) == f; });
}

}  // namespace detail

// Minimal subsets CS of C_R with CS ∪ C_KB inconsistent.
inline std::vector<ConstraintSet> all_minimal_conflicts(const DiagnosisTask& task,
                                                        std::size_t limit = kDefaultOracleLimit,
                                                        const SolveOptions& options = {}) {
  detail::check_guard(task, limit);
  const auto& reqs = task.requirements();
  std::vector<std::uint32_t> found;
  detail::for_each_subset(reqs.size(), [&](std::uint32_t mask) {
    if (detail::has_subset_in(mask, found)) return;
    const ConstraintSet s = detail::select(reqs, mask);
    if (!check_union({std::cref(task.background()), std::cref(s)}, options).consistent) found.push_back(mask);
  });
  std::vector<ConstraintSet> out;
  for (auto m : found) out.push_back(detail::select(reqs, m));
  return out;
}

// Minimal subsets Δ of C_R with (C_R ∖ Δ) ∪ C_KB consistent.
inline std::vector<Diagnosis> all_minimal_diagnoses(const DiagnosisTask& task,
                                                    std::size_t limit = kDefaultOracleLimit,
                                                    const SolveOptions& options = {}) {
  detail::check_guard(task, limit);
  const auto& reqs = task.requirements();
  const std::uint32_t all = reqs.empty() ? 0u : (reqs.size() == 32 ? ~0u : (1u << reqs.size()) - 1u);
  std::vector<std::uint32_t> found;
  detail::for_each_subset(reqs.size(), [&](std::uint32_t mask) {
    if (detail::has_subset_in(mask, found)) return;
    const ConstraintSet kept = detail::select(reqs, all & ~mask);
    if (check_union({std::cref(task.background()), std::cref(kept)}, options).consistent) found.push_back(mask);
  });
  std::vector<Diagnosis> out;
  for (auto m : found) out.push_back(Diagnosis::from_removed(reqs, detail::select(reqs, m)));
  return out;
}

namespace detail {

inline ConstraintSet reversed(const ConstraintSet& s) {
  std::vector<ConstraintRef> out(s.begin(), s.end());
  std::reverse(out.begin(), out.end());
  return ConstraintSet(std::move(out));
}

template <class Better>
Diagnosis unique_best(const std::vector<Diagnosis>& diagnoses, Better better) {
  const Diagnosis* best = nullptr;
  for (const auto& d : diagnoses)
    if (!best || better(d, *best)) best = &d;
  for (const auto& d : diagnoses)
    if (&d != best && !better(*best, d)) throw Error("no unique preferred diagnosis");
  return *best;
}

}  // namespace detail

// The minimal diagnosis fastdiag must return: at the most preferred
// requirement where it differs from any other minimal diagnosis, it keeps
// that requirement and the other one removes it. Equivalently its
// complement is the lexicographically greatest MSS, and it is the minimum
// under antilex over the reversed order.
inline Diagnosis preferred_diagnosis(const DiagnosisTask& task, std::size_t limit = kDefaultOracleLimit,
                                     const SolveOptions& options = {}) {
  const auto reversed = detail::reversed(task.requirements());
  return detail::unique_best(all_minimal_diagnoses(task, limit, options), [&](const Diagnosis& a, const Diagnosis& b) {
    return antilex_precedes(a.removed(), b.removed(), reversed);
  });
}

// The maximum under antilex over the given order, i.e. the diagnosis whose
// least preferred differing requirement is removed. Agrees with
// preferred_diagnosis on small examples but not in general.
inline Diagnosis antilex_maximal_diagnosis(const DiagnosisTask& task, std::size_t limit = kDefaultOracleLimit,
                                           const SolveOptions& options = {}) {
  const auto& order = task.requirements();
  return detail::unique_best(all_minimal_diagnoses(task, limit, options), [&](const Diagnosis& a, const Diagnosis& b) {
    return antilex_precedes(b.removed(), a.removed(), order);
  });
}

// candidate hits every conflict and no proper subset of it does.
inline bool is_minimal_hitting_set(const ConstraintSet& candidate, const std::vector<ConstraintSet>& conflicts) {
  auto hits_all = [&](const ConstraintSet& h) {
    return std::all_of(conflicts.begin(), conflicts.end(), [&](const ConstraintSet& cs) {
      return std::any_of(cs.begin(), cs.end(), [&](const ConstraintRef& c) { return h.contains(c->id()); });
    });
  };
  if (!hits_all(candidate)) return false;
  for (const auto& c : candidate)
    if (hits_all(difference(candidate, ConstraintSet{c}))) return false;
  return true;
}

// Upper bound on fd's consistency checks for |C| = n and |Δ| = d:
// 2d * ceil(log2(n/d)) + 2d. The ceiling keeps the bound integral when n/d
// is not a power of two.
inline std::uint64_t worst_case_checks(std::uint64_t n, std::uint64_t d) {
  if (d < 1 || d > n) throw ContractViolation("worst_case_checks requires 1 <= d <= n");
  std::uint64_t log = 0;
  while ((d << log) < n) ++log;
  return 2 * d * log + 2 * d;
}

}  // namespace specdiag
