#pragma once

// Direct diagnosis by divide and conquer.
//
// fd() computes a maximal satisfiable subset Ω of C relative to B; the
// preferred minimal diagnosis is C ∖ Ω. The algorithm is written against
// the CheckProvider concept so the same body runs with plain solver calls
// or with speculative pre-computation behind the provider.

#include <algorithm>
#include <chrono>
#include <concepts>
#include <cstdint>
#include <thread>

#include "specdiag/model.hpp"
#include "specdiag/sat.hpp"
#include "specdiag/task.hpp"

namespace specdiag {

// is_consistent(C, B, rho) decides B ∪ C. rho is the sibling context not
// yet checked; it may guide speculation but never changes the answer.
template <class P>
concept CheckProvider = requires(P& p, const ConstraintSet& s) {
  { p.is_consistent(s, s, s) } -> std::same_as<bool>;
  { p.solver_calls() } -> std::convertible_to<std::uint64_t>;
  { p.lookup_hits() } -> std::convertible_to<std::uint64_t>;
};

// One solver call per check, optionally padded with a fixed latency to
// model expensive checks.
class SequentialProvider {
 public:
  explicit SequentialProvider(SolverBackend backend = builtin_backend(),
                              std::chrono::microseconds latency = std::chrono::microseconds{0})
      : backend_(std::move(backend)), latency_(latency) {}

  bool is_consistent(const ConstraintSet& c, const ConstraintSet& b, const ConstraintSet& /*rho*/) {
    ++calls_;
    if (latency_.count() > 0) std::this_thread::sleep_for(latency_);
    try {
      return check_union({std::cref(b), std::cref(c)}, backend_).consistent;
    } catch (const CheckFailed&) {
      throw;
    } catch (const std::exception& e) {
      throw CheckFailed(canonical_key({std::cref(b), std::cref(c)}).str(), e.what());
    }
  }

  std::uint64_t solver_calls() const { return calls_; }
  std::uint64_t lookup_hits() const { return 0; }

 private:
  SolverBackend backend_;
  std::chrono::microseconds latency_;
  std::uint64_t calls_ = 0;
};

struct FdStats {
  std::uint64_t solver_calls = 0;     // whole fastdiag run
  std::uint64_t fd_solver_calls = 0;  // inside fd only, guard excluded
  std::uint64_t lookup_hits = 0;
  std::size_t recursion_depth = 0;
  std::chrono::nanoseconds wall_time{0};
};

struct FastDiagResult {
  Diagnosis diagnosis;
  FdStats stats;
};

namespace detail {

template <CheckProvider P>
ConstraintSet fd(const ConstraintSet& c, const ConstraintSet& b, const ConstraintSet& rho, P& provider,
                 std::size_t depth, std::size_t& max_depth) {
  max_depth = std::max(max_depth, depth);
  if (!rho.empty() && provider.is_consistent(c, b, rho)) return c;
  if (c.size() == 1) return {};
  auto [left, right] = split(c);
  ConstraintSet kept_left = fd(left, b, right, provider, depth + 1, max_depth);
  ConstraintSet kept_right =
      fd(right, unite(b, kept_left), difference(left, kept_left), provider, depth + 1, max_depth);
  return unite(kept_left, kept_right);
}

}  // namespace detail

// Maximal satisfiable subset of C relative to B. Recursion depth is
// bounded by ceil(log2 |C|) + 1.
template <CheckProvider P>
ConstraintSet fd(const ConstraintSet& c, const ConstraintSet& b, const ConstraintSet& rho, P& provider,
                 std::size_t* depth = nullptr) {
  if (c.empty()) return {};
  std::size_t max_depth = 0;
  auto out = detail::fd(c, b, rho, provider, 1, max_depth);
  if (depth) *depth = max_depth;
  return out;
}

// Preferred minimal diagnosis of C against background B. The order of C
// is the preference order.
//
// Throws InconsistentBackground when B alone is unsatisfiable, which
// would otherwise make every subset of C a diagnosis.
template <CheckProvider P>
FastDiagResult fastdiag(const ConstraintSet& c, const ConstraintSet& b, P& provider) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t calls0 = provider.solver_calls();
  const std::uint64_t hits0 = provider.lookup_hits();
  FastDiagResult result;
  result.diagnosis = Diagnosis::from_removed(c, {});

  if (!c.empty() && !provider.is_consistent(c, b, ConstraintSet{})) {
    const std::uint64_t before_fd = provider.solver_calls();
    ConstraintSet mss = fd(c, b, ConstraintSet{}, provider, &result.stats.recursion_depth);
    result.stats.fd_solver_calls = provider.solver_calls() - before_fd;
    if (mss.empty() && !provider.is_consistent(ConstraintSet{}, b, ConstraintSet{}))
      throw InconsistentBackground("background knowledge base is inconsistent");
    result.diagnosis = Diagnosis::from_complement(c, mss);
  }

  result.stats.solver_calls = provider.solver_calls() - calls0;
  result.stats.lookup_hits = provider.lookup_hits() - hits0;
  result.stats.wall_time = std::chrono::steady_clock::now() - start;
  return result;
}

template <CheckProvider P>
FastDiagResult fastdiag(const DiagnosisTask& task, P& provider) {
  return fastdiag(task.requirements(), task.background(), provider);
}

// Δ restores consistency and no single member of Δ can be put back.
template <CheckProvider P>
bool verify_minimal(const DiagnosisTask& task, const Diagnosis& diagnosis, P& provider) {
  const auto& reqs = task.requirements();
  const auto& kb = task.background();
  if (!provider.is_consistent(difference(reqs, diagnosis.removed()), kb, ConstraintSet{})) return false;
  for (const auto& c : diagnosis.removed()) {
    ConstraintSet without_c = difference(diagnosis.removed(), ConstraintSet{c});
    if (provider.is_consistent(difference(reqs, without_c), kb, ConstraintSet{})) return false;
  }
  return true;
}

}  // namespace specdiag
