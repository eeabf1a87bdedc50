#pragma once

// Speculative consistency checking.
//
// SpeculativeProvider answers fd's consistency questions from a shared
// lookup table. On a miss it runs a look-ahead that anticipates the checks
// fd will ask for next, under both outcomes of the current check, and
// schedules them on a worker pool. fd itself is unchanged; only the
// provider differs from the sequential one.
//
// Threading: look-ahead and all table inserts happen on the thread that
// calls is_consistent(). Workers only execute solver jobs and publish
// verdicts. A blocking lookup never holds a worker.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <queue>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "specdiag/error.hpp"
#include "specdiag/model.hpp"
#include "specdiag/sat.hpp"

namespace specdiag {

enum class Origin { requested, speculative };

inline const char* to_string(Origin o) { return o == Origin::requested ? "requested" : "speculative"; }

// Diagnostics stream, one line per table event:
//   ADD <key> origin=<requested|speculative>
//   DONE <key> verdict=<t|f> ms=<n>
using TraceSink = std::function<void(const std::string&)>;

// Pending until a worker publishes the verdict, then immutable.
class CheckEntry {
 public:
  explicit CheckEntry(Origin origin) : origin_(origin) {}

  Origin origin() const { return origin_; }

  bool done() const {
    std::lock_guard lock(mutex_);
    return done_;
  }

  // Blocks until done. Rethrows the job's failure, if any.
  bool wait() const {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [this] { return done_; });
    if (error_) std::rethrow_exception(error_);
    return verdict_;
  }

  void complete(bool verdict) { finish(verdict, nullptr); }
  void fail(std::exception_ptr error) { finish(false, std::move(error)); }

 private:
  void finish(bool verdict, std::exception_ptr error) {
    {
      std::lock_guard lock(mutex_);
      if (done_) throw ContractViolation("check entry completed twice");
      verdict_ = verdict;
      error_ = std::move(error);
      done_ = true;
    }
    cv_.notify_all();
  }

  Origin origin_;
  mutable std::mutex mutex_;
  mutable std::condition_variable cv_;
  bool done_ = false;
  bool verdict_ = false;
  std::exception_ptr error_;
};

// Memo of scheduled and completed checks. At most one entry per key for
// the table's lifetime.
class LookupTable {
 public:
  explicit LookupTable(TraceSink trace = {}) : trace_(std::move(trace)) {}

  // Atomically inserts a pending entry. Returns nullptr if the key exists.
  std::shared_ptr<CheckEntry> add(const CheckKey& key, Origin origin) {
    std::lock_guard lock(mutex_);
    auto [it, inserted] = entries_.try_emplace(key, nullptr);
    if (!inserted) return nullptr;
    it->second = std::make_shared<CheckEntry>(origin);
    order_.push_back(key);
    emit("ADD " + key.str() + " origin=" + to_string(origin));
    return it->second;
  }

  bool exists(const CheckKey& key) const {
    std::lock_guard lock(mutex_);
    return entries_.contains(key);
  }

  std::shared_ptr<CheckEntry> find(const CheckKey& key) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : it->second;
  }

  // Blocks until the entry is done.
  bool lookup(const CheckKey& key) const {
    auto entry = find(key);
    if (!entry) throw ContractViolation("lookup of unscheduled check {" + key.str() + "}");
    return entry->wait();
  }

  void record_done(const CheckKey& key, bool verdict, std::chrono::milliseconds elapsed) {
    if (!trace_) return;
    std::lock_guard lock(mutex_);
    emit("DONE " + key.str() + " verdict=" + (verdict ? "t" : "f") + " ms=" + std::to_string(elapsed.count()));
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

  // Keys in insertion order.
  std::vector<CheckKey> keys() const {
    std::lock_guard lock(mutex_);
    return order_;
  }

 private:
  void emit(const std::string& line) {
    if (trace_) trace_(line);
  }

  mutable std::mutex mutex_;
  std::unordered_map<CheckKey, std::shared_ptr<CheckEntry>, CheckKeyHash> entries_;
  std::vector<CheckKey> order_;
  TraceSink trace_;
};

// Fixed-size pool executing jobs lowest priority value first, FIFO within
// a priority. Queued jobs are dropped on destruction; running ones finish.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers) {
    if (workers == 0) throw ContractViolation("worker pool needs at least one worker");
    threads_.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) threads_.emplace_back([this] { work(); });
  }

  ~WorkerPool() {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
      queue_ = {};
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  void submit(int priority, std::function<void()> job) {
    {
      std::lock_guard lock(mutex_);
      queue_.push({priority, seq_++, std::move(job)});
    }
    cv_.notify_one();
  }

  std::size_t size() const { return threads_.size(); }

 private:
  struct Job {
    int priority;
    std::uint64_t seq;
    std::function<void()> run;
    bool operator<(const Job& o) const {
      return priority != o.priority ? priority > o.priority : seq > o.seq;
    }
  };

  void work() {
    for (;;) {
      std::function<void()> job;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
        if (stopping_) return;
        job = std::move(const_cast<Job&>(queue_.top()).run);
        queue_.pop();
      }
      job();
    }
  }

  std::mutex mutex_;
  std::condition_variable cv_;
  std::priority_queue<Job> queue_;
  std::uint64_t seq_ = 0;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

// Ordered list of constraint sets consumed head first. Immutable and
// structurally shared, so pushing and popping are O(1) and copies are
// cheap.
class PhiStack {
 public:
  PhiStack() = default;

  bool empty() const { return !node_; }
  const ConstraintSet& head() const {
    if (!node_) throw ContractViolation("head of empty phi stack");
    return node_->item;
  }
  PhiStack tail() const {
    if (!node_) throw ContractViolation("tail of empty phi stack");
    return PhiStack(node_->next);
  }
  // More than one item.
  bool has_second() const { return node_ && node_->next; }

  PhiStack push(ConstraintSet item) const {
    if (item.empty()) throw ContractViolation("phi items must be non-empty");
    return PhiStack(std::make_shared<const Node>(Node{std::move(item), node_}));
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (auto p = node_.get(); p; p = p->next.get()) ++n;
    return n;
  }

  std::vector<ConstraintSet> items() const {
    std::vector<ConstraintSet> out;
    for (auto p = node_.get(); p; p = p->next.get()) out.push_back(p->item);
    return out;
  }

 private:
  struct Node {
    ConstraintSet item;
    std::shared_ptr<const Node> next;
  };
  explicit PhiStack(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  std::shared_ptr<const Node> node_;
};

// When the generated-check counter resets.
enum class BudgetScope {
  per_wave,  // on every lookup miss
  global,    // never; the budget covers the whole run
};

inline std::size_t default_worker_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 1 ? hw - 1 : 1;
}

struct SpeculationOptions {
  std::size_t workers = default_worker_count();
  std::size_t max_gcc = default_worker_count();
  BudgetScope budget_scope = BudgetScope::per_wave;
  // Added to every solver job; models expensive checks.
  std::chrono::microseconds latency{0};
  SolverBackend backend = builtin_backend();
  TraceSink trace;
};

class SpeculativeProvider {
 public:
  explicit SpeculativeProvider(SpeculationOptions options)
      : options_(std::move(options)), table_(options_.trace) {
    if (options_.workers == 0) throw ContractViolation("speculation needs at least one worker");
  }

  SpeculativeProvider(const SpeculativeProvider&) = delete;
  SpeculativeProvider& operator=(const SpeculativeProvider&) = delete;

  // Consistency of B ∪ C, answered from the table. A miss triggers a
  // look-ahead wave seeded with the single phi item rho.
  bool is_consistent(const ConstraintSet& c, const ConstraintSet& b, const ConstraintSet& rho) {
    CheckKey key = canonical_key({std::cref(b), std::cref(c)});
    if (table_.exists(key)) {
      ++hits_;
    } else {
      begin_wave();
      requested_ = &key;
      PhiStack phi;
      if (!rho.empty()) phi = phi.push(rho);
      look_ahead(c, b, phi);
      requested_ = nullptr;
      if (!table_.exists(key)) run_inline(key);
    }
    try {
      return table_.lookup(key);
    } catch (const CheckFailed&) {
      throw;
    } catch (const std::exception& e) {
      throw CheckFailed(key.str(), e.what());
    }
  }

  void begin_wave() {
    if (options_.budget_scope == BudgetScope::per_wave) cur_gcc_ = 0;
    ++waves_;
  }

  // Schedules B ∪ C if new, then expands the "B ∪ C consistent" branch
  // before the "inconsistent" branch so larger sets are queued first.
  // Stops once max_gcc checks were admitted in the current budget.
  void look_ahead(const ConstraintSet& c, const ConstraintSet& b, const PhiStack& phi) {
    if (cur_gcc_ >= options_.max_gcc) return;
    const CheckKey key = canonical_key({std::cref(b), std::cref(c)});
    if (!table_.exists(key)) {
      ++cur_gcc_;
      schedule(key, requested_ && key == *requested_ ? Origin::requested : Origin::speculative);
    }

    // B ∪ C assumed consistent: continue with phi under background B ∪ C.
    if (!phi.empty()) {
      const ConstraintSet bc = unite(b, c);
      const ConstraintSet& phi1 = phi.head();
      if (phi.has_second() && phi1.size() == 1 &&
          table_.exists(canonical_key({std::cref(bc), std::cref(phi1)}))) {  // case 1.1
        const PhiStack rest = phi.tail();
        const ConstraintSet& phi2 = rest.head();
        if (phi2.size() == 1) {
          look_ahead(phi2, bc, rest.tail());
        } else {
          auto [l, r] = split(phi2);
          look_ahead(l, bc, rest.tail().push(r));
        }
      } else if (phi1.size() == 1) {  // case 1.2
        look_ahead(phi1, bc, phi.tail());
      } else {  // case 1.3
        auto [l, r] = split(phi1);
        look_ahead(l, bc, phi.tail().push(r));
      }
    }

    // B ∪ C assumed inconsistent: divide C, or move on to phi.
    if (c.size() > 1) {  // case 2.1
      auto [l, r] = split(c);
      look_ahead(l, b, phi.push(r));
    } else if (c.size() == 1 && !phi.empty()) {
      const ConstraintSet& phi1 = phi.head();
      if (phi1.size() == 1) {  // case 2.2
        look_ahead(phi1, b, phi.tail());
      } else {  // case 2.3
        auto [l, r] = split(phi1);
        look_ahead(l, b, phi.tail().push(r));
      }
    }
  }

  bool exists(const CheckKey& key) const { return table_.exists(key); }
  const LookupTable& table() const { return table_; }

  std::uint64_t solver_calls() const { return calls_.load(); }
  std::uint64_t lookup_hits() const { return hits_; }
  std::uint64_t waves() const { return waves_; }
  // Checks admitted since the budget was last reset.
  std::size_t generated() const { return cur_gcc_; }
  const SpeculationOptions& options() const { return options_; }

 private:
  void schedule(const CheckKey& key, Origin origin) {
    auto entry = table_.add(key, origin);
    if (!entry) return;
    if (!pool_) pool_ = std::make_unique<WorkerPool>(options_.workers);
    pool_->submit(origin == Origin::requested ? 0 : 1, [this, key, entry] { execute(key, *entry); });
  }

  // Budget exhausted before the requested check was admitted.
  void run_inline(const CheckKey& key) {
    auto entry = table_.add(key, Origin::requested);
    if (entry) execute(key, *entry);
  }

  void execute(const CheckKey& key, CheckEntry& entry) {
    const auto start = std::chrono::steady_clock::now();
    ++calls_;
    try {
      if (options_.latency.count() > 0) std::this_thread::sleep_for(options_.latency);
      const bool verdict = check_key(key, options_.backend).consistent;
      entry.complete(verdict);
      table_.record_done(key, verdict,
                         std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start));
    } catch (...) {
      entry.fail(std::current_exception());
    }
  }

  SpeculationOptions options_;
  LookupTable table_;
  std::atomic<std::uint64_t> calls_{0};
  std::uint64_t hits_ = 0;
  std::uint64_t waves_ = 0;
  std::size_t cur_gcc_ = 0;
  const CheckKey* requested_ = nullptr;
  // Last member: destroyed first, so no job outlives the table.
  std::unique_ptr<WorkerPool> pool_;
};

}  // namespace specdiag
