#pragma once

// Core domain types: variables, constraints, ordered constraint sets,
// diagnoses and the order-aware set utilities shared by every algorithm.
//
// Constraint order is carried by list position inside a ConstraintSet:
// element i is preferred over element i + 1. Constraint identity is the
// string id; two constraints with the same clauses but different ids are
// distinct.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "specdiag/error.hpp"

namespace specdiag {

// Signed, 1-based variable index. Negative means negated.
using Literal = int;
using Clause = std::vector<Literal>;

// Maps variable names to stable 1-based indices. Named variables come
// first; auxiliary variables introduced by CNF compilation are appended
// after them and carry no user-visible name.
class VariableTable {
 public:
  VariableTable() : identity_(next_identity()) {}

  // Copies get a fresh identity: constraints compiled against one table
  // must not be mixed with another, even an identical copy.
  VariableTable(const VariableTable& other)
      : identity_(next_identity()),
        names_(other.names_),
        index_(other.index_),
        named_count_(other.named_count_) {}
  VariableTable& operator=(const VariableTable&) = delete;

  int declare(std::string name) {
    if (name.empty()) throw ContractViolation("variable name must not be empty");
    if (named_count_ != static_cast<int>(names_.size()))
      throw ContractViolation("cannot declare '" + name + "' after auxiliary variables");
    if (index_.contains(name)) throw ContractViolation("duplicate variable '" + name + "'");
    names_.push_back(name);
    const int index = static_cast<int>(names_.size());
    index_.emplace(std::move(name), index);
    ++named_count_;
    return index;
  }

  int add_auxiliary() {
    names_.emplace_back();
    return static_cast<int>(names_.size());
  }

  std::optional<int> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Auxiliary variables render as "$<index>".
  std::string name(int index) const {
    if (index < 1 || index > size()) throw ContractViolation("variable index out of range");
    const auto& n = names_[static_cast<std::size_t>(index - 1)];
    return n.empty() ? "$" + std::to_string(index) : n;
  }

  bool is_auxiliary(int index) const { return index > named_count_; }
  int size() const { return static_cast<int>(names_.size()); }
  int named_count() const { return named_count_; }
  std::uint64_t identity() const { return identity_; }

 private:
  static std::uint64_t next_identity() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
  }

  std::uint64_t identity_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
  int named_count_ = 0;
};

// An identified boolean proposition in clause form.
//
// An empty clause list is the trivial truth. Constant falsity is never an
// empty clause; it is the explicit contradiction flag instead.
class Constraint {
 public:
  Constraint(std::string id, std::vector<Clause> clauses, std::uint32_t ordinal = 0,
             std::string label = {}, std::uint64_t table = 0)
      : id_(std::move(id)),
        clauses_(std::move(clauses)),
        label_(std::move(label)),
        ordinal_(ordinal),
        table_(table),
        id_hash_(std::hash<std::string>{}(id_)) {
    if (id_.empty()) throw ContractViolation("constraint id must not be empty");
    for (const auto& clause : clauses_) {
      if (clause.empty())
        throw ContractViolation("constraint '" + id_ +
                                "' has an empty clause; use Constraint::contradiction");
      for (Literal lit : clause)
        if (lit == 0) throw ContractViolation("constraint '" + id_ + "' contains literal 0");
    }
  }

  static Constraint contradiction(std::string id, std::uint32_t ordinal = 0,
                                  std::string label = {}, std::uint64_t table = 0) {
    Constraint c(std::move(id), {}, ordinal, std::move(label), table);
    c.contradiction_ = true;
    return c;
  }

  const std::string& id() const { return id_; }
  const std::vector<Clause>& clauses() const { return clauses_; }
  const std::string& label() const { return label_; }
  std::uint32_t ordinal() const { return ordinal_; }
  std::uint64_t table() const { return table_; }
  std::size_t id_hash() const { return id_hash_; }
  bool is_contradiction() const { return contradiction_; }
  bool is_tautology() const { return !contradiction_ && clauses_.empty(); }

 private:
  std::string id_;
  std::vector<Clause> clauses_;
  std::string label_;
  std::uint32_t ordinal_;
  std::uint64_t table_;
  std::size_t id_hash_;
  bool contradiction_ = false;
};

using ConstraintRef = std::shared_ptr<const Constraint>;

template <class... Args>
ConstraintRef make_constraint(Args&&... args) {
  return std::make_shared<const Constraint>(std::forward<Args>(args)...);
}

// Ordered list of constraints without duplicate ids. Position encodes the
// strict total order.
class ConstraintSet {
 public:
  using const_iterator = std::vector<ConstraintRef>::const_iterator;

  ConstraintSet() = default;
  ConstraintSet(std::initializer_list<ConstraintRef> members)
      : ConstraintSet(std::vector<ConstraintRef>(members)) {}
  explicit ConstraintSet(std::vector<ConstraintRef> members) : members_(std::move(members)) {
    std::unordered_set<std::string_view> seen;
    seen.reserve(members_.size());
    for (const auto& c : members_) {
      if (!c) throw ContractViolation("null constraint in set");
      if (!seen.insert(c->id()).second)
        throw ContractViolation("duplicate constraint id '" + c->id() + "'");
    }
  }

  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  const_iterator begin() const { return members_.begin(); }
  const_iterator end() const { return members_.end(); }
  const ConstraintRef& operator[](std::size_t i) const { return members_[i]; }
  const std::vector<ConstraintRef>& members() const { return members_; }

  bool contains(std::string_view id) const {
    return std::any_of(members_.begin(), members_.end(),
                       [&](const ConstraintRef& c) { return c->id() == id; });
  }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    out.reserve(members_.size());
    for (const auto& c : members_) out.push_back(c->id());
    return out;
  }

  // Same ids in the same order.
  friend bool operator==(const ConstraintSet& a, const ConstraintSet& b) {
    return std::equal(a.members_.begin(), a.members_.end(), b.members_.begin(), b.members_.end(),
                      [](const ConstraintRef& x, const ConstraintRef& y) { return x->id() == y->id(); });
  }

 private:
  struct Trusted {};
  ConstraintSet(Trusted, std::vector<ConstraintRef> members) : members_(std::move(members)) {}

  friend std::pair<ConstraintSet, ConstraintSet> split(const ConstraintSet&);
  friend ConstraintSet unite(const ConstraintSet&, const ConstraintSet&);
  friend ConstraintSet difference(const ConstraintSet&, const ConstraintSet&);
  friend ConstraintSet subset_by_mask(const ConstraintSet&, const std::vector<bool>&);

  std::vector<ConstraintRef> members_;
};

// Divides C into its first floor(n/2) and remaining members.
inline std::pair<ConstraintSet, ConstraintSet> split(const ConstraintSet& c) {
  if (c.size() < 2) throw ContractViolation("split requires at least two constraints");
  const auto k = static_cast<std::ptrdiff_t>(c.size() / 2);
  return {ConstraintSet(ConstraintSet::Trusted{}, {c.begin(), c.begin() + k}),
          ConstraintSet(ConstraintSet::Trusted{}, {c.begin() + k, c.end()})};
}

namespace detail {
inline std::unordered_set<std::string_view> id_view(const ConstraintSet& s) {
  std::unordered_set<std::string_view> out;
  out.reserve(s.size());
  for (const auto& c : s) out.insert(c->id());
  return out;
}
}  // namespace detail

// a followed by the members of b not already in a.
inline ConstraintSet unite(const ConstraintSet& a, const ConstraintSet& b) {
  if (b.empty()) return a;
  if (a.empty()) return b;
  auto seen = detail::id_view(a);
  std::vector<ConstraintRef> out(a.begin(), a.end());
  out.reserve(a.size() + b.size());
  for (const auto& c : b)
    if (!seen.contains(c->id())) out.push_back(c);
  return ConstraintSet(ConstraintSet::Trusted{}, std::move(out));
}

// Members of a not in b, order of a preserved.
inline ConstraintSet difference(const ConstraintSet& a, const ConstraintSet& b) {
  if (a.empty() || b.empty()) return a;
  auto drop = detail::id_view(b);
  std::vector<ConstraintRef> out;
  out.reserve(a.size());
  for (const auto& c : a)
    if (!drop.contains(c->id())) out.push_back(c);
  return ConstraintSet(ConstraintSet::Trusted{}, std::move(out));
}

// Members whose position is set in mask.
inline ConstraintSet subset_by_mask(const ConstraintSet& s, const std::vector<bool>& mask) {
  if (mask.size() != s.size()) throw ContractViolation("mask size mismatch");
  std::vector<ConstraintRef> out;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (mask[i]) out.push_back(s[i]);
  return ConstraintSet(ConstraintSet::Trusted{}, std::move(out));
}

// X <antilex Y under the order given by `order`: the least preferred
// constraint on which X and Y differ belongs to Y.
inline bool antilex_precedes(std::span<const std::string> x, std::span<const std::string> y,
                             const ConstraintSet& order) {
  std::unordered_map<std::string_view, std::size_t> position;
  position.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) position.emplace(order[i]->id(), i);

  auto mark = [&](std::span<const std::string> ids) {
    std::vector<bool> in(order.size(), false);
    for (const auto& id : ids) {
      auto it = position.find(id);
      if (it == position.end())
        throw ContractViolation("constraint '" + id + "' is not part of the order");
      in[it->second] = true;
    }
    return in;
  };
  const auto in_x = mark(x);
  const auto in_y = mark(y);
  for (std::size_t i = order.size(); i-- > 0;)
    if (in_x[i] != in_y[i]) return in_y[i];
  return false;
}

inline bool antilex_precedes(const ConstraintSet& x, const ConstraintSet& y,
                             const ConstraintSet& order) {
  const auto xi = x.ids();
  const auto yi = y.ids();
  return antilex_precedes(std::span<const std::string>(xi), std::span<const std::string>(yi), order);
}

// Canonical identity of a constraint union: members sorted by
// (ordinal, id) and deduplicated by id. Grouping and input order do not
// affect the key.
class CheckKey {
 public:
  CheckKey() = default;

  template <class Sets>
  static CheckKey from_sets(const Sets& sets) {
    CheckKey key;
    std::size_t total = 0;
    for (const ConstraintSet& s : sets) total += s.size();
    key.members_.reserve(total);
    for (const ConstraintSet& s : sets) key.members_.insert(key.members_.end(), s.begin(), s.end());
    std::sort(key.members_.begin(), key.members_.end(),
              [](const ConstraintRef& a, const ConstraintRef& b) {
                if (a->ordinal() != b->ordinal()) return a->ordinal() < b->ordinal();
                return a->id() < b->id();
              });
    key.members_.erase(std::unique(key.members_.begin(), key.members_.end(),
                                   [](const ConstraintRef& a, const ConstraintRef& b) {
                                     return a->id() == b->id();
                                   }),
                       key.members_.end());
    std::size_t h = key.members_.size();
    for (const auto& c : key.members_) h ^= c->id_hash() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    key.hash_ = h;
    return key;
  }

  const std::vector<ConstraintRef>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  std::size_t hash() const { return hash_; }

  std::string str() const {
    std::string out;
    for (const auto& c : members_) {
      if (!out.empty()) out += '|';
      out += c->id();
    }
    return out;
  }

  friend bool operator==(const CheckKey& a, const CheckKey& b) {
    if (a.hash_ != b.hash_ || a.members_.size() != b.members_.size()) return false;
    for (std::size_t i = 0; i < a.members_.size(); ++i)
      if (a.members_[i] != b.members_[i] && a.members_[i]->id() != b.members_[i]->id()) return false;
    return true;
  }

 private:
  std::vector<ConstraintRef> members_;
  std::size_t hash_ = 0;
};

struct CheckKeyHash {
  std::size_t operator()(const CheckKey& k) const noexcept { return k.hash(); }
};

inline CheckKey canonical_key(std::initializer_list<std::reference_wrapper<const ConstraintSet>> sets) {
  return CheckKey::from_sets(sets);
}

inline CheckKey canonical_key(std::span<const ConstraintSet> sets) { return CheckKey::from_sets(sets); }

// Δ ⊆ C_R together with its complement Ω = C_R ∖ Δ, both in C_R order.
class Diagnosis {
 public:
  Diagnosis() = default;

  static Diagnosis from_removed(const ConstraintSet& requirements, const ConstraintSet& removed) {
    return Diagnosis(requirements, removed, /*is_removed=*/true);
  }
  static Diagnosis from_complement(const ConstraintSet& requirements, const ConstraintSet& kept) {
    return Diagnosis(requirements, kept, /*is_removed=*/false);
  }

  const ConstraintSet& removed() const { return removed_; }
  const ConstraintSet& complement() const { return complement_; }
  bool empty() const { return removed_.empty(); }

  friend bool operator==(const Diagnosis& a, const Diagnosis& b) {
    return a.removed_ == b.removed_ && a.complement_ == b.complement_;
  }

 private:
  Diagnosis(const ConstraintSet& requirements, const ConstraintSet& part, bool is_removed) {
    auto in_part = detail::id_view(part);
    std::vector<bool> mask(requirements.size());
    std::size_t hit = 0;
    for (std::size_t i = 0; i < requirements.size(); ++i) {
      mask[i] = in_part.contains(requirements[i]->id());
      hit += mask[i];
    }
    if (hit != part.size()) throw ContractViolation("diagnosis part is not a subset of the requirements");
    std::vector<bool> inverse(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) inverse[i] = !mask[i];
    removed_ = subset_by_mask(requirements, is_removed ? mask : inverse);
    complement_ = subset_by_mask(requirements, is_removed ? inverse : mask);
  }

  ConstraintSet removed_;
  ConstraintSet complement_;
};

}  // namespace specdiag
