#pragma once

// CNF satisfiability used as the consistency oracle for every diagnosis
// algorithm.
//
// The built-in solver is plain DPLL: two-watched-literal unit propagation,
// chronological backtracking, branching on the lowest unassigned variable
// with false tried first. No clause learning. The fixed branching order
// makes verdicts and models reproducible across runs and threads.

#include <array>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "specdiag/error.hpp"
#include "specdiag/model.hpp"

namespace specdiag {

struct CnfFormula {
  int variable_count = 0;
  std::vector<Clause> clauses;

  void validate() const {
    if (variable_count < 0) throw ContractViolation("negative variable count");
    for (std::size_t i = 0; i < clauses.size(); ++i) {
      if (clauses[i].empty())
        throw ContractViolation("clause " + std::to_string(i + 1) + " is empty");
      for (Literal lit : clauses[i])
        if (lit == 0 || std::abs(lit) > variable_count)
          throw ContractViolation("literal " + std::to_string(lit) + " out of range in clause " +
                                  std::to_string(i + 1));
    }
  }
};

struct Verdict {
  bool consistent = false;
  // model[v] for v in 1..variable_count; index 0 unused. Present iff consistent.
  std::optional<std::vector<bool>> model;

  bool value(int var) const {
    if (!model || var < 1 || static_cast<std::size_t>(var) >= model->size())
      throw ContractViolation("no model value for variable " + std::to_string(var));
    return (*model)[static_cast<std::size_t>(var)];
  }
};

inline bool satisfies(const CnfFormula& f, const std::vector<bool>& model) {
  for (const auto& clause : f.clauses) {
    bool sat = false;
    for (Literal lit : clause) {
      const auto v = static_cast<std::size_t>(std::abs(lit));
      if (v < model.size() && model[v] == (lit > 0)) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

struct SolveOptions {
  // Off by default.
  std::optional<std::chrono::milliseconds> timeout;
};

class DpllSolver {
 public:
  explicit DpllSolver(const CnfFormula& formula, SolveOptions options = {})
      : options_(options), n_(formula.variable_count) {
    formula.validate();
    value_.assign(static_cast<std::size_t>(n_) + 1, 0);
    watches_.resize(2 * (static_cast<std::size_t>(n_) + 1));
    for (const auto& raw : formula.clauses) add_clause(raw);
  }

  Verdict run() {
    if (options_.timeout) deadline_ = std::chrono::steady_clock::now() + *options_.timeout;
    for (Literal lit : units_)
      if (!enqueue(lit)) return {};

    int next_var = 1;
    for (;;) {
      if (!propagate()) {
        if (!backtrack(next_var)) return {};
        continue;
      }
      while (next_var <= n_ && value_[static_cast<std::size_t>(next_var)] != 0) ++next_var;
      if (next_var > n_) return make_model();
      tick();
      decisions_.push_back({next_var, false});
      levels_.push_back(trail_.size());
      enqueue(-next_var);
    }
  }

 private:
  struct Decision {
    int var;
    bool flipped;
  };

  static std::size_t code(Literal lit) {
    return 2 * static_cast<std::size_t>(std::abs(lit)) + (lit < 0 ? 1 : 0);
  }

  // 1 true, -1 false, 0 unassigned.
  int lit_value(Literal lit) const {
    const int v = value_[static_cast<std::size_t>(std::abs(lit))];
    return lit > 0 ? v : -v;
  }

  void add_clause(const Clause& raw) {
    Clause c;
    c.reserve(raw.size());
    for (Literal lit : raw) {
      if (std::find(c.begin(), c.end(), -lit) != c.end()) return;  // tautology
      if (std::find(c.begin(), c.end(), lit) == c.end()) c.push_back(lit);
    }
    if (c.size() == 1) {
      units_.push_back(c[0]);
      return;
    }
    const auto index = static_cast<int>(clauses_.size());
    watches_[code(c[0])].push_back(index);
    watches_[code(c[1])].push_back(index);
    clauses_.push_back(std::move(c));
  }

  bool enqueue(Literal lit) {
    const int v = lit_value(lit);
    if (v != 0) return v > 0;
    value_[static_cast<std::size_t>(std::abs(lit))] = lit > 0 ? 1 : -1;
    trail_.push_back(lit);
    return true;
  }

  bool propagate() {
    while (head_ < trail_.size()) {
      const Literal false_lit = -trail_[head_++];
      auto& ws = watches_[code(false_lit)];
      std::size_t i = 0, j = 0;
      while (i < ws.size()) {
        const int ci = ws[i++];
        auto& c = clauses_[static_cast<std::size_t>(ci)];
        if (c[0] == false_lit) std::swap(c[0], c[1]);
        if (lit_value(c[0]) > 0) {
          ws[j++] = ci;
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < c.size(); ++k) {
          if (lit_value(c[k]) >= 0) {
            std::swap(c[1], c[k]);
            watches_[code(c[1])].push_back(ci);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = ci;
        if (lit_value(c[0]) < 0) {
          while (i < ws.size()) ws[j++] = ws[i++];
          ws.resize(j);
          return false;
        }
        enqueue(c[0]);
      }
      ws.resize(j);
      tick();
    }
    return true;
  }

  // Undo to the most recent decision not yet flipped and flip it to true.
  bool backtrack(int& next_var) {
    while (!decisions_.empty()) {
      const std::size_t mark = levels_.back();
      while (trail_.size() > mark) {
        const int v = std::abs(trail_.back());
        value_[static_cast<std::size_t>(v)] = 0;
        next_var = std::min(next_var, v);
        trail_.pop_back();
      }
      head_ = trail_.size();
      Decision& d = decisions_.back();
      if (d.flipped) {
        decisions_.pop_back();
        levels_.pop_back();
        continue;
      }
      d.flipped = true;
      enqueue(d.var);
      return true;
    }
    return false;
  }

  Verdict make_model() const {
    Verdict out;
    out.consistent = true;
    std::vector<bool> model(static_cast<std::size_t>(n_) + 1, false);
    for (int v = 1; v <= n_; ++v) model[static_cast<std::size_t>(v)] = value_[static_cast<std::size_t>(v)] > 0;
    out.model = std::move(model);
    return out;
  }

  void tick() {
    if (!deadline_ || (++ticks_ & 0x3ff) != 0) return;
    if (std::chrono::steady_clock::now() > *deadline_)
      throw SolverTimeout("solver timeout after " + std::to_string(options_.timeout->count()) + " ms");
  }

  SolveOptions options_;
  int n_;
  std::vector<Clause> clauses_;
  std::vector<Literal> units_;
  std::vector<std::vector<int>> watches_;
  std::vector<signed char> value_;
  std::vector<Literal> trail_;
  std::vector<std::size_t> levels_;
  std::vector<Decision> decisions_;
  std::size_t head_ = 0;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
  std::uint64_t ticks_ = 0;
};

inline Verdict solve(const CnfFormula& formula, const SolveOptions& options = {}) {
  return DpllSolver(formula, options).run();
}

// Anything that decides a CNF formula. The default is the built-in DPLL.
using SolverBackend = std::function<Verdict(const CnfFormula&)>;

inline SolverBackend builtin_backend(SolveOptions options = {}) {
  return [options](const CnfFormula& f) { return solve(f, options); };
}

// Conjunction of every clause of every constraint in every part.
// Returns nullopt when some constraint is an explicit contradiction.
template <class Parts>
std::optional<CnfFormula> union_formula(const Parts& parts) {
  CnfFormula f;
  std::optional<std::uint64_t> table;
  for (const ConstraintSet& part : parts) {
    for (const auto& c : part) {
      if (!table) table = c->table();
      else if (*table != c->table())
        throw ContractViolation("constraint '" + c->id() + "' belongs to a different variable table");
    }
  }
  bool contradiction = false;
  for (const ConstraintSet& part : parts) {
    for (const auto& c : part) {
      if (c->is_contradiction()) contradiction = true;
      for (const auto& clause : c->clauses()) {
        for (Literal lit : clause) f.variable_count = std::max(f.variable_count, std::abs(lit));
        f.clauses.push_back(clause);
      }
    }
  }
  if (contradiction) return std::nullopt;
  return f;
}

template <class Parts>
Verdict check_union(const Parts& parts, const SolverBackend& backend) {
  auto f = union_formula(parts);
  if (!f) return {};
  return backend(*f);
}

template <class Parts>
Verdict check_union(const Parts& parts, const SolveOptions& options = {}) {
  auto f = union_formula(parts);
  if (!f) return {};
  return solve(*f, options);
}

inline Verdict check_union(std::initializer_list<std::reference_wrapper<const ConstraintSet>> parts,
                           const SolveOptions& options = {}) {
  return check_union<std::initializer_list<std::reference_wrapper<const ConstraintSet>>>(parts, options);
}

inline Verdict check_union(std::initializer_list<std::reference_wrapper<const ConstraintSet>> parts,
                           const SolverBackend& backend) {
  return check_union<std::initializer_list<std::reference_wrapper<const ConstraintSet>>>(parts, backend);
}

inline Verdict check_key(const CheckKey& key, const SolverBackend& backend) {
  std::array<ConstraintSet, 1> parts{ConstraintSet(key.members())};
  return check_union(parts, backend);
}

inline void write_dimacs(std::ostream& out, const CnfFormula& f) {
  out << "p cnf " << f.variable_count << ' ' << f.clauses.size() << '\n';
  for (const auto& clause : f.clauses) {
    for (Literal lit : clause) out << lit << ' ';
    out << "0\n";
  }
}

inline std::string to_dimacs(const CnfFormula& f) {
  std::ostringstream out;
  write_dimacs(out, f);
  return out.str();
}

// Runs an external DIMACS solver as `<command> <file>` and reads the
// competition-format answer ("s SATISFIABLE" / "s UNSATISFIABLE" plus
// "v ..." model lines) from its stdout.
class ExternalSolver {
 public:
  explicit ExternalSolver(std::string command) : command_(std::move(command)) {}

  Verdict operator()(const CnfFormula& f) const { return solve(f); }

  Verdict solve(const CnfFormula& f) const {
    f.validate();
    auto path = std::filesystem::temp_directory_path() / "specdiag-XXXXXX.cnf";
    std::string templ = path.string();
    const int fd = ::mkstemps(templ.data(), 4);
    if (fd < 0) throw Error("cannot create temporary DIMACS file");
    ::close(fd);
    struct Cleanup {
      std::string p;
      ~Cleanup() { std::filesystem::remove(p); }
    } cleanup{templ};
    {
      std::ofstream out(templ);
      write_dimacs(out, f);
      if (!out) throw Error("cannot write temporary DIMACS file");
    }
    const std::string cmd = command_ + " '" + templ + "' 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) throw Error("cannot start external solver: " + command_);
    std::string output;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) output += buf.data();
    ::pclose(pipe);
    return parse_answer(output, f.variable_count);
  }

  static Verdict parse_answer(const std::string& output, int variable_count) {
    std::istringstream in(output);
    std::string line;
    std::optional<bool> sat;
    std::vector<bool> model(static_cast<std::size_t>(variable_count) + 1, false);
    while (std::getline(in, line)) {
      if (line.rfind("s ", 0) == 0) {
        if (line.find("UNSATISFIABLE") != std::string::npos) sat = false;
        else if (line.find("SATISFIABLE") != std::string::npos) sat = true;
      } else if (line.rfind("v ", 0) == 0) {
        std::istringstream vs(line.substr(2));
        int lit = 0;
        while (vs >> lit)
          if (lit != 0 && std::abs(lit) <= variable_count)
            model[static_cast<std::size_t>(std::abs(lit))] = lit > 0;
      }
    }
    if (!sat) throw Error("external solver produced no 's' answer line");
    Verdict v;
    v.consistent = *sat;
    if (*sat) v.model = std::move(model);
    return v;
  }

 private:
  std::string command_;
};

}  // namespace specdiag
