#pragma once

// Reading knowledge bases and requirements.
//
// KB grammar, one item per line, '#' starts a comment:
//
//   var Smartwatch, Connector, GPS      # declarations, before first use
//   c0: Smartwatch
//   c5: Connector <-> (GPS | Cellular)
//   c6: Screen <-> xor(Analog, HighResolution, Eink)
//
// Operators from tightest to loosest: ! & | -> <->. '->' is right
// associative, '<->' left associative. xor(...) is n-ary exactly-one.
// `true` and `false` are constants.
//
// Requirements files hold `id: name=t|f` lines; file order is the
// preference order. DIMACS files become a background set with one
// constraint per clause, named kb1..kbN.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "specdiag/error.hpp"
#include "specdiag/model.hpp"
#include "specdiag/sat.hpp"

namespace specdiag {

struct Formula {
  enum class Kind { constant, var, negation, conjunction, disjunction, implies, iff, exactly_one };

  Kind kind = Kind::constant;
  int var = 0;         // Kind::var
  bool value = false;  // Kind::constant
  std::vector<Formula> children;

  static Formula constant(bool v) { return {Kind::constant, 0, v, {}}; }
  static Formula variable(int index) { return {Kind::var, index, false, {}}; }
  static Formula negation(Formula f) { return {Kind::negation, 0, false, {std::move(f)}}; }
  static Formula make(Kind k, std::vector<Formula> children) { return {k, 0, false, std::move(children)}; }

  bool is_literal() const {
    return kind == Kind::var || (kind == Kind::negation && children[0].kind == Kind::var);
  }

  friend bool operator==(const Formula&, const Formula&) = default;
};

// Fully parenthesized for every binary or n-ary child, so printing and
// reparsing yields the same tree.
inline std::string format_formula(const Formula& f, const VariableTable& vars) {
  using K = Formula::Kind;
  auto child = [&](const Formula& c) {
    auto s = format_formula(c, vars);
    switch (c.kind) {
      case K::conjunction:
      case K::disjunction:
      case K::implies:
      case K::iff:
        return "(" + s + ")";
      default:
        return s;
    }
  };
  auto join = [&](const char* op) {
    std::string out;
    for (std::size_t i = 0; i < f.children.size(); ++i) {
      if (i) out += op;
      out += child(f.children[i]);
    }
    return out;
  };
  switch (f.kind) {
    case K::constant:
      return f.value ? "true" : "false";
    case K::var:
      return vars.name(f.var);
    case K::negation:
      return "!" + child(f.children[0]);
    case K::conjunction:
      return join(" & ");
    case K::disjunction:
      return join(" | ");
    case K::implies:
      return join(" -> ");
    case K::iff:
      return join(" <-> ");
    case K::exactly_one: {
      std::string out = "xor(";
      for (std::size_t i = 0; i < f.children.size(); ++i) {
        if (i) out += ", ";
        out += format_formula(f.children[i], vars);
      }
      return out + ")";
    }
  }
  return {};
}

namespace detail {

inline bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::string_view strip_comment(std::string_view line) {
  auto hash = line.find('#');
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

class FormulaParser {
 public:
  FormulaParser(std::string_view text, std::size_t line, std::size_t column_offset,
                const VariableTable& vars)
      : text_(text), line_(line), offset_(column_offset), vars_(vars) {}

  Formula parse() {
    Formula f = parse_iff();
    skip_ws();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, offset_ + pos_ + 1); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(std::string_view tok) {
    skip_ws();
    if (text_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }

  // Identifiers may contain '-' when it is followed by another identifier
  // character and is not the start of '->'.
  std::string ident() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (is_ident_char(c)) {
        ++pos_;
      } else if (c == '-' && pos_ > start && pos_ + 1 < text_.size() && text_[pos_ + 1] != '>' &&
                 is_ident_char(text_[pos_ + 1])) {
        ++pos_;
      } else {
        break;
      }
    }
    if (pos_ == start) fail("expected a variable, '(' or '!'");
    return std::string(text_.substr(start, pos_ - start));
  }

  Formula parse_iff() {
    Formula lhs = parse_implies();
    while (accept("<->")) lhs = Formula::make(Formula::Kind::iff, {std::move(lhs), parse_implies()});
    return lhs;
  }

  Formula parse_implies() {
    Formula lhs = parse_or();
    if (accept("->")) return Formula::make(Formula::Kind::implies, {std::move(lhs), parse_implies()});
    return lhs;
  }

  Formula parse_or() {
    std::vector<Formula> parts{parse_and()};
    for (;;) {
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '|') {
        ++pos_;
        parts.push_back(parse_and());
      } else {
        break;
      }
    }
    if (parts.size() == 1) return std::move(parts[0]);
    return Formula::make(Formula::Kind::disjunction, std::move(parts));
  }

  Formula parse_and() {
    std::vector<Formula> parts{parse_unary()};
    while (accept("&")) parts.push_back(parse_unary());
    if (parts.size() == 1) return std::move(parts[0]);
    return Formula::make(Formula::Kind::conjunction, std::move(parts));
  }

  Formula parse_unary() {
    if (accept("!")) return Formula::negation(parse_unary());
    return parse_primary();
  }

  Formula parse_primary() {
    if (accept("(")) {
      Formula f = parse_iff();
      expect(")");
      return f;
    }
    const std::size_t at = (skip_ws(), pos_);
    std::string name = ident();
    if (name == "true") return Formula::constant(true);
    if (name == "false") return Formula::constant(false);
    if (name == "xor" && accept("(")) {
      std::vector<Formula> args{parse_iff()};
      while (accept(",")) args.push_back(parse_iff());
      expect(")");
      return Formula::make(Formula::Kind::exactly_one, std::move(args));
    }
    auto index = vars_.find(name);
    if (!index) {
      pos_ = at;
      fail("undeclared variable '" + name + "'");
    }
    return Formula::variable(*index);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_;
  std::size_t offset_;
  const VariableTable& vars_;
};

// Removes constants; the result is either a constant or constant-free.
inline Formula fold_constants(const Formula& f) {
  using K = Formula::Kind;
  auto is_const = [](const Formula& g, bool v) { return g.kind == K::constant && g.value == v; };
  switch (f.kind) {
    case K::constant:
    case K::var:
      return f;
    case K::negation: {
      Formula c = fold_constants(f.children[0]);
      if (c.kind == K::constant) return Formula::constant(!c.value);
      return Formula::negation(std::move(c));
    }
    case K::conjunction:
    case K::disjunction: {
      const bool unit = f.kind == K::conjunction;  // neutral element
      std::vector<Formula> kept;
      for (const auto& child : f.children) {
        Formula c = fold_constants(child);
        if (is_const(c, !unit)) return Formula::constant(!unit);
        if (!is_const(c, unit)) kept.push_back(std::move(c));
      }
      if (kept.empty()) return Formula::constant(unit);
      if (kept.size() == 1) return std::move(kept[0]);
      return Formula::make(f.kind, std::move(kept));
    }
    case K::implies: {
      Formula a = fold_constants(f.children[0]);
      Formula b = fold_constants(f.children[1]);
      if (is_const(a, false) || is_const(b, true)) return Formula::constant(true);
      if (is_const(a, true)) return b;
      if (is_const(b, false)) return fold_constants(Formula::negation(std::move(a)));
      return Formula::make(K::implies, {std::move(a), std::move(b)});
    }
    case K::iff: {
      Formula a = fold_constants(f.children[0]);
      Formula b = fold_constants(f.children[1]);
      if (a.kind == K::constant && b.kind == K::constant) return Formula::constant(a.value == b.value);
      if (a.kind == K::constant) std::swap(a, b);
      if (b.kind == K::constant) return b.value ? a : fold_constants(Formula::negation(std::move(a)));
      return Formula::make(K::iff, {std::move(a), std::move(b)});
    }
    case K::exactly_one: {
      std::vector<Formula> open;
      int trues = 0;
      for (const auto& child : f.children) {
        Formula c = fold_constants(child);
        if (c.kind == K::constant) trues += c.value;
        else open.push_back(std::move(c));
      }
      if (trues >= 2) return Formula::constant(false);
      if (trues == 1) {
        if (open.empty()) return Formula::constant(true);
        std::vector<Formula> negs;
        for (auto& o : open) negs.push_back(Formula::negation(std::move(o)));
        if (negs.size() == 1) return std::move(negs[0]);
        return Formula::make(K::conjunction, std::move(negs));
      }
      if (open.empty()) return Formula::constant(false);
      return Formula::make(K::exactly_one, std::move(open));
    }
  }
  return f;
}

class CnfEncoder {
 public:
  explicit CnfEncoder(VariableTable& vars) : vars_(vars) {}

  void assert_formula(const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind) {
      case K::constant:
        throw ContractViolation("constants must be folded before encoding");
      case K::var:
        emit({f.var});
        return;
      case K::negation:
        assert_negated(f.children[0]);
        return;
      case K::conjunction:
        for (const auto& c : f.children) assert_formula(c);
        return;
      case K::disjunction: {
        Clause clause;
        collect_disjuncts(f, clause);
        emit(std::move(clause));
        return;
      }
      case K::implies: {
        Clause clause;
        const Formula& antecedent = f.children[0];
        if (antecedent.kind == K::conjunction) {
          for (const auto& c : antecedent.children) clause.push_back(-literal(c));
        } else {
          clause.push_back(-literal(antecedent));
        }
        collect_disjuncts(f.children[1], clause);
        emit(std::move(clause));
        return;
      }
      case K::iff: {
        const Literal a = literal(f.children[0]);
        const Literal b = literal(f.children[1]);
        emit({-a, b});
        emit({-b, a});
        return;
      }
      case K::exactly_one: {
        Clause lits;
        for (const auto& c : f.children) lits.push_back(literal(c));
        emit(lits);
        for (std::size_t i = 0; i < lits.size(); ++i)
          for (std::size_t j = i + 1; j < lits.size(); ++j) emit({-lits[i], -lits[j]});
        return;
      }
    }
  }

  std::vector<Clause> take() { return std::move(clauses_); }

 private:
  void emit(Clause c) { clauses_.push_back(std::move(c)); }

  void assert_negated(const Formula& g) {
    using K = Formula::Kind;
    switch (g.kind) {
      case K::var:
        emit({-g.var});
        return;
      case K::negation:
        assert_formula(g.children[0]);
        return;
      case K::conjunction: {
        Clause clause;
        for (const auto& c : g.children) clause.push_back(-literal(c));
        emit(std::move(clause));
        return;
      }
      case K::disjunction:
        for (const auto& c : g.children) assert_negated(c);
        return;
      case K::implies:
        assert_formula(g.children[0]);
        assert_negated(g.children[1]);
        return;
      default:
        emit({-literal(g)});
        return;
    }
  }

  void collect_disjuncts(const Formula& f, Clause& out) {
    if (f.kind == Formula::Kind::disjunction) {
      for (const auto& c : f.children) collect_disjuncts(c, out);
    } else {
      out.push_back(literal(f));
    }
  }

  Literal literal(const Formula& f) {
    if (f.kind == Formula::Kind::var) return f.var;
    if (f.kind == Formula::Kind::negation) return -literal(f.children[0]);
    return define(f);
  }

  // Fresh t with t <-> f.
  Literal define(const Formula& f) {
    using K = Formula::Kind;
    Clause lits;
    for (const auto& c : f.children) lits.push_back(literal(c));
    const Literal t = vars_.add_auxiliary();
    switch (f.kind) {
      case K::conjunction: {
        Clause back{t};
        for (Literal l : lits) {
          emit({-t, l});
          back.push_back(-l);
        }
        emit(std::move(back));
        break;
      }
      case K::disjunction: {
        Clause fwd{-t};
        for (Literal l : lits) {
          emit({t, -l});
          fwd.push_back(l);
        }
        emit(std::move(fwd));
        break;
      }
      case K::implies:
        emit({-t, -lits[0], lits[1]});
        emit({t, lits[0]});
        emit({t, -lits[1]});
        break;
      case K::iff:
        emit({-t, -lits[0], lits[1]});
        emit({-t, lits[0], -lits[1]});
        emit({t, lits[0], lits[1]});
        emit({t, -lits[0], -lits[1]});
        break;
      case K::exactly_one: {
        Clause alo{-t};
        alo.insert(alo.end(), lits.begin(), lits.end());
        emit(std::move(alo));
        for (std::size_t i = 0; i < lits.size(); ++i)
          for (std::size_t j = i + 1; j < lits.size(); ++j) emit({-t, -lits[i], -lits[j]});
        for (std::size_t i = 0; i < lits.size(); ++i) {
          Clause only{t, -lits[i]};
          for (std::size_t j = 0; j < lits.size(); ++j)
            if (j != i) only.push_back(lits[j]);
          emit(std::move(only));
        }
        break;
      }
      default:
        throw ContractViolation("cannot define a literal or constant");
    }
    return t;
  }

  VariableTable& vars_;
  std::vector<Clause> clauses_;
};

}  // namespace detail

inline Formula parse_formula(std::string_view text, const VariableTable& vars, std::size_t line = 1) {
  return detail::FormulaParser(text, line, 0, vars).parse();
}

struct CnfResult {
  std::vector<Clause> clauses;
  bool contradiction = false;
};

// Equisatisfiable clause form. Literals and literal clauses pass through
// unchanged; compound subformulas get auxiliary variables appended to
// `vars`.
inline CnfResult to_cnf(const Formula& f, VariableTable& vars) {
  Formula folded = detail::fold_constants(f);
  if (folded.kind == Formula::Kind::constant) return {{}, !folded.value};
  detail::CnfEncoder encoder(vars);
  encoder.assert_formula(folded);
  return {encoder.take(), false};
}

struct KnowledgeBase {
  std::shared_ptr<VariableTable> variables;
  ConstraintSet constraints;
};

inline KnowledgeBase parse_kb(std::string_view text, std::uint32_t ordinal_base = 0) {
  auto vars = std::make_shared<VariableTable>();
  struct Pending {
    std::string id;
    Formula formula;
  };
  std::vector<Pending> pending;
  std::unordered_set<std::string> ids;

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    start = end + 1;
    ++line_no;

    std::string_view line = detail::strip_comment(raw);
    if (detail::trim(line).empty()) continue;

    const auto lead = line.find_first_not_of(" \t\r");
    if (line.substr(lead, 3) == "var" && lead + 3 < line.size() &&
        std::isspace(static_cast<unsigned char>(line[lead + 3]))) {
      std::string decl(line.substr(lead + 3));
      std::replace(decl.begin(), decl.end(), ',', ' ');
      std::istringstream names(decl);
      std::string name;
      while (names >> name) {
        if (vars->find(name)) throw ParseError("duplicate variable '" + name + "'", line_no, lead + 1);
        if (name == "true" || name == "false" || name == "xor")
          throw ParseError("reserved word '" + name + "' used as variable", line_no, lead + 1);
        vars->declare(name);
      }
      continue;
    }

    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw ParseError("expected 'id: formula'", line_no, lead + 1);
    const std::string id(detail::trim(line.substr(0, colon)));
    if (id.empty() || !std::all_of(id.begin(), id.end(), [](char c) { return detail::is_ident_char(c) || c == '-'; }))
      throw ParseError("invalid constraint id '" + id + "'", line_no, lead + 1);
    if (!ids.insert(id).second) throw ParseError("duplicate constraint id '" + id + "'", line_no, lead + 1);
    Formula f = detail::FormulaParser(line.substr(colon + 1), line_no, colon + 1, *vars).parse();
    pending.push_back({id, std::move(f)});
  }

  std::vector<ConstraintRef> members;
  members.reserve(pending.size());
  std::uint32_t ordinal = ordinal_base;
  for (auto& p : pending) {
    std::string label = format_formula(p.formula, *vars);
    CnfResult cnf = to_cnf(p.formula, *vars);
    if (cnf.contradiction)
      members.push_back(make_constraint(Constraint::contradiction(p.id, ordinal++, std::move(label), vars->identity())));
    else
      members.push_back(make_constraint(p.id, std::move(cnf.clauses), ordinal++, std::move(label), vars->identity()));
  }
  return {vars, ConstraintSet(std::move(members))};
}

inline std::string format_kb(const KnowledgeBase& kb) {
  std::string out;
  if (kb.variables->named_count() > 0) {
    out += "var ";
    for (int i = 1; i <= kb.variables->named_count(); ++i) {
      if (i > 1) out += ", ";
      out += kb.variables->name(i);
    }
    out += '\n';
  }
  for (const auto& c : kb.constraints) out += c->id() + ": " + c->label() + '\n';
  return out;
}

struct RequirementEntry {
  std::string id;
  std::string variable;
  bool value = true;

  friend bool operator==(const RequirementEntry&, const RequirementEntry&) = default;
};

// Ordered unit assignments; order is the preference order of C_R.
using RequirementSpec = std::vector<RequirementEntry>;

inline RequirementSpec parse_requirement_spec(std::string_view text) {
  RequirementSpec spec;
  std::unordered_set<std::string> ids, names;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = detail::strip_comment(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (detail::trim(line).empty()) continue;

    const auto colon = line.find(':');
    const auto eq = line.rfind('=');
    if (colon == std::string_view::npos || eq == std::string_view::npos || eq < colon)
      throw ParseError("expected 'id: name=t|f'", line_no, 1);
    RequirementEntry entry;
    entry.id = std::string(detail::trim(line.substr(0, colon)));
    entry.variable = std::string(detail::trim(line.substr(colon + 1, eq - colon - 1)));
    const auto value = detail::trim(line.substr(eq + 1));
    if (value == "t" || value == "true") entry.value = true;
    else if (value == "f" || value == "false") entry.value = false;
    else throw ParseError("value must be t or f", line_no, eq + 2);
    if (entry.id.empty() || entry.variable.empty()) throw ParseError("expected 'id: name=t|f'", line_no, 1);
    if (!ids.insert(entry.id).second) throw ParseError("duplicate requirement id '" + entry.id + "'", line_no, 1);
    if (!names.insert(entry.variable).second)
      throw ParseError("variable '" + entry.variable + "' assigned twice", line_no, colon + 2);
    spec.push_back(std::move(entry));
  }
  return spec;
}

inline std::string format_requirements(const RequirementSpec& spec) {
  std::string out;
  for (const auto& r : spec) out += r.id + ": " + r.variable + "=" + (r.value ? "t" : "f") + "\n";
  return out;
}

// Unit constraints over `vars`, ordinals continuing from `ordinal_base`.
inline ConstraintSet compile_requirements(const RequirementSpec& spec, const VariableTable& vars,
                                          std::uint32_t ordinal_base) {
  std::vector<ConstraintRef> out;
  out.reserve(spec.size());
  std::uint32_t ordinal = ordinal_base;
  for (const auto& r : spec) {
    auto index = vars.find(r.variable);
    if (!index) throw ContractViolation("requirement '" + r.id + "' uses undeclared variable '" + r.variable + "'");
    const Literal lit = r.value ? *index : -*index;
    out.push_back(make_constraint(r.id, std::vector<Clause>{{lit}}, ordinal++,
                                  r.variable + "=" + (r.value ? "t" : "f"), vars.identity()));
  }
  return ConstraintSet(std::move(out));
}

inline ConstraintSet parse_requirements(std::string_view text, const KnowledgeBase& kb) {
  return compile_requirements(parse_requirement_spec(text), *kb.variables,
                              static_cast<std::uint32_t>(kb.constraints.size()));
}

inline KnowledgeBase parse_dimacs(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      lines.emplace_back(text.substr(start, end - start));
      start = end + 1;
    }
  }

  // "c <index>[$] <name>" comments name variables.
  std::vector<std::pair<int, std::string>> names;
  for (const auto& line : lines) {
    if (line.empty() || line[0] != 'c') continue;
    std::istringstream in(line.substr(1));
    std::string index_tok;
    if (!(in >> index_tok)) continue;
    if (!index_tok.empty() && index_tok.back() == '$') index_tok.pop_back();
    if (index_tok.empty() || !std::all_of(index_tok.begin(), index_tok.end(), ::isdigit)) continue;
    std::string name;
    std::getline(in, name);
    name = std::string(detail::trim(name));
    if (!name.empty()) names.emplace_back(std::stoi(index_tok), name);
  }

  int variable_count = -1;
  long long declared_clauses = -1;
  std::vector<std::vector<Literal>> clauses;
  Clause current;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = detail::trim(lines[i]);
    if (line.empty() || line[0] == 'c') continue;
    if (line[0] == '%') break;
    if (line[0] == 'p') {
      std::istringstream in{std::string(line)};
      std::string p, fmt;
      if (!(in >> p >> fmt >> variable_count >> declared_clauses) || fmt != "cnf" || variable_count < 0 ||
          declared_clauses < 0)
        throw ParseError("malformed DIMACS header", i + 1, 1);
      continue;
    }
    if (variable_count < 0) throw ParseError("clause before 'p cnf' header", i + 1, 1);
    std::istringstream in{std::string(line)};
    std::string tok;
    while (in >> tok) {
      int lit = 0;
      try {
        std::size_t used = 0;
        lit = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError("invalid literal '" + tok + "'", i + 1, 1);
      }
      if (lit == 0) {
        clauses.push_back(std::move(current));
        current.clear();
      } else {
        if (std::abs(lit) > variable_count)
          throw ParseError("literal " + tok + " exceeds variable count " + std::to_string(variable_count), i + 1, 1);
        current.push_back(lit);
      }
    }
  }
  if (variable_count < 0) throw ParseError("missing 'p cnf' header", 1, 1);
  if (!current.empty()) clauses.push_back(std::move(current));
  if (static_cast<long long>(clauses.size()) != declared_clauses)
    throw ParseError("header declares " + std::to_string(declared_clauses) + " clauses but body has " +
                         std::to_string(clauses.size()),
                     1, 1);

  std::vector<std::string> var_names(static_cast<std::size_t>(variable_count) + 1);
  for (auto& [index, name] : names)
    if (index >= 1 && index <= variable_count) var_names[static_cast<std::size_t>(index)] = name;
  auto vars = std::make_shared<VariableTable>();
  for (int v = 1; v <= variable_count; ++v) {
    auto& n = var_names[static_cast<std::size_t>(v)];
    vars->declare(n.empty() ? "x" + std::to_string(v) : n);
  }

  std::vector<ConstraintRef> members;
  members.reserve(clauses.size());
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    const std::string id = "kb" + std::to_string(i + 1);
    const auto ordinal = static_cast<std::uint32_t>(i);
    if (clauses[i].empty())
      members.push_back(make_constraint(Constraint::contradiction(id, ordinal, "false", vars->identity())));
    else
      members.push_back(make_constraint(id, std::vector<Clause>{clauses[i]}, ordinal, std::string{}, vars->identity()));
  }
  return {vars, ConstraintSet(std::move(members))};
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline KnowledgeBase load_dimacs(const std::filesystem::path& path) { return parse_dimacs(read_file(path)); }

// .cnf and .dimacs files are DIMACS, everything else the KB grammar.
inline KnowledgeBase load_kb(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".cnf" || ext == ".dimacs") return load_dimacs(path);
  return parse_kb(read_file(path));
}

inline ConstraintSet load_requirements(const std::filesystem::path& path, const KnowledgeBase& kb) {
  return parse_requirements(read_file(path), kb);
}

namespace detail {

// Unbiased draw from [0, bound) that does not depend on the standard
// library's distribution implementation.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return x % bound;
}

}  // namespace detail

struct GenOptions {
  std::size_t count = 0;
  std::size_t min_cardinality = 1;
  std::size_t max_cardinality = 1;
  std::uint64_t seed = 141982;
  // Candidates are drawn sequentially and only checked in parallel, so the
  // output does not depend on this.
  std::size_t threads = 1;
};

// Random unit-assignment sets over the named variables of `kb`, kept only
// when inconsistent with it. Cardinality, variables and polarities are
// uniform.
inline std::vector<RequirementSpec> generate_requirements(const KnowledgeBase& kb, const GenOptions& opt) {
  std::vector<RequirementSpec> out;
  if (opt.count == 0) return out;
  const auto features = static_cast<std::size_t>(kb.variables->named_count());
  if (opt.min_cardinality < 1 || opt.min_cardinality > opt.max_cardinality || opt.max_cardinality > features)
    throw ContractViolation("cardinality range must lie within [1, " + std::to_string(features) + "]");
  if (!check_union({std::cref(kb.constraints)}).consistent)
    throw InconsistentBackground("knowledge base is inconsistent");

  std::string prefix = "r";
  auto collides = [&] {
    return std::any_of(kb.constraints.begin(), kb.constraints.end(), [&](const ConstraintRef& c) {
      return c->id().rfind(prefix, 0) == 0 &&
             std::all_of(c->id().begin() + static_cast<std::ptrdiff_t>(prefix.size()), c->id().end(), ::isdigit);
    });
  };
  while (collides()) prefix = "u" + prefix;

  std::mt19937_64 rng(opt.seed);
  std::vector<int> pool(features);
  auto draw = [&] {
    const std::size_t span = opt.max_cardinality - opt.min_cardinality + 1;
    const std::size_t card = opt.min_cardinality + detail::uniform_below(rng, span);
    for (std::size_t i = 0; i < features; ++i) pool[i] = static_cast<int>(i + 1);
    RequirementSpec spec;
    spec.reserve(card);
    for (std::size_t i = 0; i < card; ++i) {
      const std::size_t j = i + detail::uniform_below(rng, features - i);
      std::swap(pool[i], pool[j]);
      const bool value = detail::uniform_below(rng, 2) == 1;
      spec.push_back({prefix + std::to_string(i + 1), kb.variables->name(pool[i]), value});
    }
    return spec;
  };
  auto inconsistent = [&](const RequirementSpec& spec) {
    ConstraintSet reqs = compile_requirements(spec, *kb.variables, static_cast<std::uint32_t>(kb.constraints.size()));
    return !check_union({std::cref(kb.constraints), std::cref(reqs)}).consistent;
  };

  const std::size_t budget = 1000 * opt.count;
  const std::size_t threads = std::max<std::size_t>(1, opt.threads);
  const std::size_t batch = std::max<std::size_t>(16, 4 * threads);
  std::size_t attempts = 0;
  while (out.size() < opt.count && attempts < budget) {
    std::vector<RequirementSpec> candidates;
    for (std::size_t i = 0; i < batch && attempts + i < budget; ++i) candidates.push_back(draw());
    std::vector<char> verdicts(candidates.size());
    if (threads == 1) {
      for (std::size_t i = 0; i < candidates.size(); ++i) verdicts[i] = inconsistent(candidates[i]);
    } else {
      std::vector<std::future<void>> jobs;
      for (std::size_t t = 0; t < threads; ++t)
        jobs.push_back(std::async(std::launch::async, [&, t] {
          for (std::size_t i = t; i < candidates.size(); i += threads) verdicts[i] = inconsistent(candidates[i]);
        }));
      for (auto& j : jobs) j.get();
    }
    for (std::size_t i = 0; i < candidates.size() && out.size() < opt.count; ++i) {
      ++attempts;
      if (verdicts[i]) out.push_back(std::move(candidates[i]));
    }
  }
  if (out.size() < opt.count) throw SamplingExhausted(attempts, out.size(), opt.count);
  return out;
}

}  // namespace specdiag
