#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mergechase/symbols.hpp"

namespace mergechase {

// Base of every error the library reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ill-typed or malformed KB content (atoms that do not match their
// signature, rules that break the syntactic restrictions).
class SchemaError : public Error {
 public:
  using Error::Error;
};

struct Term {
  enum class Kind : std::uint8_t { Variable, Constant };
  Kind kind = Kind::Variable;
  std::string var;  // when Variable
  Sym constant = 0;  // when Constant

  static Term variable(std::string name) { return {Kind::Variable, std::move(name), 0}; }
  static Term constant_of(Sym s) { return {Kind::Constant, {}, s}; }
  bool is_var() const { return kind == Kind::Variable; }
  bool operator==(const Term&) const = default;
};

struct Atom {
  PredId pred = 0;
  std::vector<Term> args;
  bool operator==(const Atom&) const = default;
};

using Conjunction = std::vector<Atom>;

enum class RuleKind : std::uint8_t { Tgd, EntityEgd, ValueEgd };

struct Rule {
  std::string id;
  RuleKind kind = RuleKind::Tgd;
  Conjunction body;
  // Tgd only.
  Conjunction head;
  std::vector<std::string> existentials;
  // Egds only: the equated variables.
  std::string lhs;
  std::string rhs;

  bool operator==(const Rule&) const = default;
};

struct GroundAtom {
  PredId pred = 0;
  std::vector<Sym> args;
  bool operator==(const GroundAtom&) const = default;
};

struct ConjunctiveQuery {
  std::string name;
  std::vector<std::string> free_vars;
  std::vector<std::string> existentials;
  Conjunction body;
  bool operator==(const ConjunctiveQuery&) const = default;
};

struct KnowledgeBase {
  SymbolTable symbols;
  std::vector<Rule> tbox;
  std::vector<GroundAtom> database;  // D_O only; built-in facts are derived

  const Rule* find_rule(std::string_view id) const {
    for (const auto& r : tbox) {
      if (r.id == id) return &r;
    }
    return nullptr;
  }
};

// Structural equality up to symbol interning order: predicates by signature,
// rules and facts with constants compared by their rendered form.
bool operator==(const KnowledgeBase& a, const KnowledgeBase& b);

const char* rule_kind_name(RuleKind kind);

// Type of `var` inside `conj` as fixed by the first predicate position it
// occupies; throws SchemaError if the variable is absent.
ArgType variable_type(const SymbolTable& symbols, const Conjunction& conj, const std::string& var);

// Checks every syntactic restriction on a rule (typing, built-in safety, tgd
// heads built-in and constant free, egd variables). Throws SchemaError.
void check_rule(const SymbolTable& symbols, const Rule& rule);
void check_query(const SymbolTable& symbols, const ConjunctiveQuery& query);
void check_ground_atom(const SymbolTable& symbols, const GroundAtom& atom);
// All of the above over a whole KB.
void check_kb(const KnowledgeBase& kb);

// True iff no tgd of the TBox has existential variables (every chase
// sequence is then finite).
bool full_tgd_guarantee(const KnowledgeBase& kb);

}  // namespace mergechase
