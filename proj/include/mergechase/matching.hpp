#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mergechase/instance.hpp"

namespace mergechase {

enum class ExecPolicy : std::uint8_t { Serial, Parallel };

// One set-variable: the occurrence of `var` at argument `pos` of atom `atom`.
struct SetVarOcc {
  std::string var;
  std::size_t atom = 0;
  std::size_t pos = 0;
};

// A conjunction after the tau transform. Set-variables are numbered in
// occurrence order (atom by atom, left to right).
struct TauConjunction {
  Conjunction atoms;
  std::vector<std::vector<int>> set_var_at;  // [atom][pos] -> set-variable or -1
  std::vector<SetVarOcc> set_vars;
  std::map<std::string, std::vector<std::size_t>> set_vars_of;  // SetVar(x)
  std::vector<std::string> entity_vars;                         // first-occurrence order
  std::vector<std::string> value_vars;

  std::size_t size() const { return atoms.size(); }
  // S1^z style name of set-variable k.
  std::string set_var_name(std::size_t k) const;
};

TauConjunction tau(const SymbolTable& symbols, const Conjunction& conj);

struct Assignment {
  std::map<std::string, Cell> entity_vars;
  std::map<Sym, Cell> values;  // value constant -> the set it is mapped to
  std::vector<Cell> set_vars;  // indexed like TauConjunction::set_vars
  std::vector<Fact> image;     // indexed by atom

  // Intersection of the images of SetVar(x).
  Cell value_of(const TauConjunction& t, const std::string& x) const;

  auto operator<=>(const Assignment&) const = default;
};

// Bindings an enumeration must respect: entity variables fixed to a class,
// value variables whose running intersection must keep including a set.
struct MatchSeed {
  std::map<std::string, Cell> entity;
  std::map<std::string, Cell> value_floor;
};

// Calls `visit` for each assignment in canonical order (facts in instance
// order, atoms left to right). `visit` returns false to stop early.
void for_each_assignment(const Instance& i, const TauConjunction& t, const MatchSeed& seed,
                         const std::function<bool(const Assignment&)>& visit);

std::vector<Assignment> enumerate_assignments(const Instance& i, const TauConjunction& t,
                                              ExecPolicy policy = ExecPolicy::Parallel);
// Serial reference and OpenMP kernel; both return the same sequence.
std::vector<Assignment> enumerate_assignments_serial(const Instance& i, const TauConjunction& t);
std::vector<Assignment> enumerate_assignments_parallel(const Instance& i, const TauConjunction& t);

struct CompiledRule {
  const Rule* rule = nullptr;
  TauConjunction body;
  TauConjunction head;  // tgds only
  std::vector<std::string> frontier;
};

CompiledRule compile_rule(const SymbolTable& symbols, const Rule& rule);

// A head assignment mu' agreeing with mu on frontier entity variables and
// whose frontier value intersections include mu's, if one exists.
std::optional<Assignment> check_tgd_extension(const Instance& i, const CompiledRule& tgd,
                                              const Assignment& mu);

// True iff `mu` (a body assignment of `rule`) violates the rule's clause.
bool is_trigger(const Instance& i, const CompiledRule& rule, const Assignment& mu);

struct RuleCheck {
  bool satisfied = true;
  std::optional<Assignment> violation;
};

RuleCheck satisfies_rule(const Instance& i, const CompiledRule& rule);
RuleCheck satisfies_rule(const Instance& i, const SymbolTable& symbols, const Rule& rule);

struct DatabaseCheck {
  bool satisfied = true;
  std::optional<Fact> missing;  // as a singleton-cell fact
};

// Every ground atom of D_O and every materialized built-in fact has a fact
// with componentwise containing cells.
DatabaseCheck satisfies_database(const Instance& i, const KnowledgeBase& kb);

// Both lines of a solution check, rule by rule.
bool is_solution(const Instance& i, const KnowledgeBase& kb);

// A homomorphism, stored as the images of the nulls of the source; entities
// and values map to themselves.
struct Homomorphism {
  std::map<Sym, Sym> nulls;
  Sym operator()(Sym s) const;
  Cell apply(const Cell& c) const;
  Fact apply(const Fact& f) const;
  bool operator==(const Homomorphism&) const = default;
};

std::optional<Homomorphism> find_homomorphism(const Instance& from, const Instance& to);
// Checks the defining conditions of `h` from `from` into `to`.
bool verify_homomorphism(const Instance& from, const Instance& to, const Homomorphism& h);
Homomorphism compose(const Homomorphism& first, const Homomorphism& second);

}  // namespace mergechase
