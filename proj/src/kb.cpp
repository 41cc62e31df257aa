#include "mergechase/kb.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace mergechase {

namespace {

using VarTypes = std::map<std::string, ArgType>;

const char* type_name(ArgType t) { return t == ArgType::Entity ? "entity" : "value"; }

VarTypes type_conjunction(const SymbolTable& symbols, const Conjunction& conj,
                          const std::string& where) {
  VarTypes types;
  std::set<std::string> in_kb_atom;
  for (const auto& atom : conj) {
    const auto& sig = symbols.predicate(atom.pred);
    if (atom.args.size() != sig.arity()) {
      throw SchemaError(where + ": " + sig.name + " expects " + std::to_string(sig.arity()) +
                        " arguments, got " + std::to_string(atom.args.size()));
    }
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
      const Term& t = atom.args[i];
      ArgType want = sig.types[i];
      if (t.is_var()) {
        auto [it, fresh] = types.emplace(t.var, want);
        if (!fresh && it->second != want) {
          throw SchemaError(where + ": variable '" + t.var + "' used at both an entity and a " +
                            "value position");
        }
        if (sig.kind == PredKind::KB) in_kb_atom.insert(t.var);
      } else {
        SymKind k = sym_kind(t.constant);
        bool ok = want == ArgType::Entity ? k == SymKind::Entity : k == SymKind::Value;
        if (!ok) {
          throw SchemaError(where + ": argument " + std::to_string(i + 1) + " of " + sig.name +
                            " must be " + type_name(want) + " constant");
        }
      }
    }
  }
  for (const auto& atom : conj) {
    if (symbols.predicate(atom.pred).kind != PredKind::BuiltIn) continue;
    for (const auto& t : atom.args) {
      if (t.is_var() && !in_kb_atom.count(t.var)) {
        throw SchemaError(where + ": variable '" + t.var +
                          "' occurs only in built-in atoms");
      }
    }
  }
  return types;
}

bool mentions(const Conjunction& conj, const std::string& var, bool builtin_only,
              const SymbolTable& symbols) {
  for (const auto& atom : conj) {
    if (builtin_only && symbols.predicate(atom.pred).kind != PredKind::BuiltIn) continue;
    for (const auto& t : atom.args) {
      if (t.is_var() && t.var == var) return true;
    }
  }
  return false;
}

}  // namespace

const char* rule_kind_name(RuleKind kind) {
  switch (kind) {
    case RuleKind::Tgd: return "tgd";
    case RuleKind::EntityEgd: return "eegd";
    case RuleKind::ValueEgd: return "vegd";
  }
  return "?";
}

ArgType variable_type(const SymbolTable& symbols, const Conjunction& conj, const std::string& var) {
  for (const auto& atom : conj) {
    const auto& sig = symbols.predicate(atom.pred);
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
      if (atom.args[i].is_var() && atom.args[i].var == var) return sig.types[i];
    }
  }
  throw SchemaError("variable '" + var + "' does not occur");
}

void check_rule(const SymbolTable& symbols, const Rule& rule) {
  const std::string where = "rule " + rule.id;
  if (rule.body.empty()) throw SchemaError(where + ": empty body");
  VarTypes body_types = type_conjunction(symbols, rule.body, where);

  if (rule.kind == RuleKind::Tgd) {
    if (rule.head.empty()) throw SchemaError(where + ": empty head");
    for (const auto& atom : rule.head) {
      if (symbols.predicate(atom.pred).kind == PredKind::BuiltIn) {
        throw SchemaError(where + ": built-in in tgd head");
      }
      for (const auto& t : atom.args) {
        if (!t.is_var()) throw SchemaError(where + ": constant in tgd head");
      }
    }
    VarTypes head_types = type_conjunction(symbols, rule.head, where);
    std::set<std::string> ex(rule.existentials.begin(), rule.existentials.end());
    if (ex.size() != rule.existentials.size()) {
      throw SchemaError(where + ": duplicate existential variable");
    }
    for (const auto& v : rule.existentials) {
      if (body_types.count(v)) {
        throw SchemaError(where + ": existential variable '" + v + "' occurs in the body");
      }
      if (!head_types.count(v)) {
        throw SchemaError(where + ": existential variable '" + v + "' unused in the head");
      }
    }
    for (const auto& [v, t] : head_types) {
      auto it = body_types.find(v);
      if (it == body_types.end()) {
        if (!ex.count(v)) {
          throw SchemaError(where + ": head variable '" + v + "' is neither frontier nor existential");
        }
      } else if (it->second != t) {
        throw SchemaError(where + ": variable '" + v + "' changes type between body and head");
      }
    }
    return;
  }

  if (rule.lhs == rule.rhs) throw SchemaError(where + ": egd equates a variable with itself");
  auto ly = body_types.find(rule.lhs);
  auto lz = body_types.find(rule.rhs);
  if (ly == body_types.end() || lz == body_types.end()) {
    throw SchemaError(where + ": egd variables must occur in the body");
  }
  if (ly->second != lz->second) {
    throw SchemaError(where + ": egd head variables of mixed kinds");
  }
  ArgType want = rule.kind == RuleKind::EntityEgd ? ArgType::Entity : ArgType::Value;
  if (ly->second != want) {
    throw SchemaError(where + ": " + rule_kind_name(rule.kind) + " must equate " +
                      type_name(want) + "-variables");
  }
  if (rule.kind == RuleKind::ValueEgd && (mentions(rule.body, rule.lhs, true, symbols) ||
                                          mentions(rule.body, rule.rhs, true, symbols))) {
    throw SchemaError(where + ": value-egd variables may not occur in built-in atoms");
  }
}

void check_query(const SymbolTable& symbols, const ConjunctiveQuery& query) {
  const std::string where = "query " + query.name;
  if (query.body.empty()) throw SchemaError(where + ": empty body");
  for (const auto& atom : query.body) {
    if (symbols.predicate(atom.pred).kind == PredKind::BuiltIn) {
      throw SchemaError(where + ": queries must be built-in free");
    }
  }
  VarTypes types = type_conjunction(symbols, query.body, where);
  std::set<std::string> seen;
  for (const auto& v : query.free_vars) {
    if (!types.count(v)) throw SchemaError(where + ": free variable '" + v + "' not in body");
    if (!seen.insert(v).second) throw SchemaError(where + ": repeated free variable '" + v + "'");
  }
  for (const auto& v : query.existentials) {
    if (!types.count(v)) throw SchemaError(where + ": existential '" + v + "' not in body");
    if (seen.count(v)) throw SchemaError(where + ": '" + v + "' is both free and existential");
  }
}

void check_ground_atom(const SymbolTable& symbols, const GroundAtom& atom) {
  const auto& sig = symbols.predicate(atom.pred);
  if (sig.kind == PredKind::BuiltIn) {
    throw SchemaError("fact " + sig.name + ": built-in facts are derived, not stated");
  }
  if (atom.args.size() != sig.arity()) {
    throw SchemaError("fact " + sig.name + ": wrong arity");
  }
  for (std::size_t i = 0; i < atom.args.size(); ++i) {
    SymKind k = sym_kind(atom.args[i]);
    bool ok = sig.types[i] == ArgType::Entity ? k == SymKind::Entity : k == SymKind::Value;
    if (!ok) {
      throw SchemaError("fact " + sig.name + ": argument " + std::to_string(i + 1) +
                        " must be " + type_name(sig.types[i]));
    }
  }
}

void check_kb(const KnowledgeBase& kb) {
  std::set<std::string> ids;
  for (const auto& r : kb.tbox) {
    if (!ids.insert(r.id).second) throw SchemaError("rule id '" + r.id + "' used twice");
    check_rule(kb.symbols, r);
  }
  for (const auto& a : kb.database) check_ground_atom(kb.symbols, a);
}

namespace {

std::string term_text(const SymbolTable& symbols, const Term& t) {
  return t.is_var() ? "?" + t.var : symbols.render(t.constant);
}

bool same_conj(const KnowledgeBase& a, const Conjunction& ca, const KnowledgeBase& b,
               const Conjunction& cb) {
  if (ca.size() != cb.size()) return false;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (a.symbols.predicate(ca[i].pred) != b.symbols.predicate(cb[i].pred)) return false;
    if (ca[i].args.size() != cb[i].args.size()) return false;
    for (std::size_t k = 0; k < ca[i].args.size(); ++k) {
      if (term_text(a.symbols, ca[i].args[k]) != term_text(b.symbols, cb[i].args[k])) return false;
    }
  }
  return true;
}

}  // namespace

bool operator==(const KnowledgeBase& a, const KnowledgeBase& b) {
  if (a.symbols.predicate_count() != b.symbols.predicate_count()) return false;
  for (PredId p = 0; p < a.symbols.predicate_count(); ++p) {
    if (a.symbols.predicate(p) != b.symbols.predicate(p)) return false;
  }
  if (a.tbox.size() != b.tbox.size() || a.database.size() != b.database.size()) return false;
  for (std::size_t i = 0; i < a.tbox.size(); ++i) {
    const Rule& ra = a.tbox[i];
    const Rule& rb = b.tbox[i];
    if (ra.id != rb.id || ra.kind != rb.kind || ra.existentials != rb.existentials ||
        ra.lhs != rb.lhs || ra.rhs != rb.rhs || !same_conj(a, ra.body, b, rb.body) ||
        !same_conj(a, ra.head, b, rb.head)) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.database.size(); ++i) {
    const auto& ga = a.database[i];
    const auto& gb = b.database[i];
    if (a.symbols.predicate(ga.pred) != b.symbols.predicate(gb.pred)) return false;
    if (ga.args.size() != gb.args.size()) return false;
    for (std::size_t k = 0; k < ga.args.size(); ++k) {
      if (a.symbols.render(ga.args[k]) != b.symbols.render(gb.args[k])) return false;
    }
  }
  return true;
}

bool full_tgd_guarantee(const KnowledgeBase& kb) {
  return std::none_of(kb.tbox.begin(), kb.tbox.end(), [](const Rule& r) {
    return r.kind == RuleKind::Tgd && !r.existentials.empty();
  });
}

}  // namespace mergechase
