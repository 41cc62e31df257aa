#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mergechase/json_io.hpp"
#include "mergechase/oracle.hpp"
#include "mergechase/parser.hpp"

namespace mctest {

using namespace mergechase;

inline std::string test_path(const std::string& rel) { return std::string(MERGECHASE_TEST_DIR) + "/" + rel; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Program load(const std::string& name) { return parse_program(slurp(test_path("data/" + name))); }

inline std::vector<ScriptStep> script(const std::string& name) {
  return parse_script(slurp(test_path("data/" + name)));
}

inline Instance instance_of(SymbolTable& sy, const std::vector<std::string>& facts) {
  Instance i;
  for (const auto& f : facts) i.insert(parse_fact_text(f, sy));
  return i;
}

inline bool is_builtin(const SymbolTable& sy, const Fact& f) {
  return sy.predicate(f.pred).kind == PredKind::BuiltIn;
}

// Canonical texts of the KB facts, built-in facts left out.
inline std::set<std::string> kb_facts(const SymbolTable& sy, const Instance& i) {
  std::set<std::string> out;
  for (const auto& f : i.facts()) {
    if (!is_builtin(sy, f)) out.insert(render_fact(sy, f));
  }
  return out;
}

// Renumbers each kind of null 1, 2, ... keeping their relative order.
inline Instance renumber_nulls(const Instance& i) {
  std::set<Sym> nulls;
  for (const auto& f : i.facts()) {
    for (const auto& c : f.cells) {
      for (Sym s : c.members) {
        if (is_null(s)) nulls.insert(s);
      }
    }
  }
  Homomorphism h;
  std::uint32_t next_e = 1, next_v = 1;
  for (Sym s : nulls) {
    bool entity = sym_kind(s) == SymKind::EntityNull;
    h.nulls[s] = make_sym(sym_kind(s), entity ? next_e++ : next_v++);
  }
  Instance out;
  for (const auto& f : i.facts()) out.insert(h.apply(f));
  return out;
}

inline bool hom_equivalent(const Instance& a, const Instance& b) {
  return find_homomorphism(a, b).has_value() && find_homomorphism(b, a).has_value();
}

}  // namespace mctest
