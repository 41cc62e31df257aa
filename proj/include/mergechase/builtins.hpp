#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "mergechase/instance.hpp"

namespace mergechase {

// Built-in applied to something that is not a value of the expected sort.
class BuiltinTypeError : public Error {
 public:
  using Error::Error;
};

// Where the candidate arguments of a built-in come from when D_B is
// materialized: all values of the KB, or only value constants of the TBox.
enum class BuiltinDomain : std::uint8_t { Data, Constant };
enum class LiteralSort : std::uint8_t { String, Number, Any };

struct BuiltinArg {
  BuiltinDomain domain = BuiltinDomain::Data;
  LiteralSort sort = LiteralSort::Any;
};

struct BuiltinDef {
  std::string name;
  std::vector<BuiltinArg> args;
  // Receives literals already checked against `args[i].sort`.
  std::function<bool(const std::vector<const ValueLit*>&)> eval;
  bool enabled = true;
};

class BuiltinRegistry {
 public:
  // jacc_sim enabled; eq and leq registered but disabled.
  static const BuiltinRegistry& standard();

  void add(BuiltinDef def);
  void set_enabled(std::string_view name, bool on);
  const BuiltinDef* find(std::string_view name) const;
  std::vector<std::string> names() const;

  // Evaluates `name` on value symbols. Throws BuiltinTypeError on nulls or
  // wrongly sorted literals and std::out_of_range on unknown names.
  bool holds(const SymbolTable& symbols, std::string_view name, const std::vector<Sym>& args) const;

 private:
  std::vector<BuiltinDef> defs_;
};

struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;
  bool operator==(const Ratio&) const = default;
};

// Jaccard similarity of the sets of Unicode scalar values of a and b, as an
// unreduced fraction |A∩B| / |A∪B|. Two empty strings are identical (1/1).
Ratio jaccard_similarity(std::string_view a, std::string_view b);

// r > t, exactly, for a canonical decimal t.
bool ratio_exceeds(Ratio r, std::string_view decimal);

bool jacc_sim(std::string_view a, std::string_view b, std::string_view threshold);

// D_B: every built-in fact B({v1},...,{vn}) that holds, for the built-ins
// used in the TBox, with arguments drawn according to their BuiltinDomain.
std::vector<Fact> materialize_builtin_facts(const KnowledgeBase& kb,
                                            const BuiltinRegistry& registry = BuiltinRegistry::standard());

}  // namespace mergechase
