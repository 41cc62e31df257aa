#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mergechase {

// A symbol is a 32-bit id: the top two bits carry the alphabet (entity,
// entity-null, value, value-null), the rest an index. Entities and values
// index into the SymbolTable; nulls carry their counter directly, so minting
// a null never touches the table.
enum class SymKind : std::uint8_t { Entity = 0, EntityNull = 1, Value = 2, ValueNull = 3 };

using Sym = std::uint32_t;

inline constexpr unsigned kSymKindShift = 30;
inline constexpr Sym kSymIndexMask = (Sym{1} << kSymKindShift) - 1;

constexpr Sym make_sym(SymKind kind, std::uint32_t index) {
  return (static_cast<Sym>(kind) << kSymKindShift) | (index & kSymIndexMask);
}
constexpr SymKind sym_kind(Sym s) { return static_cast<SymKind>(s >> kSymKindShift); }
constexpr std::uint32_t sym_index(Sym s) { return s & kSymIndexMask; }
constexpr bool is_null(Sym s) {
  return sym_kind(s) == SymKind::EntityNull || sym_kind(s) == SymKind::ValueNull;
}
constexpr bool is_entity_side(Sym s) {
  return sym_kind(s) == SymKind::Entity || sym_kind(s) == SymKind::EntityNull;
}

enum class ArgType : std::uint8_t { Entity, Value };
enum class PredKind : std::uint8_t { KB, BuiltIn };

using PredId = std::uint32_t;

struct PredicateSignature {
  std::string name;
  std::vector<ArgType> types;
  PredKind kind = PredKind::KB;

  std::size_t arity() const { return types.size(); }
  bool operator==(const PredicateSignature&) const = default;
};

// Typed literal. Numbers keep a canonical decimal spelling so that equal
// decimal values intern to one id (0.60 and 0.6 are the same value).
struct ValueLit {
  bool numeric = false;
  std::string text;

  bool operator==(const ValueLit&) const = default;
};

// Canonical decimal text of a numeric literal, or nullopt if `text` is not a
// decimal of the form -?digits(.digits)?.
std::optional<std::string> canonical_decimal(std::string_view text);

// Three-way comparison of two canonical decimals by value.
int compare_decimal(std::string_view a, std::string_view b);

class SymbolTable {
 public:
  Sym intern_entity(std::string_view name);
  Sym intern_value(const ValueLit& lit);
  Sym intern_string(std::string_view s) { return intern_value({false, std::string(s)}); }
  // Throws std::invalid_argument when `text` is not a decimal literal.
  Sym intern_number(std::string_view text);

  std::optional<Sym> find_entity(std::string_view name) const;
  std::optional<Sym> find_value(const ValueLit& lit) const;

  const std::string& entity_name(Sym s) const { return entities_.at(sym_index(s)); }
  const ValueLit& value(Sym s) const { return values_.at(sym_index(s)); }

  std::size_t entity_count() const { return entities_.size(); }
  std::size_t value_count() const { return values_.size(); }

  PredId add_predicate(PredicateSignature sig);
  std::optional<PredId> find_predicate(std::string_view name) const;
  const PredicateSignature& predicate(PredId id) const { return predicates_.at(id); }
  std::size_t predicate_count() const { return predicates_.size(); }

  // Human/JSON token for a symbol: entity names bare, strings quoted,
  // numbers bare, nulls as e⊥k / v⊥k.
  std::string render(Sym s) const;
  // Inverse of render() for one token; interns as needed. Throws
  // std::invalid_argument on malformed tokens.
  Sym parse_token(std::string_view token, ArgType expected);

  // Total order used for output: entities by name, then entity-nulls by
  // counter; strings lexicographically, then numbers by value, then
  // value-nulls by counter.
  bool output_less(Sym a, Sym b) const;

  bool operator==(const SymbolTable& other) const {
    return entities_ == other.entities_ && values_ == other.values_ &&
           predicates_ == other.predicates_;
  }

 private:
  std::vector<std::string> entities_;
  std::unordered_map<std::string, Sym> entity_ids_;
  std::vector<ValueLit> values_;
  std::map<std::pair<bool, std::string>, Sym> value_ids_;
  std::vector<PredicateSignature> predicates_;
  std::unordered_map<std::string, PredId> predicate_ids_;
};

std::string quote_string(std::string_view s);
std::string null_name(Sym s);

}  // namespace mergechase
