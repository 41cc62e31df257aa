#include "mergechase/symbols.hpp"

#include <cctype>
#include <charconv>
#include <stdexcept>

namespace mergechase {

namespace {

constexpr std::string_view kBottom = "\xE2\x8A\xA5";  // U+22A5

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::optional<std::string> canonical_decimal(std::string_view text) {
  if (text.empty()) return std::nullopt;
  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    i = 1;
  }
  std::string int_part;
  while (i < text.size() && is_digit(text[i])) int_part.push_back(text[i++]);
  std::string frac_part;
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && is_digit(text[i])) frac_part.push_back(text[i++]);
    if (frac_part.empty()) return std::nullopt;
  }
  if (i != text.size() || int_part.empty()) return std::nullopt;

  std::size_t lead = int_part.find_first_not_of('0');
  int_part = lead == std::string::npos ? "0" : int_part.substr(lead);
  while (!frac_part.empty() && frac_part.back() == '0') frac_part.pop_back();

  std::string out;
  if (negative && !(int_part == "0" && frac_part.empty())) out.push_back('-');
  out += int_part;
  if (!frac_part.empty()) {
    out.push_back('.');
    out += frac_part;
  }
  return out;
}

int compare_decimal(std::string_view a, std::string_view b) {
  bool neg_a = !a.empty() && a[0] == '-';
  bool neg_b = !b.empty() && b[0] == '-';
  if (neg_a != neg_b) return neg_a ? -1 : 1;
  if (neg_a) {
    a.remove_prefix(1);
    b.remove_prefix(1);
  }
  auto split = [](std::string_view s) {
    auto dot = s.find('.');
    if (dot == std::string_view::npos) return std::pair{s, std::string_view{}};
    return std::pair{s.substr(0, dot), s.substr(dot + 1)};
  };
  auto [ia, fa] = split(a);
  auto [ib, fb] = split(b);
  int mag = 0;
  if (ia.size() != ib.size()) {
    mag = ia.size() < ib.size() ? -1 : 1;
  } else if (int c = ia.compare(ib); c != 0) {
    mag = c < 0 ? -1 : 1;
  } else {
    std::size_t n = std::max(fa.size(), fb.size());
    for (std::size_t k = 0; k < n && mag == 0; ++k) {
      char ca = k < fa.size() ? fa[k] : '0';
      char cb = k < fb.size() ? fb[k] : '0';
      if (ca != cb) mag = ca < cb ? -1 : 1;
    }
  }
  return neg_a ? -mag : mag;
}

Sym SymbolTable::intern_entity(std::string_view name) {
  auto it = entity_ids_.find(std::string(name));
  if (it != entity_ids_.end()) return it->second;
  Sym s = make_sym(SymKind::Entity, static_cast<std::uint32_t>(entities_.size()));
  entities_.emplace_back(name);
  entity_ids_.emplace(std::string(name), s);
  return s;
}

Sym SymbolTable::intern_value(const ValueLit& lit) {
  ValueLit key = lit;
  if (key.numeric) {
    auto canon = canonical_decimal(key.text);
    if (!canon) throw std::invalid_argument("not a decimal literal: " + key.text);
    key.text = *canon;
  }
  auto it = value_ids_.find({key.numeric, key.text});
  if (it != value_ids_.end()) return it->second;
  Sym s = make_sym(SymKind::Value, static_cast<std::uint32_t>(values_.size()));
  value_ids_.emplace(std::pair{key.numeric, key.text}, s);
  values_.push_back(std::move(key));
  return s;
}

Sym SymbolTable::intern_number(std::string_view text) {
  return intern_value({true, std::string(text)});
}

std::optional<Sym> SymbolTable::find_entity(std::string_view name) const {
  auto it = entity_ids_.find(std::string(name));
  if (it == entity_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<Sym> SymbolTable::find_value(const ValueLit& lit) const {
  ValueLit key = lit;
  if (key.numeric) {
    auto canon = canonical_decimal(key.text);
    if (!canon) return std::nullopt;
    key.text = *canon;
  }
  auto it = value_ids_.find({key.numeric, key.text});
  if (it == value_ids_.end()) return std::nullopt;
  return it->second;
}

PredId SymbolTable::add_predicate(PredicateSignature sig) {
  if (predicate_ids_.count(sig.name)) {
    throw std::invalid_argument("predicate '" + sig.name + "' declared twice");
  }
  auto id = static_cast<PredId>(predicates_.size());
  predicate_ids_.emplace(sig.name, id);
  predicates_.push_back(std::move(sig));
  return id;
}

std::optional<PredId> SymbolTable::find_predicate(std::string_view name) const {
  auto it = predicate_ids_.find(std::string(name));
  if (it == predicate_ids_.end()) return std::nullopt;
  return it->second;
}

std::string quote_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

std::string null_name(Sym s) {
  std::string out(1, sym_kind(s) == SymKind::EntityNull ? 'e' : 'v');
  out += kBottom;
  out += std::to_string(sym_index(s));
  return out;
}

std::string SymbolTable::render(Sym s) const {
  switch (sym_kind(s)) {
    case SymKind::Entity: return entity_name(s);
    case SymKind::Value: {
      const auto& v = value(s);
      return v.numeric ? v.text : quote_string(v.text);
    }
    default: return null_name(s);
  }
}

Sym SymbolTable::parse_token(std::string_view token, ArgType expected) {
  auto bad = [&](const char* why) {
    return std::invalid_argument(std::string(why) + ": '" + std::string(token) + "'");
  };
  if (token.size() > 1 + kBottom.size() && token.substr(1, kBottom.size()) == kBottom &&
      (token[0] == 'e' || token[0] == 'v')) {
    auto digits = token.substr(1 + kBottom.size());
    std::uint32_t k = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || k == 0) {
      throw bad("malformed null");
    }
    bool entity_null = token[0] == 'e';
    if (entity_null != (expected == ArgType::Entity)) throw bad("null of the wrong kind");
    return make_sym(entity_null ? SymKind::EntityNull : SymKind::ValueNull, k);
  }
  if (expected == ArgType::Entity) {
    if (token.empty()) throw bad("empty entity");
    for (char c : token) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) throw bad("bad entity name");
    }
    if (is_digit(token[0])) throw bad("entity names cannot start with a digit");
    return intern_entity(token);
  }
  if (!token.empty() && token.front() == '"') {
    if (token.size() < 2 || token.back() != '"') throw bad("unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < token.size(); ++i) {
      char c = token[i];
      if (c == '\\' && i + 2 < token.size()) {
        char n = token[++i];
        out.push_back(n == 'n' ? '\n' : n == 't' ? '\t' : n);
      } else {
        out.push_back(c);
      }
    }
    return intern_string(out);
  }
  if (!canonical_decimal(token)) throw bad("not a value literal");
  return intern_number(token);
}

bool SymbolTable::output_less(Sym a, Sym b) const {
  SymKind ka = sym_kind(a), kb = sym_kind(b);
  if (ka != kb) return ka < kb;
  switch (ka) {
    case SymKind::Entity: return entity_name(a) < entity_name(b);
    case SymKind::Value: {
      const auto& va = value(a);
      const auto& vb = value(b);
      if (va.numeric != vb.numeric) return !va.numeric;
      if (va.numeric) return compare_decimal(va.text, vb.text) < 0;
      return va.text < vb.text;
    }
    default: return sym_index(a) < sym_index(b);
  }
}

}  // namespace mergechase
