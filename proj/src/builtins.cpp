#include "mergechase/builtins.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace mergechase {

namespace {

std::vector<char32_t> code_points(std::string_view s) {
  std::vector<char32_t> out;
  for (std::size_t i = 0; i < s.size();) {
    auto c = static_cast<unsigned char>(s[i]);
    int len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > s.size()) {
      // Stray byte: count it as its own symbol.
      out.push_back(0x110000 + c);
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? c : c & (0x7F >> len);
    for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += len;
  }
  return out;
}

bool sort_ok(const ValueLit& lit, LiteralSort sort) {
  switch (sort) {
    case LiteralSort::String: return !lit.numeric;
    case LiteralSort::Number: return lit.numeric;
    case LiteralSort::Any: return true;
  }
  return false;
}

const char* sort_name(LiteralSort sort) {
  switch (sort) {
    case LiteralSort::String: return "string";
    case LiteralSort::Number: return "number";
    case LiteralSort::Any: return "value";
  }
  return "?";
}

BuiltinRegistry make_standard() {
  BuiltinRegistry r;
  r.add({"jacc_sim",
         {{BuiltinDomain::Data, LiteralSort::String},
          {BuiltinDomain::Data, LiteralSort::String},
          {BuiltinDomain::Constant, LiteralSort::Number}},
         [](const std::vector<const ValueLit*>& a) { return jacc_sim(a[0]->text, a[1]->text, a[2]->text); },
         true});
  r.add({"eq",
         {{BuiltinDomain::Data, LiteralSort::Any}, {BuiltinDomain::Data, LiteralSort::Any}},
         [](const std::vector<const ValueLit*>& a) { return *a[0] == *a[1]; },
         false});
  r.add({"leq",
         {{BuiltinDomain::Data, LiteralSort::Number}, {BuiltinDomain::Data, LiteralSort::Number}},
         [](const std::vector<const ValueLit*>& a) { return compare_decimal(a[0]->text, a[1]->text) <= 0; },
         false});
  return r;
}

}  // namespace

const BuiltinRegistry& BuiltinRegistry::standard() {
  static const BuiltinRegistry registry = make_standard();
  return registry;
}

void BuiltinRegistry::add(BuiltinDef def) {
  if (find(def.name)) throw std::invalid_argument("built-in '" + def.name + "' registered twice");
  defs_.push_back(std::move(def));
}

void BuiltinRegistry::set_enabled(std::string_view name, bool on) {
  for (auto& d : defs_) {
    if (d.name == name) {
      d.enabled = on;
      return;
    }
  }
  throw std::out_of_range("unknown built-in '" + std::string(name) + "'");
}

const BuiltinDef* BuiltinRegistry::find(std::string_view name) const {
  for (const auto& d : defs_) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

std::vector<std::string> BuiltinRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& d : defs_) out.push_back(d.name);
  return out;
}

bool BuiltinRegistry::holds(const SymbolTable& symbols, std::string_view name,
                            const std::vector<Sym>& args) const {
  const BuiltinDef* def = find(name);
  if (!def) throw std::out_of_range("unknown built-in '" + std::string(name) + "'");
  if (args.size() != def->args.size()) {
    throw BuiltinTypeError(std::string(name) + ": wrong number of arguments");
  }
  std::vector<const ValueLit*> lits;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (sym_kind(args[i]) != SymKind::Value) {
      throw BuiltinTypeError(std::string(name) + ": argument " + std::to_string(i + 1) +
                             " is not a value");
    }
    const ValueLit& lit = symbols.value(args[i]);
    if (!sort_ok(lit, def->args[i].sort)) {
      throw BuiltinTypeError(std::string(name) + ": argument " + std::to_string(i + 1) +
                             " must be a " + sort_name(def->args[i].sort));
    }
    lits.push_back(&lit);
  }
  return def->eval(lits);
}

Ratio jaccard_similarity(std::string_view a, std::string_view b) {
  auto ca = code_points(a);
  auto cb = code_points(b);
  std::set<char32_t> sa(ca.begin(), ca.end());
  std::set<char32_t> sb(cb.begin(), cb.end());
  if (sa.empty() && sb.empty()) return {1, 1};
  std::int64_t inter = 0;
  for (char32_t c : sa) inter += sb.count(c);
  auto uni = static_cast<std::int64_t>(sa.size() + sb.size()) - inter;
  return {inter, uni};
}

bool ratio_exceeds(Ratio r, std::string_view decimal) {
  auto canon = canonical_decimal(decimal);
  if (!canon) throw BuiltinTypeError("not a decimal threshold: " + std::string(decimal));
  std::string_view t = *canon;
  if (t.front() == '-') return true;
  auto dot = t.find('.');
  std::string_view ip = t.substr(0, dot);
  std::string_view fp = dot == std::string_view::npos ? std::string_view{} : t.substr(dot + 1);
  if (ip.size() > 18) return false;
  if (fp.size() > 18) fp = fp.substr(0, 18);
  __int128 scale = 1;
  for (std::size_t k = 0; k < fp.size(); ++k) scale *= 10;
  __int128 tn = 0;
  for (char c : ip) tn = tn * 10 + (c - '0');
  for (char c : fp) tn = tn * 10 + (c - '0');
  // r.num / r.den > tn / scale
  return static_cast<__int128>(r.num) * scale > tn * static_cast<__int128>(r.den);
}

bool jacc_sim(std::string_view a, std::string_view b, std::string_view threshold) {
  return ratio_exceeds(jaccard_similarity(a, b), threshold);
}

std::vector<Fact> materialize_builtin_facts(const KnowledgeBase& kb, const BuiltinRegistry& registry) {
  const auto& symbols = kb.symbols;
  std::set<PredId> used;
  std::set<Sym> tbox_values;
  auto scan = [&](const Conjunction& conj) {
    for (const auto& atom : conj) {
      if (symbols.predicate(atom.pred).kind == PredKind::BuiltIn) used.insert(atom.pred);
      for (const auto& t : atom.args) {
        if (!t.is_var() && sym_kind(t.constant) == SymKind::Value) tbox_values.insert(t.constant);
      }
    }
  };
  for (const auto& r : kb.tbox) {
    scan(r.body);
    scan(r.head);
  }
  if (used.empty()) return {};

  std::set<Sym> data_values = tbox_values;
  for (const auto& g : kb.database) {
    for (Sym s : g.args) {
      if (sym_kind(s) == SymKind::Value) data_values.insert(s);
    }
  }

  std::vector<Fact> out;
  for (PredId pred : used) {
    const auto& sig = symbols.predicate(pred);
    const BuiltinDef* def = registry.find(sig.name);
    if (!def) throw SchemaError("unknown built-in '" + sig.name + "'");
    if (def->args.size() != sig.arity()) {
      throw SchemaError("built-in '" + sig.name + "' has arity " + std::to_string(def->args.size()));
    }
    std::vector<std::vector<Sym>> pools;
    for (const auto& arg : def->args) {
      const auto& src = arg.domain == BuiltinDomain::Data ? data_values : tbox_values;
      std::vector<Sym> pool;
      for (Sym s : src) {
        if (sort_ok(symbols.value(s), arg.sort)) pool.push_back(s);
      }
      pools.push_back(std::move(pool));
    }
    if (std::any_of(pools.begin(), pools.end(), [](const auto& p) { return p.empty(); })) continue;
    std::vector<std::size_t> idx(pools.size(), 0);
    std::vector<Sym> args(pools.size());
    bool more = true;
    while (more) {
      for (std::size_t k = 0; k < pools.size(); ++k) args[k] = pools[k][idx[k]];
      if (registry.holds(symbols, sig.name, args)) {
        Fact f{pred, {}};
        for (Sym s : args) f.cells.push_back(Cell::singleton(s));
        out.push_back(std::move(f));
      }
      more = false;
      for (std::size_t k = pools.size(); k-- > 0;) {
        if (++idx[k] < pools[k].size()) {
          more = true;
          break;
        }
        idx[k] = 0;
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace mergechase
