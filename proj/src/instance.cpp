#include "mergechase/instance.hpp"

#include <algorithm>
#include <stdexcept>

#include "mergechase/builtins.hpp"

namespace mergechase {

Cell::Cell(std::vector<Sym> m) : members(std::move(m)) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
}

bool Cell::contains(Sym s) const { return std::binary_search(members.begin(), members.end(), s); }

bool Cell::subset_of(const Cell& other) const {
  return std::includes(other.members.begin(), other.members.end(), members.begin(), members.end());
}

bool Cell::intersects(const Cell& other) const {
  auto a = members.begin(), b = other.members.begin();
  while (a != members.end() && b != other.members.end()) {
    if (*a == *b) return true;
    if (*a < *b) ++a; else ++b;
  }
  return false;
}

Cell cell_intersection(const Cell& a, const Cell& b) {
  Cell out;
  std::set_intersection(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(),
                        std::back_inserter(out.members));
  return out;
}

Cell cell_union(const Cell& a, const Cell& b) {
  Cell out;
  std::set_union(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(),
                 std::back_inserter(out.members));
  return out;
}

bool dominated_or_equal(std::span<const Cell> a, std::span<const Cell> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].subset_of(b[i])) return false;
  }
  return true;
}

Dominance compare_tuples(std::span<const Cell> a, std::span<const Cell> b) {
  if (a.size() != b.size()) throw std::invalid_argument("tuples of different length");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].empty() && !b[i].empty() && a[i].is_entity() != b[i].is_entity()) {
      throw std::invalid_argument("component " + std::to_string(i + 1) + " differs in kind");
    }
  }
  bool le = dominated_or_equal(a, b);
  bool ge = dominated_or_equal(b, a);
  if (le && ge) return Dominance::Equal;
  if (le) return Dominance::DominatedBy;
  if (ge) return Dominance::Dominates;
  return Dominance::Incomparable;
}

// ---------------------------------------------------------------------------

void EntityPartition::acquire(const Cell& cell) {
  auto it = rep_of_.find(cell.members.front());
  if (it == rep_of_.end()) {
    for (Sym m : cell.members) {
      if (rep_of_.count(m)) {
        throw InvariantError("entity cell overlaps an existing class without equalling it");
      }
    }
    Sym rep = cell.members.front();
    for (Sym m : cell.members) rep_of_[m] = rep;
    classes_[rep] = Class{cell.members, 1};
    return;
  }
  auto& cls = classes_.at(it->second);
  if (cls.members != cell.members) {
    throw InvariantError("entity cell overlaps an existing class without equalling it");
  }
  ++cls.refs;
}

void EntityPartition::release(const Cell& cell) {
  Sym rep = class_id(cell);
  auto& cls = classes_.at(rep);
  if (--cls.refs == 0) {
    for (Sym m : cls.members) rep_of_.erase(m);
    classes_.erase(rep);
  }
}

Sym EntityPartition::unite(Sym a, Sym b) {
  if (a == b) return a;
  auto& ca = classes_.at(a);
  auto& cb = classes_.at(b);
  if (ca.members.size() < cb.members.size()) return unite(b, a);
  for (Sym m : cb.members) rep_of_[m] = a;
  std::vector<Sym> merged;
  std::merge(ca.members.begin(), ca.members.end(), cb.members.begin(), cb.members.end(),
             std::back_inserter(merged));
  ca.members = std::move(merged);
  ca.refs += cb.refs;
  classes_.erase(b);
  return a;
}

Sym EntityPartition::class_id(const Cell& cell) const {
  if (cell.empty()) throw InvariantError("empty entity cell");
  auto it = rep_of_.find(cell.members.front());
  if (it == rep_of_.end() || classes_.at(it->second).members != cell.members) {
    throw InvariantError("not a class of this instance");
  }
  return it->second;
}

std::optional<Sym> EntityPartition::find(Sym member) const {
  auto it = rep_of_.find(member);
  if (it == rep_of_.end()) return std::nullopt;
  return it->second;
}

std::vector<Cell> EntityPartition::classes() const {
  std::vector<Cell> out;
  out.reserve(classes_.size());
  for (const auto& [rep, cls] : classes_) out.push_back(Cell{cls.members});
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------

bool Instance::insert(Fact f) {
  invalidate();
  for (const auto& c : f.cells) {
    if (c.empty()) throw InvariantError("fact with an empty cell");
  }
  if (facts_.count(f)) return false;
  std::size_t done = 0;
  try {
    for (const auto& c : f.cells) {
      if (c.is_entity()) eq_.acquire(c);
      ++done;
    }
  } catch (...) {
    for (std::size_t k = 0; k < done; ++k) {
      if (f.cells[k].is_entity()) eq_.release(f.cells[k]);
    }
    throw;
  }
  facts_.insert(std::move(f));
  return true;
}

bool Instance::erase(const Fact& f) {
  invalidate();
  auto it = facts_.find(f);
  if (it == facts_.end()) return false;
  for (const auto& c : it->cells) {
    if (c.is_entity()) eq_.release(c);
  }
  facts_.erase(it);
  return true;
}

std::pair<Instance::const_iterator, Instance::const_iterator> Instance::facts_of(PredId pred) const {
  Fact lo{pred, {}};
  auto first = facts_.lower_bound(lo);
  auto last = first;
  while (last != facts_.end() && last->pred == pred) ++last;
  return {first, last};
}

const Instance::Buckets& Instance::entity_buckets(PredId pred, std::size_t pos) const {
  std::lock_guard lock(cache_->mutex);
  auto [it, fresh] = cache_->by_position.try_emplace({pred, pos});
  if (fresh) {
    auto [first, last] = facts_of(pred);
    for (auto f = first; f != last; ++f) it->second[f->cells.at(pos).members.front()].push_back(&*f);
  }
  return it->second;
}

std::optional<Cell> Instance::class_of(Sym entity) const {
  auto rep = eq_.find(entity);
  if (!rep) return std::nullopt;
  return Cell{eq_.members(*rep)};
}

FactDelta Instance::merge_entity_classes(const Cell& c1, const Cell& c2) {
  invalidate();
  Sym r1 = eq_.class_id(c1);
  Sym r2 = eq_.class_id(c2);
  if (r1 == r2) throw InvariantError("cannot merge a class with itself");

  std::vector<Fact> affected;
  for (const auto& f : facts_) {
    for (const auto& c : f.cells) {
      if (c == c1 || c == c2) {
        affected.push_back(f);
        break;
      }
    }
  }
  for (const auto& f : affected) facts_.erase(f);
  Cell merged = cell_union(c1, c2);
  eq_.unite(r1, r2);

  FactDelta delta;
  std::set<Fact> erased(affected.begin(), affected.end());
  for (const auto& f : affected) {
    Fact g = f;
    for (auto& c : g.cells) {
      if (c == c1 || c == c2) c = merged;
    }
    if (facts_.insert(g).second) {
      if (!erased.count(g)) delta.added.push_back(g);
    } else {
      for (const auto& c : g.cells) {
        if (c.is_entity()) eq_.release(c);
      }
    }
  }
  for (const auto& f : affected) {
    if (!facts_.count(f)) delta.removed.push_back(f);
  }
  return delta;
}

FactDelta Instance::replace_value_cells_local(std::span<const CellEdit> edits,
                                              const Cell& replacement) {
  invalidate();
  if (replacement.empty() || replacement.is_entity()) {
    throw InvariantError("value replacement must be a non-empty value set");
  }
  std::map<Fact, std::set<std::size_t>> grouped;
  for (const auto& e : edits) {
    if (!facts_.count(e.fact)) throw InvariantError("image fact not present");
    auto& pos = grouped[e.fact];
    for (std::size_t p : e.positions) {
      if (p >= e.fact.cells.size() || e.fact.cells[p].is_entity()) {
        throw InvariantError("edit position is not a value argument");
      }
      pos.insert(p);
    }
  }
  std::vector<Fact> rewritten;
  std::set<Fact> erased;
  for (const auto& [f, positions] : grouped) {
    if (positions.empty()) continue;
    Fact g = f;
    for (std::size_t p : positions) g.cells[p] = replacement;
    if (g == f) continue;
    erase(f);
    erased.insert(f);
    rewritten.push_back(std::move(g));
  }
  FactDelta delta;
  for (auto& g : rewritten) {
    bool was_erased = erased.count(g) != 0;
    if (insert(g) && !was_erased) delta.added.push_back(g);
  }
  for (const auto& f : erased) {
    if (!facts_.count(f)) delta.removed.push_back(f);
  }
  std::sort(delta.added.begin(), delta.added.end());
  delta.added.erase(std::unique(delta.added.begin(), delta.added.end()), delta.added.end());
  return delta;
}

// ---------------------------------------------------------------------------

ActiveDomain active_domain(const Instance& i) {
  ActiveDomain out;
  for (const auto& f : i.facts()) {
    for (const auto& c : f.cells) {
      (c.is_entity() ? out.entity_classes : out.value_sets).insert(c);
    }
  }
  return out;
}

UnderlyingDomain underlying_domain(const Instance& i) {
  UnderlyingDomain out;
  for (const auto& f : i.facts()) {
    for (const auto& c : f.cells) {
      auto& into = c.is_entity() ? out.entities : out.values;
      into.insert(c.members.begin(), c.members.end());
    }
  }
  return out;
}

Instance base_instance(const KnowledgeBase& kb) {
  Instance out;
  for (const auto& atom : kb.database) {
    check_ground_atom(kb.symbols, atom);
    Fact f{atom.pred, {}};
    for (Sym s : atom.args) f.cells.push_back(Cell::singleton(s));
    out.insert(std::move(f));
  }
  for (auto& f : materialize_builtin_facts(kb)) out.insert(std::move(f));
  return out;
}

std::pair<std::uint32_t, std::uint32_t> max_null_indices(const Instance& i) {
  std::uint32_t e = 0, v = 0;
  for (const auto& f : i.facts()) {
    for (const auto& c : f.cells) {
      for (Sym s : c.members) {
        if (sym_kind(s) == SymKind::EntityNull) e = std::max(e, sym_index(s));
        if (sym_kind(s) == SymKind::ValueNull) v = std::max(v, sym_index(s));
      }
    }
  }
  return {e, v};
}

std::vector<Sym> output_sorted(const SymbolTable& symbols, const Cell& cell) {
  std::vector<Sym> out = cell.members;
  std::sort(out.begin(), out.end(), [&](Sym a, Sym b) { return symbols.output_less(a, b); });
  return out;
}

std::string render_cell(const SymbolTable& symbols, const Cell& cell) {
  std::string out = cell.is_entity() ? "[" : "{";
  bool first = true;
  for (Sym s : output_sorted(symbols, cell)) {
    if (!first) out += ", ";
    first = false;
    out += symbols.render(s);
  }
  out += cell.is_entity() ? "]" : "}";
  return out;
}

std::string render_fact(const SymbolTable& symbols, const Fact& fact) {
  std::string out = symbols.predicate(fact.pred).name + "(";
  for (std::size_t k = 0; k < fact.cells.size(); ++k) {
    if (k) out += ", ";
    out += render_cell(symbols, fact.cells[k]);
  }
  return out + ")";
}

std::vector<Fact> listing_order(const SymbolTable& symbols, const Instance& i) {
  std::vector<std::pair<std::string, Fact>> keyed;
  for (const auto& f : i.facts()) keyed.emplace_back(render_fact(symbols, f), f);
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Fact> out;
  for (auto& [k, f] : keyed) out.push_back(std::move(f));
  return out;
}

}  // namespace mergechase
