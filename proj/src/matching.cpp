#include "mergechase/matching.hpp"

#include <algorithm>
#include <iterator>
#include <unordered_map>
#include <omp.h>

#include "mergechase/builtins.hpp"

namespace mergechase {

std::string TauConjunction::set_var_name(std::size_t k) const {
  const auto& occ = set_vars.at(k);
  const auto& same = set_vars_of.at(occ.var);
  auto rank = std::find(same.begin(), same.end(), k) - same.begin();
  return "S" + std::to_string(rank + 1) + "^" + occ.var;
}

TauConjunction tau(const SymbolTable& symbols, const Conjunction& conj) {
  TauConjunction t;
  t.atoms = conj;
  for (std::size_t a = 0; a < conj.size(); ++a) {
    const auto& sig = symbols.predicate(conj[a].pred);
    t.set_var_at.emplace_back(conj[a].args.size(), -1);
    for (std::size_t p = 0; p < conj[a].args.size(); ++p) {
      const Term& term = conj[a].args[p];
      if (!term.is_var()) continue;
      auto& order = sig.types[p] == ArgType::Entity ? t.entity_vars : t.value_vars;
      if (std::find(order.begin(), order.end(), term.var) == order.end()) order.push_back(term.var);
      if (sig.types[p] == ArgType::Value) {
        t.set_var_at[a][p] = static_cast<int>(t.set_vars.size());
        t.set_vars_of[term.var].push_back(t.set_vars.size());
        t.set_vars.push_back({term.var, a, p});
      }
    }
  }
  return t;
}

Cell Assignment::value_of(const TauConjunction& t, const std::string& x) const {
  const auto& ks = t.set_vars_of.at(x);
  Cell out = set_vars.at(ks.front());
  for (std::size_t j = 1; j < ks.size(); ++j) out = cell_intersection(out, set_vars.at(ks[j]));
  return out;
}

namespace {

struct Slot {
  enum Kind : std::uint8_t { EntVar, EntConst, ValConst, SetVar } kind;
  std::size_t var = 0;  // entity-var index or value-var index
  Sym constant = 0;
};

struct Plan {
  std::vector<std::vector<Slot>> slots;
  std::vector<std::optional<Cell>> seed_entity;
  std::vector<std::optional<Cell>> floor;
  // Per atom, an entity position already bound when the atom is reached.
  std::vector<std::optional<std::size_t>> probe;
};

Plan make_plan(const TauConjunction& t, const MatchSeed& seed) {
  Plan plan;
  auto index_of = [](const std::vector<std::string>& v, const std::string& x) {
    return static_cast<std::size_t>(std::find(v.begin(), v.end(), x) - v.begin());
  };
  for (std::size_t a = 0; a < t.atoms.size(); ++a) {
    std::vector<Slot> row;
    for (std::size_t p = 0; p < t.atoms[a].args.size(); ++p) {
      const Term& term = t.atoms[a].args[p];
      if (t.set_var_at[a][p] >= 0) {
        row.push_back({Slot::SetVar, index_of(t.value_vars, term.var), 0});
      } else if (term.is_var()) {
        row.push_back({Slot::EntVar, index_of(t.entity_vars, term.var), 0});
      } else if (is_entity_side(term.constant)) {
        row.push_back({Slot::EntConst, 0, term.constant});
      } else {
        row.push_back({Slot::ValConst, 0, term.constant});
      }
    }
    plan.slots.push_back(std::move(row));
  }
  plan.seed_entity.resize(t.entity_vars.size());
  for (std::size_t k = 0; k < t.entity_vars.size(); ++k) {
    auto it = seed.entity.find(t.entity_vars[k]);
    if (it != seed.entity.end()) plan.seed_entity[k] = it->second;
  }
  plan.floor.resize(t.value_vars.size());
  for (std::size_t k = 0; k < t.value_vars.size(); ++k) {
    auto it = seed.value_floor.find(t.value_vars[k]);
    if (it != seed.value_floor.end()) plan.floor[k] = it->second;
  }
  std::vector<bool> bound(t.entity_vars.size());
  for (std::size_t k = 0; k < bound.size(); ++k) bound[k] = plan.seed_entity[k].has_value();
  for (const auto& row : plan.slots) {
    std::optional<std::size_t> probe;
    for (std::size_t p = 0; p < row.size() && !probe; ++p) {
      if (row[p].kind == Slot::EntConst || (row[p].kind == Slot::EntVar && bound[row[p].var])) probe = p;
    }
    plan.probe.push_back(probe);
    for (const auto& slot : row) {
      if (slot.kind == Slot::EntVar) bound[slot.var] = true;
    }
  }
  return plan;
}

// Facts of each probed atom bucketed by the first member of the probed
// class, in instance order. Small predicates are left to a plain scan.
struct ProbeIndex {
  static constexpr std::size_t kMinFacts = 16;
  std::vector<const Instance::Buckets*> buckets;

  ProbeIndex(const Instance& i, const TauConjunction& t, const Plan& plan) {
    buckets.resize(t.atoms.size(), nullptr);
    for (std::size_t a = 0; a < t.atoms.size(); ++a) {
      if (!plan.probe[a]) continue;
      auto [first, last] = i.facts_of(t.atoms[a].pred);
      if (static_cast<std::size_t>(std::distance(first, last)) < kMinFacts) continue;
      buckets[a] = &i.entity_buckets(t.atoms[a].pred, *plan.probe[a]);
    }
  }
};

struct State {
  std::vector<std::optional<Cell>> ent;
  std::vector<std::optional<Cell>> inter;
  std::map<Sym, Cell> values;
  std::vector<const Fact*> image;
};

class Search {
 public:
  Search(const Instance& i, const TauConjunction& t, const Plan& plan, const ProbeIndex& index,
         const std::function<bool(const Assignment&)>& visit)
      : inst_(i), t_(t), plan_(plan), index_(index), visit_(visit) {}

  // Runs the search; when `only_first` is set, atom 0 is matched against that
  // fact alone. Returns false if the visitor stopped it.
  bool run(const Fact* only_first) {
    State s;
    s.ent = plan_.seed_entity;
    s.inter.resize(t_.value_vars.size());
    s.image.resize(t_.atoms.size(), nullptr);
    only_first_ = only_first;
    return step(0, s);
  }

 private:
  // Same verdict as extend() without touching the state.
  bool compatible(std::size_t a, const Fact& f, const State& s) const {
    const auto& row = plan_.slots[a];
    for (std::size_t p = 0; p < row.size(); ++p) {
      const Cell& cell = f.cells[p];
      const Slot& slot = row[p];
      switch (slot.kind) {
        case Slot::EntVar:
          if (s.ent[slot.var] && *s.ent[slot.var] != cell) return false;
          break;
        case Slot::EntConst:
          if (!cell.contains(slot.constant)) return false;
          break;
        case Slot::ValConst: {
          if (!cell.contains(slot.constant)) return false;
          auto it = s.values.find(slot.constant);
          if (it != s.values.end() && it->second != cell) return false;
          break;
        }
        case Slot::SetVar: {
          const auto& cur = s.inter[slot.var];
          if (cur && !cur->intersects(cell)) return false;
          const auto& fl = plan_.floor[slot.var];
          if (fl && !fl->subset_of(cell)) return false;
          break;
        }
      }
    }
    return true;
  }

  bool extend(std::size_t a, const Fact& f, State& s) const {
    const auto& row = plan_.slots[a];
    for (std::size_t p = 0; p < row.size(); ++p) {
      const Cell& cell = f.cells[p];
      const Slot& slot = row[p];
      switch (slot.kind) {
        case Slot::EntVar:
          if (s.ent[slot.var]) {
            if (*s.ent[slot.var] != cell) return false;
          } else {
            s.ent[slot.var] = cell;
          }
          break;
        case Slot::EntConst:
          if (!cell.contains(slot.constant)) return false;
          break;
        case Slot::ValConst: {
          if (!cell.contains(slot.constant)) return false;
          auto [it, fresh] = s.values.emplace(slot.constant, cell);
          if (!fresh && it->second != cell) return false;
          break;
        }
        case Slot::SetVar: {
          auto& cur = s.inter[slot.var];
          cur = cur ? cell_intersection(*cur, cell) : cell;
          if (cur->empty()) return false;
          const auto& fl = plan_.floor[slot.var];
          if (fl && !fl->subset_of(*cur)) return false;
          break;
        }
      }
    }
    return true;
  }

  bool step(std::size_t a, const State& s) {
    if (a == t_.atoms.size()) return emit(s);
    auto visit = [&](const Fact& f) {
      if (a == 0 && only_first_ && &f != only_first_) return true;
      if (!compatible(a, f, s)) return true;
      State next = s;
      if (!extend(a, f, next)) return true;
      next.image[a] = &f;
      return step(a + 1, next);
    };
    if (const auto* b = index_.buckets[a]) {
      const Slot& slot = plan_.slots[a][*plan_.probe[a]];
      std::optional<Sym> key;
      if (slot.kind == Slot::EntVar) {
        key = s.ent[slot.var]->members.front();
      } else if (auto c = inst_.class_of(slot.constant)) {
        key = c->members.front();
      }
      if (!key) return true;
      auto hit = b->find(*key);
      if (hit == b->end()) return true;
      for (const Fact* f : hit->second) {
        if (!visit(*f)) return false;
      }
      return true;
    }
    auto [first, last] = inst_.facts_of(t_.atoms[a].pred);
    for (auto it = first; it != last; ++it) {
      if (!visit(*it)) return false;
    }
    return true;
  }

  bool emit(const State& s) const {
    Assignment mu;
    for (std::size_t k = 0; k < t_.entity_vars.size(); ++k) {
      if (s.ent[k]) mu.entity_vars.emplace(t_.entity_vars[k], *s.ent[k]);
    }
    mu.values = s.values;
    for (const auto& occ : t_.set_vars) mu.set_vars.push_back(s.image[occ.atom]->cells[occ.pos]);
    for (const Fact* f : s.image) mu.image.push_back(*f);
    return visit_(mu);
  }

  const Instance& inst_;
  const TauConjunction& t_;
  const Plan& plan_;
  const ProbeIndex& index_;
  const std::function<bool(const Assignment&)>& visit_;
  const Fact* only_first_ = nullptr;
};

}  // namespace

void for_each_assignment(const Instance& i, const TauConjunction& t, const MatchSeed& seed,
                         const std::function<bool(const Assignment&)>& visit) {
  Plan plan = make_plan(t, seed);
  ProbeIndex index(i, t, plan);
  Search(i, t, plan, index, visit).run(nullptr);
}

std::vector<Assignment> enumerate_assignments_serial(const Instance& i, const TauConjunction& t) {
  std::vector<Assignment> out;
  for_each_assignment(i, t, {}, [&](const Assignment& mu) {
    out.push_back(mu);
    return true;
  });
  return out;
}

std::vector<Assignment> enumerate_assignments_parallel(const Instance& i, const TauConjunction& t) {
  if (t.atoms.empty()) return enumerate_assignments_serial(i, t);
  std::vector<const Fact*> roots;
  auto [first, last] = i.facts_of(t.atoms[0].pred);
  for (auto it = first; it != last; ++it) roots.push_back(&*it);
  Plan plan = make_plan(t, {});
  ProbeIndex index(i, t, plan);
  std::vector<std::vector<Assignment>> parts(roots.size());
  const auto n = static_cast<std::int64_t>(roots.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t r = 0; r < n; ++r) {
    auto& part = parts[r];
    std::function<bool(const Assignment&)> visit = [&part](const Assignment& mu) {
      part.push_back(mu);
      return true;
    };
    Search(i, t, plan, index, visit).run(roots[r]);
  }
  std::vector<Assignment> out;
  for (auto& part : parts) {
    for (auto& mu : part) out.push_back(std::move(mu));
  }
  return out;
}

std::vector<Assignment> enumerate_assignments(const Instance& i, const TauConjunction& t,
                                              ExecPolicy policy) {
  return policy == ExecPolicy::Parallel ? enumerate_assignments_parallel(i, t)
                                        : enumerate_assignments_serial(i, t);
}

CompiledRule compile_rule(const SymbolTable& symbols, const Rule& rule) {
  CompiledRule c;
  c.rule = &rule;
  c.body = tau(symbols, rule.body);
  if (rule.kind == RuleKind::Tgd) {
    c.head = tau(symbols, rule.head);
    auto in_body = [&](const std::string& x) {
      return std::count(c.body.entity_vars.begin(), c.body.entity_vars.end(), x) +
                 std::count(c.body.value_vars.begin(), c.body.value_vars.end(), x) > 0;
    };
    for (const auto& x : c.head.entity_vars) {
      if (in_body(x)) c.frontier.push_back(x);
    }
    for (const auto& x : c.head.value_vars) {
      if (in_body(x)) c.frontier.push_back(x);
    }
  }
  return c;
}

std::optional<Assignment> check_tgd_extension(const Instance& i, const CompiledRule& tgd,
                                              const Assignment& mu) {
  MatchSeed seed;
  for (const auto& x : tgd.frontier) {
    auto it = mu.entity_vars.find(x);
    if (it != mu.entity_vars.end()) {
      seed.entity.emplace(x, it->second);
    } else {
      seed.value_floor.emplace(x, mu.value_of(tgd.body, x));
    }
  }
  std::optional<Assignment> found;
  for_each_assignment(i, tgd.head, seed, [&](const Assignment& ext) {
    found = ext;
    return false;
  });
  return found;
}

bool is_trigger(const Instance& i, const CompiledRule& rule, const Assignment& mu) {
  const Rule& r = *rule.rule;
  switch (r.kind) {
    case RuleKind::Tgd:
      return !check_tgd_extension(i, rule, mu);
    case RuleKind::EntityEgd:
      return mu.entity_vars.at(r.lhs) != mu.entity_vars.at(r.rhs);
    case RuleKind::ValueEgd: {
      for (std::size_t y : rule.body.set_vars_of.at(r.lhs)) {
        for (std::size_t z : rule.body.set_vars_of.at(r.rhs)) {
          if (mu.set_vars[y] != mu.set_vars[z]) return true;
        }
      }
      return false;
    }
  }
  return false;
}

RuleCheck satisfies_rule(const Instance& i, const CompiledRule& rule) {
  RuleCheck out;
  for_each_assignment(i, rule.body, {}, [&](const Assignment& mu) {
    if (is_trigger(i, rule, mu)) {
      out.satisfied = false;
      out.violation = mu;
      return false;
    }
    return true;
  });
  return out;
}

RuleCheck satisfies_rule(const Instance& i, const SymbolTable& symbols, const Rule& rule) {
  return satisfies_rule(i, compile_rule(symbols, rule));
}

DatabaseCheck satisfies_database(const Instance& i, const KnowledgeBase& kb) {
  std::vector<Fact> wanted;
  for (const auto& g : kb.database) {
    Fact f{g.pred, {}};
    for (Sym s : g.args) f.cells.push_back(Cell::singleton(s));
    wanted.push_back(std::move(f));
  }
  for (auto& f : materialize_builtin_facts(kb)) wanted.push_back(std::move(f));
  for (const auto& w : wanted) {
    auto [first, last] = i.facts_of(w.pred);
    bool hit = std::any_of(first, last, [&](const Fact& f) {
      return dominated_or_equal(w.cells, f.cells);
    });
    if (!hit) return {false, w};
  }
  return {};
}

bool is_solution(const Instance& i, const KnowledgeBase& kb) {
  if (!satisfies_database(i, kb).satisfied) return false;
  for (const auto& r : kb.tbox) {
    if (!satisfies_rule(i, kb.symbols, r).satisfied) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

Sym Homomorphism::operator()(Sym s) const {
  if (!is_null(s)) return s;
  auto it = nulls.find(s);
  return it == nulls.end() ? s : it->second;
}

Cell Homomorphism::apply(const Cell& c) const {
  std::vector<Sym> out;
  out.reserve(c.size());
  for (Sym s : c.members) out.push_back((*this)(s));
  return Cell{std::move(out)};
}

Fact Homomorphism::apply(const Fact& f) const {
  Fact out{f.pred, {}};
  for (const auto& c : f.cells) out.cells.push_back(apply(c));
  return out;
}

namespace {

using Domains = std::map<Sym, std::vector<Sym>>;

class HomSearch {
 public:
  HomSearch(const Instance& from, const Instance& to) : to_(to) {
    for (const auto& f : from.facts()) sources_.push_back(&f);
    auto null_count = [](const Fact* f) {
      std::size_t n = 0;
      for (const auto& c : f->cells) n += std::count_if(c.members.begin(), c.members.end(), is_null);
      return n;
    };
    std::stable_sort(sources_.begin(), sources_.end(),
                     [&](const Fact* a, const Fact* b) { return null_count(a) > null_count(b); });
  }

  std::optional<Domains> run() {
    Domains d;
    if (!step(0, d)) return std::nullopt;
    return result_;
  }

 private:
  bool fits(const Fact& src, const Fact& dst, Domains& d) const {
    for (std::size_t p = 0; p < src.cells.size(); ++p) {
      const Cell& target = dst.cells[p];
      for (Sym s : src.cells[p].members) {
        if (!is_null(s)) {
          if (!target.contains(s)) return false;
          continue;
        }
        auto it = d.find(s);
        if (it == d.end()) {
          std::vector<Sym> dom;
          for (Sym m : target.members) {
            if (is_entity_side(m) == is_entity_side(s)) dom.push_back(m);
          }
          if (dom.empty()) return false;
          d.emplace(s, std::move(dom));
        } else {
          std::vector<Sym> narrowed;
          std::set_intersection(it->second.begin(), it->second.end(), target.members.begin(),
                                target.members.end(), std::back_inserter(narrowed));
          if (narrowed.empty()) return false;
          it->second = std::move(narrowed);
        }
      }
    }
    return true;
  }

  bool step(std::size_t k, const Domains& d) {
    if (k == sources_.size()) {
      result_ = d;
      return true;
    }
    const Fact& src = *sources_[k];
    auto [first, last] = to_.facts_of(src.pred);
    std::vector<const Fact*> cands;
    for (auto it = first; it != last; ++it) cands.push_back(&*it);
    auto weight = [](const Fact* f) {
      std::size_t n = 0;
      for (const auto& c : f->cells) n += c.size();
      return n;
    };
    std::stable_sort(cands.begin(), cands.end(),
                     [&](const Fact* a, const Fact* b) { return weight(a) > weight(b); });
    for (const Fact* dst : cands) {
      Domains next = d;
      if (fits(src, *dst, next) && step(k + 1, next)) return true;
    }
    return false;
  }

  const Instance& to_;
  std::vector<const Fact*> sources_;
  Domains result_;
};

}  // namespace

std::optional<Homomorphism> find_homomorphism(const Instance& from, const Instance& to) {
  auto domains = HomSearch(from, to).run();
  if (!domains) return std::nullopt;
  Homomorphism h;
  for (const auto& [null, dom] : *domains) h.nulls.emplace(null, dom.front());
  return h;
}

bool verify_homomorphism(const Instance& from, const Instance& to, const Homomorphism& h) {
  UnderlyingDomain src = underlying_domain(from);
  UnderlyingDomain dst = underlying_domain(to);
  auto check_side = [&](const std::set<Sym>& xs, const std::set<Sym>& target) {
    for (Sym x : xs) {
      if (is_null(x) && !h.nulls.count(x)) return false;
      Sym y = h(x);
      if (!target.count(y)) return false;
    }
    return true;
  };
  if (!check_side(src.entities, dst.entities) || !check_side(src.values, dst.values)) return false;
  for (const auto& f : from.facts()) {
    Fact img = h.apply(f);
    auto [first, last] = to.facts_of(f.pred);
    if (!std::any_of(first, last, [&](const Fact& g) { return dominated_or_equal(img.cells, g.cells); })) {
      return false;
    }
  }
  return true;
}

Homomorphism compose(const Homomorphism& first, const Homomorphism& second) {
  Homomorphism out;
  for (const auto& [n, img] : first.nulls) out.nulls.emplace(n, second(img));
  return out;
}

}  // namespace mergechase
