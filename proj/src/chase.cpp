#include "mergechase/chase.hpp"

#include <algorithm>
#include <map>
#include <omp.h>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mergechase/parser.hpp"

namespace mergechase {

const char* status_name(ChaseStatus s) {
  return s == ChaseStatus::Terminated ? "Terminated" : "BudgetExhausted";
}

NullCounter NullCounter::after(const Instance& i) {
  auto [e, v] = max_null_indices(i);
  return {e + 1, v + 1};
}

Sym NullCounter::fresh(ArgType type) {
  return type == ArgType::Entity ? make_sym(SymKind::EntityNull, entity++)
                                 : make_sym(SymKind::ValueNull, value++);
}

Instance ChaseSequence::instance_at(std::size_t k) const {
  if (k > records.size()) throw std::out_of_range("instance index " + std::to_string(k) + " beyond " +
                                                  std::to_string(records.size()) + " steps");
  Instance i = initial;
  for (std::size_t s = 0; s < k; ++s) replay(i, records[s]);
  return i;
}

std::vector<Instance> ChaseSequence::instances() const {
  std::vector<Instance> out{initial};
  for (const auto& rec : records) {
    Instance next = out.back();
    replay(next, rec);
    out.push_back(std::move(next));
  }
  return out;
}

namespace {

// A tgd's verdict depends only on the frontier images.
std::vector<Cell> frontier_key(const CompiledRule& rule, const Assignment& mu) {
  std::vector<Cell> key;
  for (const auto& x : rule.frontier) {
    auto it = mu.entity_vars.find(x);
    key.push_back(it != mu.entity_vars.end() ? it->second : mu.value_of(rule.body, x));
  }
  return key;
}

}  // namespace

std::vector<Assignment> applicable_triggers(const Instance& i, const CompiledRule& rule,
                                            ExecPolicy policy) {
  auto all = enumerate_assignments(i, rule.body, policy);
  std::vector<const Assignment*> probes;
  std::vector<std::size_t> slot(all.size());
  if (rule.rule->kind == RuleKind::Tgd) {
    std::map<std::vector<Cell>, std::size_t> seen;
    for (std::size_t k = 0; k < all.size(); ++k) {
      auto [it, fresh] = seen.try_emplace(frontier_key(rule, all[k]), probes.size());
      if (fresh) probes.push_back(&all[k]);
      slot[k] = it->second;
    }
  } else {
    for (std::size_t k = 0; k < all.size(); ++k) {
      slot[k] = k;
      probes.push_back(&all[k]);
    }
  }
  std::vector<char> verdict(probes.size(), 0);
  const auto n = static_cast<std::int64_t>(probes.size());
  if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t k = 0; k < n; ++k) verdict[k] = is_trigger(i, rule, *probes[k]);
  } else {
    for (std::int64_t k = 0; k < n; ++k) verdict[k] = is_trigger(i, rule, *probes[k]);
  }
  std::vector<Assignment> out;
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (verdict[slot[k]]) out.push_back(std::move(all[k]));
  }
  return out;
}

bool still_applicable(const Instance& i, const CompiledRule& rule, const Assignment& mu) {
  for (const auto& f : mu.image) {
    if (!i.contains(f)) return false;
  }
  return is_trigger(i, rule, mu);
}

ChaseStepRecord apply_step(Instance& i, const CompiledRule& rule, const Assignment& mu,
                           NullCounter& nulls) {
  const Rule& r = *rule.rule;
  if (!still_applicable(i, rule, mu)) {
    throw StaleTriggerError("rule " + r.id + ": assignment is not a trigger in the current instance");
  }
  ChaseStepRecord rec;
  rec.rule_id = r.id;
  rec.kind = r.kind;
  rec.assignment = mu;
  for (const auto& x : rule.body.entity_vars) {
    auto it = mu.entity_vars.find(x);
    if (it != mu.entity_vars.end()) rec.bindings.emplace_back(x, it->second);
  }
  for (std::size_t k = 0; k < rule.body.set_vars.size(); ++k) {
    rec.bindings.emplace_back(rule.body.set_var_name(k), mu.set_vars[k]);
  }

  switch (r.kind) {
    case RuleKind::Tgd: {
      std::map<std::string, Cell> fresh;
      for (const auto& y : r.existentials) {
        bool entity = std::count(rule.head.entity_vars.begin(), rule.head.entity_vars.end(), y) > 0;
        Sym s = nulls.fresh(entity ? ArgType::Entity : ArgType::Value);
        rec.fresh_nulls.push_back(s);
        fresh.emplace(y, Cell::singleton(s));
      }
      for (const auto& atom : rule.head.atoms) {
        Fact f{atom.pred, {}};
        for (const auto& t : atom.args) {
          if (auto it = fresh.find(t.var); it != fresh.end()) {
            f.cells.push_back(it->second);
          } else if (auto e = mu.entity_vars.find(t.var); e != mu.entity_vars.end()) {
            f.cells.push_back(e->second);
          } else {
            f.cells.push_back(mu.value_of(rule.body, t.var));
          }
        }
        if (i.insert(f)) rec.added.push_back(std::move(f));
      }
      break;
    }
    case RuleKind::EntityEgd: {
      auto delta = i.merge_entity_classes(mu.entity_vars.at(r.lhs), mu.entity_vars.at(r.rhs));
      rec.added = std::move(delta.added);
      rec.removed = std::move(delta.removed);
      break;
    }
    case RuleKind::ValueEgd: {
      std::vector<std::size_t> ks = rule.body.set_vars_of.at(r.lhs);
      for (std::size_t k : rule.body.set_vars_of.at(r.rhs)) ks.push_back(k);
      Cell u;
      std::vector<CellEdit> edits;
      for (std::size_t k : ks) {
        u = cell_union(u, mu.set_vars[k]);
        const auto& occ = rule.body.set_vars[k];
        edits.push_back({mu.image[occ.atom], {occ.pos}});
      }
      auto delta = i.replace_value_cells_local(edits, u);
      rec.added = std::move(delta.added);
      rec.removed = std::move(delta.removed);
      break;
    }
  }
  std::sort(rec.added.begin(), rec.added.end());
  std::sort(rec.removed.begin(), rec.removed.end());
  return rec;
}

void replay(Instance& i, const ChaseStepRecord& rec) {
  for (const auto& f : rec.removed) {
    if (!i.erase(f)) throw InvariantError("replay: removed fact is missing");
  }
  for (const auto& f : rec.added) {
    if (!i.insert(f)) throw InvariantError("replay: added fact already present");
  }
}

std::vector<ScriptStep> parse_script(std::string_view text) {
  std::vector<ScriptStep> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    std::istringstream words(line);
    std::string w;
    if (!(words >> w) || w.front() == '#') continue;
    auto fail = [&](const std::string& why) {
      return ScriptError("script line " + std::to_string(no) + ": " + why);
    };
    if (w != "step") throw fail("expected 'step'");
    ScriptStep s;
    s.line = no;
    if (!(words >> s.rule_id)) throw fail("missing rule id");
    if (!(words >> w) || w != "image") throw fail("expected 'image'");
    std::string rest;
    std::getline(words, rest);
    // Split on commas outside parentheses and quotes.
    std::string cur;
    int depth = 0;
    bool quoted = false;
    auto flush = [&] {
      auto b = cur.find_first_not_of(" \t\r");
      auto e = cur.find_last_not_of(" \t\r");
      if (b == std::string::npos) throw fail("empty image label");
      s.selectors.push_back(cur.substr(b, e - b + 1));
      cur.clear();
    };
    for (std::size_t k = 0; k < rest.size(); ++k) {
      char c = rest[k];
      if (quoted) {
        if (c == '\\' && k + 1 < rest.size()) {
          cur += c;
          c = rest[++k];
        } else if (c == '"') {
          quoted = false;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == '(' || c == '[' || c == '{') {
        ++depth;
      } else if (c == ')' || c == ']' || c == '}') {
        --depth;
      } else if (c == ',' && depth == 0) {
        flush();
        continue;
      }
      cur += c;
    }
    flush();
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t k = v.size(); k > 1; --k) std::swap(v[k - 1], v[rng() % k]);
}

std::vector<Fact> kb_only(const SymbolTable& symbols, const std::vector<Fact>& image) {
  std::vector<Fact> out;
  for (const auto& f : image) {
    if (symbols.predicate(f.pred).kind == PredKind::KB) out.push_back(f);
  }
  return out;
}

std::vector<Fact> resolve(const KnowledgeBase& kb, const Instance& i, const ScriptStep& step,
                          std::size_t number) {
  auto fail = [&](const std::string& why) {
    return ScriptError("script step " + std::to_string(number) + " (line " + std::to_string(step.line) +
                       "): " + why);
  };
  std::vector<Fact> listing;
  std::vector<Fact> out;
  SymbolTable scratch = kb.symbols;
  for (const auto& sel : step.selectors) {
    if (sel.front() == '#') {
      if (listing.empty()) listing = listing_order(kb.symbols, i);
      std::size_t k = 0;
      try {
        k = std::stoul(sel.substr(1));
      } catch (const std::exception&) {
        throw fail("bad label '" + sel + "'");
      }
      if (k == 0 || k > listing.size()) throw fail("label " + sel + " out of range");
      out.push_back(listing[k - 1]);
    } else {
      Fact f;
      try {
        f = parse_fact_text(sel, scratch);
      } catch (const Error& e) {
        throw fail("bad fact '" + sel + "': " + e.what());
      }
      if (!i.contains(f)) throw fail("fact " + sel + " is not in the current instance");
      out.push_back(std::move(f));
    }
  }
  return out;
}

class Runner {
 public:
  Runner(const KnowledgeBase& kb, std::size_t max_steps, ExecPolicy policy)
      : kb_(kb), max_steps_(max_steps), policy_(policy) {
    for (const auto& r : kb.tbox) rules_.push_back(compile_rule(kb.symbols, r));
    seq_.initial = base_instance(kb);
    cur_ = seq_.initial;
    nulls_ = NullCounter::after(cur_);
  }

  ChaseSequence run(const Strategy& strategy) {
    std::size_t number = 0;
    for (const auto& step : strategy.script) {
      ++number;
      if (budget_spent()) return finish(ChaseStatus::BudgetExhausted);
      scripted(step, number);
    }
    return fair(strategy.seed);
  }

 private:
  bool budget_spent() const { return seq_.records.size() >= max_steps_; }

  void apply(const CompiledRule& rule, const Assignment& mu) {
    auto rec = apply_step(cur_, rule, mu, nulls_);
    rec.index = seq_.records.size() + 1;
    seq_.records.push_back(std::move(rec));
  }

  void scripted(const ScriptStep& step, std::size_t number) {
    const CompiledRule* rule = nullptr;
    for (const auto& c : rules_) {
      if (c.rule->id == step.rule_id) rule = &c;
    }
    if (!rule) {
      throw ScriptError("script step " + std::to_string(number) + ": unknown rule '" + step.rule_id + "'");
    }
    auto wanted = resolve(kb_, cur_, step, number);
    auto triggers = applicable_triggers(cur_, *rule, policy_);
    auto sorted = [](std::vector<Fact> v) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      return v;
    };
    const Assignment* pick = nullptr;
    for (int pass = 0; pass < 2 && !pick; ++pass) {
      auto want = pass == 0 ? wanted : sorted(wanted);
      for (const auto& mu : triggers) {
        auto full = pass == 0 ? mu.image : sorted(mu.image);
        auto kb = pass == 0 ? kb_only(kb_.symbols, mu.image) : sorted(kb_only(kb_.symbols, mu.image));
        if (full == want || kb == want) {
          pick = &mu;
          break;
        }
      }
    }
    if (!pick) {
      std::string listed;
      for (const auto& f : wanted) listed += (listed.empty() ? "" : ", ") + render_fact(kb_.symbols, f);
      throw ScriptError("script step " + std::to_string(number) + " (line " + std::to_string(step.line) +
                        "): no trigger of " + step.rule_id + " has image {" + listed + "}");
    }
    apply(*rule, *pick);
  }

  ChaseSequence fair(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(rules_.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    if (seed != 0) shuffle(order, rng);
    while (true) {
      std::vector<std::pair<std::size_t, Assignment>> round;
      for (std::size_t r : order) {
        auto ts = applicable_triggers(cur_, rules_[r], policy_);
        std::vector<std::size_t> idx(ts.size());
        for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
        if (seed != 0) shuffle(idx, rng);
        for (std::size_t k : idx) round.emplace_back(r, std::move(ts[k]));
      }
      if (round.empty()) return finish(ChaseStatus::Terminated);
      for (const auto& [r, mu] : round) {
        if (!still_applicable(cur_, rules_[r], mu)) continue;
        if (budget_spent()) return finish(ChaseStatus::BudgetExhausted);
        apply(rules_[r], mu);
      }
    }
  }

  ChaseSequence finish(ChaseStatus status) {
    seq_.status = status;
    seq_.final = cur_;
    return std::move(seq_);
  }

  const KnowledgeBase& kb_;
  std::size_t max_steps_;
  ExecPolicy policy_;
  std::vector<CompiledRule> rules_;
  ChaseSequence seq_;
  Instance cur_;
  NullCounter nulls_;
};

}  // namespace

ChaseSequence run_chase(const KnowledgeBase& kb, const Strategy& strategy, std::size_t max_steps,
                        ExecPolicy policy) {
  return Runner(kb, max_steps, policy).run(strategy);
}

std::vector<Fact> persistent_facts(const ChaseSequence& seq, std::size_t from_index) {
  if (from_index > seq.steps()) {
    throw std::out_of_range("index " + std::to_string(from_index) + " outside 0.." +
                            std::to_string(seq.steps()));
  }
  Instance i = seq.instance_at(from_index);
  std::set<Fact> alive(i.facts().begin(), i.facts().end());
  for (std::size_t k = from_index; k < seq.records.size(); ++k) {
    for (const auto& f : seq.records[k].removed) alive.erase(f);
  }
  return {alive.begin(), alive.end()};
}

}  // namespace mergechase
