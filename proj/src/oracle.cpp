#include "mergechase/oracle.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "mergechase/builtins.hpp"
#include "mergechase/parser.hpp"
#include "mergechase/query.hpp"

namespace mergechase {

namespace {

ArgType arg_type(const SymbolTable& symbols, const Atom& a, std::size_t p) {
  return symbols.predicate(a.pred).types[p];
}

}  // namespace

std::vector<NaiveAssignment> naive_assignments(const SymbolTable& symbols, const Instance& i,
                                               const Conjunction& conj, std::size_t bound) {
  std::vector<std::vector<const Fact*>> choices;
  double total = 1;
  for (const auto& atom : conj) {
    std::vector<const Fact*> fs;
    for (const auto& f : i.facts()) {
      if (f.pred == atom.pred) fs.push_back(&f);
    }
    total *= static_cast<double>(fs.size());
    choices.push_back(std::move(fs));
  }
  if (total > static_cast<double>(bound)) {
    throw OracleBoundError("naive enumeration needs " + std::to_string(static_cast<std::uint64_t>(total)) +
                           " image choices");
  }
  std::vector<NaiveAssignment> out;
  if (total == 0) return out;

  std::vector<std::size_t> idx(conj.size(), 0);
  while (true) {
    NaiveAssignment mu;
    std::map<std::string, Cell> inter;
    bool ok = true;
    for (std::size_t a = 0; a < conj.size() && ok; ++a) {
      const Fact& f = *choices[a][idx[a]];
      mu.image.push_back(f);
      for (std::size_t p = 0; p < conj[a].args.size() && ok; ++p) {
        const Term& t = conj[a].args[p];
        const Cell& c = f.cells[p];
        bool entity = arg_type(symbols, conj[a], p) == ArgType::Entity;
        if (t.is_var() && entity) {
          auto [it, fresh] = mu.entity.emplace(t.var, c);
          ok = fresh || it->second == c;
        } else if (t.is_var()) {
          mu.occurrences.push_back(c);
          auto [it, fresh] = inter.emplace(t.var, c);
          if (!fresh) it->second = cell_intersection(it->second, c);
        } else if (entity) {
          ok = c.contains(t.constant);
        } else {
          auto [it, fresh] = mu.values.emplace(t.constant, c);
          ok = c.contains(t.constant) && (fresh || it->second == c);
        }
      }
    }
    for (const auto& [_, c] : inter) ok = ok && !c.empty();
    if (ok) out.push_back(std::move(mu));

    std::size_t k = conj.size();
    while (k > 0) {
      --k;
      if (++idx[k] < choices[k].size()) break;
      idx[k] = 0;
      if (k == 0) return out;
    }
    if (conj.empty()) return out;
  }
}

namespace {

// Intersection of the occurrence images of value-variable x.
Cell naive_value(const SymbolTable& symbols, const Conjunction& conj, const NaiveAssignment& mu,
                 const std::string& x) {
  std::optional<Cell> out;
  std::size_t k = 0;
  for (const auto& atom : conj) {
    for (std::size_t p = 0; p < atom.args.size(); ++p) {
      if (!atom.args[p].is_var() || arg_type(symbols, atom, p) != ArgType::Value) continue;
      if (atom.args[p].var == x) out = out ? cell_intersection(*out, mu.occurrences[k]) : mu.occurrences[k];
      ++k;
    }
  }
  return out.value_or(Cell{});
}

std::vector<Cell> naive_occurrences_of(const SymbolTable& symbols, const Conjunction& conj,
                                       const NaiveAssignment& mu, const std::string& x) {
  std::vector<Cell> out;
  std::size_t k = 0;
  for (const auto& atom : conj) {
    for (std::size_t p = 0; p < atom.args.size(); ++p) {
      if (!atom.args[p].is_var() || arg_type(symbols, atom, p) != ArgType::Value) continue;
      if (atom.args[p].var == x) out.push_back(mu.occurrences[k]);
      ++k;
    }
  }
  return out;
}

bool occurs(const Conjunction& conj, const std::string& x) {
  for (const auto& atom : conj) {
    for (const auto& t : atom.args) {
      if (t.is_var() && t.var == x) return true;
    }
  }
  return false;
}

bool naive_satisfies(const SymbolTable& symbols, const Instance& i, const Rule& r) {
  auto body = naive_assignments(symbols, i, r.body);
  switch (r.kind) {
    case RuleKind::EntityEgd:
      return std::all_of(body.begin(), body.end(),
                         [&](const auto& mu) { return mu.entity.at(r.lhs) == mu.entity.at(r.rhs); });
    case RuleKind::ValueEgd:
      return std::all_of(body.begin(), body.end(), [&](const auto& mu) {
        auto cells = naive_occurrences_of(symbols, r.body, mu, r.lhs);
        for (auto& c : naive_occurrences_of(symbols, r.body, mu, r.rhs)) cells.push_back(std::move(c));
        return std::all_of(cells.begin(), cells.end(), [&](const Cell& c) { return c == cells.front(); });
      });
    case RuleKind::Tgd: {
      auto head = naive_assignments(symbols, i, r.head);
      std::vector<std::string> frontier;
      for (const auto& atom : r.head) {
        for (const auto& t : atom.args) {
          if (t.is_var() && occurs(r.body, t.var) &&
              std::find(frontier.begin(), frontier.end(), t.var) == frontier.end()) {
            frontier.push_back(t.var);
          }
        }
      }
      for (const auto& mu : body) {
        bool extended = std::any_of(head.begin(), head.end(), [&](const NaiveAssignment& nu) {
          for (const auto& x : frontier) {
            auto e = mu.entity.find(x);
            if (e != mu.entity.end()) {
              if (nu.entity.at(x) != e->second) return false;
            } else if (!naive_value(symbols, r.body, mu, x).subset_of(naive_value(symbols, r.head, nu, x))) {
              return false;
            }
          }
          return true;
        });
        if (!extended) return false;
      }
      return true;
    }
  }
  return false;
}

}  // namespace

bool naive_is_solution(const KnowledgeBase& kb, const Instance& i) {
  std::vector<Fact> wanted;
  for (const auto& g : kb.database) {
    Fact f{g.pred, {}};
    for (Sym s : g.args) f.cells.push_back(Cell::singleton(s));
    wanted.push_back(std::move(f));
  }
  for (auto& f : materialize_builtin_facts(kb)) wanted.push_back(std::move(f));
  for (const auto& w : wanted) {
    bool found = false;
    for (const auto& f : i.facts()) {
      if (f.pred != w.pred) continue;
      bool covers = true;
      for (std::size_t k = 0; k < w.cells.size(); ++k) covers = covers && w.cells[k].subset_of(f.cells[k]);
      if (covers) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  for (const auto& r : kb.tbox) {
    if (!naive_satisfies(kb.symbols, i, r)) return false;
  }
  return true;
}

std::set<std::vector<Cell>> naive_answers(const SymbolTable& symbols, const ConjunctiveQuery& q,
                                          const Instance& i) {
  std::set<std::vector<Cell>> out;
  for (const auto& mu : naive_assignments(symbols, i, q.body)) {
    std::vector<Cell> t;
    for (const auto& x : q.free_vars) {
      auto e = mu.entity.find(x);
      t.push_back(e != mu.entity.end() ? e->second : naive_value(symbols, q.body, mu, x));
    }
    out.insert(std::move(t));
  }
  return out;
}

std::vector<Instance> solution_corpus(const KnowledgeBase& kb, std::size_t n_orders,
                                      const std::vector<Instance>& extras, std::size_t max_steps) {
  std::vector<Instance> out;
  for (std::size_t s = 0; s < n_orders; ++s) {
    auto seq = run_chase(kb, Strategy::fair(s), max_steps);
    if (seq.status != ChaseStatus::Terminated) {
      throw CorpusError("fair order " + std::to_string(s) + ": chase did not terminate");
    }
    if (!naive_is_solution(kb, seq.final)) {
      throw CorpusError("fair order " + std::to_string(s) + ": chase result is not a solution");
    }
    out.push_back(std::move(seq.final));
  }
  for (std::size_t k = 0; k < extras.size(); ++k) {
    if (!naive_is_solution(kb, extras[k])) {
      throw CorpusError("extra solution " + std::to_string(k + 1) + " is not a solution");
    }
    out.push_back(extras[k]);
  }
  return out;
}

namespace {

bool holds_everywhere(const std::vector<Cell>& t, const std::vector<std::set<std::vector<Cell>>>& per_solution) {
  return std::all_of(per_solution.begin(), per_solution.end(), [&](const auto& answers) {
    return std::any_of(answers.begin(), answers.end(), [&](const auto& u) {
      for (std::size_t k = 0; k < t.size(); ++k) {
        if (!t[k].subset_of(u[k])) return false;
      }
      return true;
    });
  });
}

std::string tuple_text(const SymbolTable& symbols, const std::vector<Cell>& t) {
  std::string out = "<";
  for (std::size_t k = 0; k < t.size(); ++k) out += (k ? ", " : "") + render_cell(symbols, t[k]);
  return out + ">";
}

}  // namespace

CertainReport check_certain_against_corpus(const KnowledgeBase& kb, const ConjunctiveQuery& q,
                                           const std::set<std::vector<Cell>>& answers,
                                           const std::vector<Instance>& corpus) {
  const auto& symbols = kb.symbols;
  CertainReport report;
  std::vector<std::set<std::vector<Cell>>> per_solution;
  for (const auto& i : corpus) per_solution.push_back(naive_answers(symbols, q, i));
  std::set<Sym> entities;
  std::set<Sym> values;
  for (const auto& i : corpus) {
    auto u = underlying_domain(i);
    for (Sym s : u.entities) {
      if (!is_null(s)) entities.insert(s);
    }
    for (Sym s : u.values) {
      if (!is_null(s)) values.insert(s);
    }
  }
  auto fail = [&](std::string why, const std::vector<Cell>& t) {
    report.ok = false;
    report.problems.push_back(std::move(why));
    if (!report.counterexample) report.counterexample = t;
  };
  for (const auto& t : answers) {
    if (!holds_everywhere(t, per_solution)) {
      fail(tuple_text(symbols, t) + " is not dominated by an answer in every solution", t);
      continue;
    }
    for (std::size_t k = 0; k < t.size(); ++k) {
      const auto& pool = t[k].is_entity() ? entities : values;
      for (Sym s : pool) {
        if (t[k].contains(s)) continue;
        auto bigger = t;
        bigger[k] = cell_union(t[k], Cell::singleton(s));
        if (holds_everywhere(bigger, per_solution)) {
          fail(tuple_text(symbols, t) + " is not maximal: " + tuple_text(symbols, bigger) +
                   " also holds in every solution",
               t);
          break;
        }
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------

namespace {

class Gen {
 public:
  explicit Gen(const KbGeneratorConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

  GeneratedKb run() {
    GeneratedKb g;
    auto& sy = g.kb.symbols;
    std::size_t n_preds = pick(1, cfg_.max_predicates);
    for (std::size_t p = 0; p < n_preds; ++p) {
      PredicateSignature sig{"P" + std::to_string(p), {}, PredKind::KB};
      std::size_t arity = pick(1, cfg_.max_arity);
      for (std::size_t k = 0; k < arity; ++k) sig.types.push_back(coin(0.5) ? ArgType::Entity : ArgType::Value);
      kb_preds_.push_back(sy.add_predicate(std::move(sig)));
    }
    if (cfg_.builtin_prob > 0) {
      builtin_ = sy.add_predicate({"jacc_sim", {ArgType::Value, ArgType::Value, ArgType::Value}, PredKind::BuiltIn});
    }
    static const char* kWords[] = {"ab", "abc", "bc", "abd", "cd", "bcd", "a", "dc"};
    for (std::size_t k = 0; k < std::max<std::size_t>(1, cfg_.max_entities); ++k) {
      entities_.push_back(sy.intern_entity("E" + std::to_string(k)));
    }
    for (std::size_t k = 0; k < std::clamp<std::size_t>(cfg_.max_values, 1, 8); ++k) {
      values_.push_back(sy.intern_string(kWords[k]));
    }

    double wsum = cfg_.tgd_weight + cfg_.eegd_weight + cfg_.vegd_weight;
    std::size_t n_rules = wsum > 0 ? pick(0, cfg_.max_rules) : 0;
    for (std::size_t r = 0; r < n_rules; ++r) {
      double roll = std::uniform_real_distribution<double>(0, wsum)(rng_);
      RuleKind kind = roll < cfg_.tgd_weight                      ? RuleKind::Tgd
                      : roll < cfg_.tgd_weight + cfg_.eegd_weight ? RuleKind::EntityEgd
                                                                  : RuleKind::ValueEgd;
      for (int attempt = 0; attempt < 20; ++attempt) {
        auto rule = make_rule(sy, kind, "r" + std::to_string(r + 1));
        if (!rule) continue;
        try {
          check_rule(sy, *rule);
        } catch (const SchemaError&) {
          continue;
        }
        g.kb.tbox.push_back(std::move(*rule));
        break;
      }
    }

    std::size_t n_facts = pick(1, std::max<std::size_t>(1, cfg_.max_facts));
    for (std::size_t k = 0; k < n_facts; ++k) {
      PredId p = kb_preds_[pick(0, kb_preds_.size() - 1)];
      GroundAtom a{p, {}};
      for (ArgType t : sy.predicate(p).types) {
        a.args.push_back(t == ArgType::Entity ? entities_[pick(0, entities_.size() - 1)]
                                              : values_[pick(0, values_.size() - 1)]);
      }
      if (std::find(g.kb.database.begin(), g.kb.database.end(), a) == g.kb.database.end()) {
        g.kb.database.push_back(std::move(a));
      }
    }

    std::size_t n_queries = pick(0, cfg_.max_queries);
    for (std::size_t k = 0; k < n_queries; ++k) {
      for (int attempt = 0; attempt < 20; ++attempt) {
        auto q = make_query(sy, "q" + std::to_string(k + 1));
        try {
          check_query(sy, q);
        } catch (const SchemaError&) {
          continue;
        }
        g.queries.push_back(std::move(q));
        break;
      }
    }
    return g;
  }

 private:
  std::size_t pick(std::size_t lo, std::size_t hi) {
    if (hi <= lo) return lo;
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  bool coin(double p) { return std::uniform_real_distribution<double>(0, 1)(rng_) < p; }

  struct Vars {
    std::vector<std::string> entity;
    std::vector<std::string> value;
    std::size_t next = 0;
  };

  Conjunction body(const SymbolTable& sy, Vars& vars, std::size_t n_atoms) {
    Conjunction out;
    for (std::size_t a = 0; a < n_atoms; ++a) {
      PredId p = kb_preds_[pick(0, kb_preds_.size() - 1)];
      Atom atom{p, {}};
      for (ArgType t : sy.predicate(p).types) {
        auto& pool = t == ArgType::Entity ? vars.entity : vars.value;
        if (coin(cfg_.constant_prob)) {
          atom.args.push_back(Term::constant_of(t == ArgType::Entity ? entities_[pick(0, entities_.size() - 1)]
                                                                      : values_[pick(0, values_.size() - 1)]));
        } else if (!pool.empty() && coin(0.6)) {
          atom.args.push_back(Term::variable(pool[pick(0, pool.size() - 1)]));
        } else {
          std::string name = (t == ArgType::Entity ? "x" : "y") + std::to_string(vars.next++);
          pool.push_back(name);
          atom.args.push_back(Term::variable(name));
        }
      }
      out.push_back(std::move(atom));
    }
    return out;
  }

  void maybe_builtin(Conjunction& conj, const std::vector<std::string>& allowed) {
    if (!builtin_ || allowed.empty() || !coin(cfg_.builtin_prob)) return;
    static const char* kThresholds[] = {"0.2", "0.4", "0.5"};
    Atom b{*builtin_, {}};
    b.args.push_back(Term::variable(allowed[pick(0, allowed.size() - 1)]));
    b.args.push_back(Term::variable(allowed[pick(0, allowed.size() - 1)]));
    b.args.push_back(Term::constant_of(thresholds_.at(kThresholds[pick(0, 2)])));
    conj.push_back(std::move(b));
  }

  std::optional<Rule> make_rule(SymbolTable& sy, RuleKind kind, std::string id) {
    if (thresholds_.empty()) {
      for (const char* t : {"0.2", "0.4", "0.5"}) thresholds_.emplace(t, sy.intern_number(t));
    }
    Rule r;
    r.id = std::move(id);
    r.kind = kind;
    Vars vars;
    r.body = body(sy, vars, pick(1, std::max<std::size_t>(1, cfg_.max_body_atoms)));
    std::vector<std::string> builtin_ok = vars.value;
    if (kind == RuleKind::EntityEgd) {
      if (vars.entity.size() < 2) return std::nullopt;
      std::size_t a = pick(0, vars.entity.size() - 1);
      std::size_t b = pick(0, vars.entity.size() - 2);
      if (b >= a) ++b;
      r.lhs = vars.entity[a];
      r.rhs = vars.entity[b];
    } else if (kind == RuleKind::ValueEgd) {
      if (vars.value.size() < 2) return std::nullopt;
      std::size_t a = pick(0, vars.value.size() - 1);
      std::size_t b = pick(0, vars.value.size() - 2);
      if (b >= a) ++b;
      r.lhs = vars.value[a];
      r.rhs = vars.value[b];
      std::erase(builtin_ok, r.lhs);
      std::erase(builtin_ok, r.rhs);
    }
    maybe_builtin(r.body, builtin_ok);
    if (kind == RuleKind::Tgd) {
      std::size_t n_head = pick(1, std::max<std::size_t>(1, cfg_.max_head_atoms));
      std::vector<std::string> ex_entity;
      std::vector<std::string> ex_value;
      std::size_t next_ex = 0;
      for (std::size_t a = 0; a < n_head; ++a) {
        PredId p = kb_preds_[pick(0, kb_preds_.size() - 1)];
        Atom atom{p, {}};
        for (ArgType t : sy.predicate(p).types) {
          const auto& frontier = t == ArgType::Entity ? vars.entity : vars.value;
          auto& ex = t == ArgType::Entity ? ex_entity : ex_value;
          if (frontier.empty() || coin(cfg_.existential_prob)) {
            if (!ex.empty() && coin(0.3)) {
              atom.args.push_back(Term::variable(ex[pick(0, ex.size() - 1)]));
            } else {
              std::string name = "z" + std::to_string(next_ex++);
              ex.push_back(name);
              r.existentials.push_back(name);
              atom.args.push_back(Term::variable(name));
            }
          } else {
            atom.args.push_back(Term::variable(frontier[pick(0, frontier.size() - 1)]));
          }
        }
        r.head.push_back(std::move(atom));
      }
    }
    return r;
  }

  ConjunctiveQuery make_query(const SymbolTable& sy, std::string name) {
    ConjunctiveQuery q;
    q.name = std::move(name);
    Vars vars;
    q.body = body(sy, vars, pick(1, 2));
    std::vector<std::string> all = vars.entity;
    all.insert(all.end(), vars.value.begin(), vars.value.end());
    std::sort(all.begin(), all.end());
    for (const auto& x : all) {
      (coin(0.5) ? q.free_vars : q.existentials).push_back(x);
    }
    if (q.free_vars.empty() && !all.empty()) {
      q.free_vars.push_back(q.existentials.back());
      q.existentials.pop_back();
    }
    return q;
  }

  const KbGeneratorConfig& cfg_;
  std::mt19937_64 rng_;
  std::vector<PredId> kb_preds_;
  std::optional<PredId> builtin_;
  std::vector<Sym> entities_;
  std::vector<Sym> values_;
  std::map<std::string, Sym> thresholds_;
};

NaiveAssignment as_naive(const Assignment& mu) {
  return {mu.entity_vars, mu.values, mu.set_vars, mu.image};
}

}  // namespace

GeneratedKb generate_kb(const KbGeneratorConfig& cfg) { return Gen(cfg).run(); }

constexpr std::size_t kFuzzMaxSteps = 100;

std::optional<std::string> default_fuzz_check(const GeneratedKb& g) {
  const auto& kb = g.kb;
  std::string text = serialize(kb, g.queries);
  Program back = parse_program(text);
  if (!(back.kb == kb) || serialize(back.kb, back.queries) != text) return "serialize/parse round trip differs";

  auto seq = run_chase(kb, Strategy::fair(), kFuzzMaxSteps);
  for (const Instance* i : {&seq.initial, &seq.final}) {
    if (i->size() > 40) continue;
    for (const auto& r : kb.tbox) {
      auto naive = naive_assignments(kb.symbols, *i, r.body);
      std::sort(naive.begin(), naive.end());
      auto t = tau(kb.symbols, r.body);
      for (auto policy : {ExecPolicy::Serial, ExecPolicy::Parallel}) {
        std::vector<NaiveAssignment> engine;
        for (const auto& mu : enumerate_assignments(*i, t, policy)) engine.push_back(as_naive(mu));
        std::sort(engine.begin(), engine.end());
        if (engine != naive) return "matching differs from brute force on the body of " + r.id;
      }
    }
  }
  if (seq.status != ChaseStatus::Terminated) return std::nullopt;
  if (seq.final.size() > 40) return std::nullopt;
  if (!naive_is_solution(kb, seq.final)) return "chase result is not a solution";

  std::vector<Instance> corpus;
  try {
    corpus = solution_corpus(kb, 3, {}, kFuzzMaxSteps);
  } catch (const CorpusError& e) {
    // Other orders may exceed the budget; a non-solution is a real failure.
    if (std::string(e.what()).find("not a solution") != std::string::npos) return e.what();
    return std::nullopt;
  }
  for (const auto& q : g.queries) {
    auto cert = certain_answers(q, kb.symbols, seq);
    auto report = check_certain_against_corpus(kb, q, cert.tuples, corpus);
    if (!report.ok) return "certain answers to " + q.name + ": " + report.problems.front();
  }
  return std::nullopt;
}

namespace {

std::optional<std::string> guarded(const FuzzCheck& check, const GeneratedKb& g) {
  try {
    return check(g);
  } catch (const std::exception& e) {
    return std::string("exception: ") + e.what();
  }
}

}  // namespace

GeneratedKb shrink_case(const GeneratedKb& g, const FuzzCheck& check) {
  GeneratedKb cur = g;
  auto drop_one = [&](auto pick_vec) {
    for (std::size_t k = 0; k < pick_vec(cur).size(); ++k) {
      GeneratedKb candidate = cur;
      auto& v = pick_vec(candidate);
      v.erase(v.begin() + static_cast<std::ptrdiff_t>(k));
      if (guarded(check, candidate)) {
        cur = std::move(candidate);
        return true;
      }
    }
    return false;
  };
  while (drop_one([](GeneratedKb& c) -> auto& { return c.kb.tbox; }) ||
         drop_one([](GeneratedKb& c) -> auto& { return c.kb.database; }) ||
         drop_one([](GeneratedKb& c) -> auto& { return c.queries; })) {
  }
  return cur;
}

FuzzReport fuzz(std::uint64_t first_seed, std::size_t cases, const std::string& repro_dir,
                const KbGeneratorConfig& base, const FuzzCheck& check) {
  FuzzReport report;
  for (std::size_t k = 0; k < cases; ++k) {
    KbGeneratorConfig cfg = base;
    cfg.seed = first_seed + k;
    GeneratedKb g = generate_kb(cfg);
    ++report.cases_run;
    auto failure = guarded(check, g);
    if (!failure) continue;
    GeneratedKb small = shrink_case(g, check);
    auto small_failure = guarded(check, small);
    report.failing_seed = cfg.seed;
    report.message = small_failure.value_or(*failure);
    std::filesystem::create_directories(repro_dir);
    report.repro_path = (std::filesystem::path(repro_dir) / ("fuzz-repro-" + std::to_string(cfg.seed) + ".kb")).string();
    std::ofstream out(report.repro_path);
    out << "# seed " << cfg.seed << ": " << report.message << '\n' << serialize(small.kb, small.queries);
    break;
  }
  return report;
}

}  // namespace mergechase
