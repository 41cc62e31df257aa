// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>

#include "expected_runs.hpp"
#include "support.hpp"

using namespace mctest;

namespace {

using Clock = std::chrono::steady_clock;

// Step budget for generated KBs; runs past it count as non-terminating.
constexpr std::size_t kGeneratedBudget = 100;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

// Answer sets collected by criteria 2 and 7, grouped per knowledge base.
std::vector<std::vector<std::set<std::vector<Cell>>>> g_answer_groups;

std::set<std::string> render_tuples(const SymbolTable& sy, const std::set<std::vector<Cell>>& tuples) {
  std::set<std::string> out;
  for (const auto& t : tuples) {
    std::string s;
    for (const auto& c : t) s += (s.empty() ? "" : " ") + render_cell(sy, c);
    out.insert(s);
  }
  return out;
}

Outcome golden_trace() {
  Outcome o;
  auto t0 = Clock::now();
  Program p = load("running_example.kb");
  auto seq = run_chase(p.kb, Strategy::scripted(script("reference.script")));
  double secs = seconds_since(t0);
  auto expected = reference_instances();
  auto rules = reference_rules();
  for (std::size_t k = 0; k <= 7 && k <= seq.steps(); ++k) {
    if (kb_facts(p.kb.symbols, renumber_nulls(seq.instance_at(k))) != expected[k]) {
      o.fail("I" + std::to_string(k) + " differs");
    }
    if (k > 0 && seq.records[k - 1].rule_id != rules[k - 1]) o.fail("step " + std::to_string(k) + " rule differs");
  }
  if (seq.steps() < 7) o.fail("only " + std::to_string(seq.steps()) + " steps");
  if (seq.status != ChaseStatus::Terminated || seq.steps() != 7) {
    std::string extra;
    for (std::size_t k = 7; k < seq.steps(); ++k) extra += " " + seq.records[k].rule_id;
    o.fail(std::string(status_name(seq.status)) + " after " + std::to_string(seq.steps()) +
           " steps, not at I7 (extra steps:" + extra + ")");
  }
  if (secs >= 1.0) o.fail("took " + std::to_string(secs) + " s");
  if (o.pass) o.detail = "steps 1-7 match, terminated at I7";
  return o;
}

Outcome certain_answers_running_example() {
  Outcome o;
  Program p = load("running_example.kb");
  auto& sy = p.kb.symbols;
  auto cert = certain_answers(p.kb, *p.find_query("q1"));
  if (render_tuples(sy, cert.tuples) != std::set<std::string>{"[Doe1, Doe2]"}) o.fail("cert(q1) differs");
  g_answer_groups.push_back({cert.tuples});

  Instance printed = load_instance(test_path("golden/I_prime.json"), p.kb);
  auto phone = reduce(drop_nulls(evaluate(*p.find_query("q"), sy, printed)));
  if (render_tuples(sy, phone.tuples) != std::set<std::string>{R"({"358"})"}) o.fail("q on I' differs");
  g_answer_groups.back().push_back(phone.tuples);
  if (o.pass) o.detail = "cert(q1) = {<[Doe1, Doe2]>}, q on I' = {<{358}>}";
  return o;
}

Outcome reduction_counterexample() {
  Outcome o;
  Program p = load("kb_prime.kb");
  auto& sy = p.kb.symbols;
  const auto& q = *p.find_query("q");
  Instance i1 = load_instance(test_path("golden/kb_prime_I1.json"), p.kb);
  Instance i2 = load_instance(test_path("golden/kb_prime_I2.json"), p.kb);
  if (!naive_is_solution(p.kb, i1) || !naive_is_solution(p.kb, i2)) o.fail("I1/I2 not solutions");
  if (!hom_equivalent(i1, i2)) o.fail("I1/I2 not homomorphically equivalent");
  auto d1 = drop_nulls(evaluate(q, sy, i1));
  auto d2 = drop_nulls(evaluate(q, sy, i2));
  const std::set<std::string> top{"[e] {1, 2}"};
  if (render_tuples(sy, d1.tuples) != top) o.fail("drop on I1 differs");
  if (render_tuples(sy, d2.tuples) != std::set<std::string>{"[e] {1, 2}", "[e] {1}"}) o.fail("drop on I2 differs");
  if (render_tuples(sy, reduce(d1).tuples) != top || render_tuples(sy, reduce(d2).tuples) != top) {
    o.fail("reduction differs");
  }
  if (o.pass) o.detail = "drop gives 1 vs 2 tuples, reduction gives {<[e], {1, 2}>} for both";
  return o;
}

Outcome non_termination() {
  Outcome o;
  Program p = load("diverging.kb");
  auto& sy = p.kb.symbols;
  auto prefix = run_chase(p.kb, Strategy::scripted(script("diverging.script")), 7);
  if (prefix.steps() != 7) o.fail("prefix has " + std::to_string(prefix.steps()) + " steps");
  for (const auto& [k, facts] : diverging_instances()) {
    if (k > prefix.steps() || kb_facts(sy, prefix.instance_at(k)) != facts) o.fail("I" + std::to_string(k) + " differs");
  }
  if (!persistent_facts(prefix, 0).empty()) o.fail("persistent facts from 0 are not empty");
  for (std::size_t budget : {50u, 200u, 1000u}) {
    auto seq = run_chase(p.kb, Strategy::scripted(script("diverging.script")), budget);
    if (seq.status != ChaseStatus::BudgetExhausted || seq.steps() != budget) {
      o.fail("budget " + std::to_string(budget) + " not exhausted");
    }
  }
  auto fin = run_chase(p.kb, Strategy::scripted(script("diverging_r1r2.script")));
  if (fin.status != ChaseStatus::Terminated || fin.steps() != 2) o.fail("r1,r2 order did not stop after 2 steps");
  if (kb_facts(sy, fin.final) != diverging_r1r2_final()) o.fail("I'2 differs");
  if (o.pass) o.detail = "I0-I3, I7 match; budgets exhausted; r1,r2 stops after 2 steps with 2 facts";
  return o;
}

Outcome builtin_fidelity() {
  Outcome o;
  Ratio r = jaccard_similarity("John Doe", "J. Doe");
  // 5/8 exactly, whatever the representation.
  if (r.num * 8 != r.den * 5) o.fail("similarity " + std::to_string(r.num) + "/" + std::to_string(r.den));
  if (!jacc_sim("John Doe", "J. Doe", "0.6")) o.fail("0.6 should hold");
  if (jacc_sim("John Doe", "J. Doe", "0.625")) o.fail("0.625 should not hold");
  if (o.pass) o.detail = "similarity " + std::to_string(r.num) + "/" + std::to_string(r.den);
  return o;
}

Outcome never_failing() {
  Outcome o;
  auto t0 = Clock::now();
  std::size_t terminated = 0, checked = 0, unchecked = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    KbGeneratorConfig cfg;
    cfg.seed = seed;
    GeneratedKb g = generate_kb(cfg);
    try {
      auto seq = run_chase(g.kb, Strategy::fair(), kGeneratedBudget);
      if (seq.status != ChaseStatus::Terminated) continue;
      ++terminated;
      try {
        if (!naive_is_solution(g.kb, seq.final)) o.fail("seed " + std::to_string(seed) + ": not a solution");
        ++checked;
      } catch (const OracleBoundError&) {
        ++unchecked;
      }
    } catch (const std::exception& e) {
      o.fail("seed " + std::to_string(seed) + ": " + e.what());
    }
  }
  double secs = seconds_since(t0);
  if (secs >= 120) o.fail("took " + std::to_string(secs) + " s");
  if (o.pass) {
    o.detail = std::to_string(terminated) + " terminated, " + std::to_string(checked) + " checked, " +
               std::to_string(unchecked) + " over oracle bound, " + std::to_string(static_cast<int>(secs)) + " s";
  }
  return o;
}

Outcome order_independence() {
  Outcome o;
  std::size_t found = 0, queries = 0;
  for (std::uint64_t seed = 0; found < 50 && seed < 5000; ++seed) {
    KbGeneratorConfig cfg;
    cfg.seed = seed;
    GeneratedKb g = generate_kb(cfg);
    if (g.queries.empty()) continue;
    std::vector<ChaseSequence> runs;
    bool usable = true;
    for (std::uint64_t order = 0; order < 5 && usable; ++order) {
      runs.push_back(run_chase(g.kb, Strategy::fair(order), kGeneratedBudget));
      usable = runs.back().status == ChaseStatus::Terminated;
    }
    if (!usable || runs[0].steps() == 0) continue;
    ++found;
    std::string tag = "seed " + std::to_string(seed);
    for (std::size_t a = 0; a < runs.size(); ++a) {
      for (std::size_t b = a + 1; b < runs.size(); ++b) {
        if (!hom_equivalent(runs[a].final, runs[b].final)) o.fail(tag + ": results not equivalent");
      }
    }
    std::vector<std::set<std::vector<Cell>>> group;
    for (const auto& q : g.queries) {
      ++queries;
      auto ref = certain_answers(q, g.kb.symbols, runs[0]).tuples;
      for (std::size_t k = 1; k < runs.size(); ++k) {
        if (certain_answers(q, g.kb.symbols, runs[k]).tuples != ref) o.fail(tag + ": answers to " + q.name + " differ");
      }
      group.push_back(ref);
    }
    g_answer_groups.push_back(std::move(group));
  }
  if (found < 50) o.fail("only " + std::to_string(found) + " terminating KBs found");
  if (o.pass) o.detail = std::to_string(found) + " KBs x 5 orders, " + std::to_string(queries) + " queries";
  return o;
}

Outcome partition_invariant() {
  Outcome o;
  std::size_t pairs = 0;
  for (const auto& group : g_answer_groups) {
    std::set<Cell> comps;
    for (const auto& tuples : group) {
      for (const auto& t : tuples) {
        for (const auto& c : t) {
          if (c.is_entity()) comps.insert(c);
        }
      }
    }
    for (auto a = comps.begin(); a != comps.end(); ++a) {
      for (auto b = std::next(a); b != comps.end(); ++b) {
        ++pairs;
        if (a->intersects(*b)) o.fail("overlapping components");
      }
    }
  }
  if (g_answer_groups.empty()) o.fail("no answer sets collected");
  if (o.pass) o.detail = std::to_string(pairs) + " distinct pairs checked";
  return o;
}

bool engine_matches_naive(const SymbolTable& sy, const Instance& i, const Conjunction& body) {
  auto naive = naive_assignments(sy, i, body);
  std::sort(naive.begin(), naive.end());
  auto t = tau(sy, body);
  for (auto policy : {ExecPolicy::Serial, ExecPolicy::Parallel}) {
    std::vector<NaiveAssignment> engine;
    for (const auto& mu : enumerate_assignments(i, t, policy)) {
      engine.push_back({mu.entity_vars, mu.values, mu.set_vars, mu.image});
    }
    std::sort(engine.begin(), engine.end());
    if (engine != naive) return false;
  }
  return true;
}

Outcome matching_oracle() {
  Outcome o;
  std::size_t instances = 0, bodies = 0;
  for (std::uint64_t seed = 0; instances < 200 && seed < 5000; ++seed) {
    KbGeneratorConfig cfg;
    cfg.seed = seed;
    GeneratedKb g = generate_kb(cfg);
    if (g.kb.tbox.empty() && g.queries.empty()) continue;
    auto seq = run_chase(g.kb, Strategy::fair(), kGeneratedBudget);
    for (std::size_t k = 0; k <= seq.steps() && instances < 200; ++k) {
      Instance i = seq.instance_at(k);
      if (i.size() > 8) continue;
      ++instances;
      auto check = [&](const Conjunction& body, const std::string& what) {
        ++bodies;
        if (!engine_matches_naive(g.kb.symbols, i, body)) {
          o.fail("seed " + std::to_string(seed) + " I" + std::to_string(k) + ": " + what);
        }
      };
      for (const auto& r : g.kb.tbox) check(r.body, r.id);
      for (const auto& q : g.queries) check(q.body, q.name);
    }
  }
  if (instances < 200) o.fail("only " + std::to_string(instances) + " instances");
  if (o.pass) o.detail = std::to_string(instances) + " instances, " + std::to_string(bodies) + " conjunctions";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"golden chase trace", golden_trace},
      {"certain answers", certain_answers_running_example},
      {"reduction counterexample", reduction_counterexample},
      {"non-termination", non_termination},
      {"built-in fidelity", builtin_fidelity},
      {"never-failing chase", never_failing},
      {"order independence", order_independence},
      {"partition invariant", partition_invariant},
      {"matching oracle", matching_oracle},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    failed += o.pass ? 0 : 1;
    std::printf("criterion %zu %s: %s (%s)\n", k + 1, criteria[k].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
