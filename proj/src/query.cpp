#include "mergechase/query.hpp"

#include <algorithm>

namespace mergechase {

AnswerSet evaluate(const ConjunctiveQuery& q, const SymbolTable& symbols, const Instance& i,
                   ExecPolicy policy) {
  AnswerSet out{q.name, AnswerStage::Raw, {}};
  TauConjunction t = tau(symbols, q.body);
  for (const auto& mu : enumerate_assignments(i, t, policy)) {
    std::vector<Cell> tuple;
    for (const auto& x : q.free_vars) {
      auto it = mu.entity_vars.find(x);
      tuple.push_back(it != mu.entity_vars.end() ? it->second : mu.value_of(t, x));
    }
    out.tuples.insert(std::move(tuple));
  }
  return out;
}

AnswerSet drop_nulls(const AnswerSet& a) {
  AnswerSet out{a.query, AnswerStage::NullFree, {}};
  for (const auto& tuple : a.tuples) {
    std::vector<Cell> kept;
    bool empty = false;
    for (const auto& c : tuple) {
      std::vector<Sym> ms;
      std::copy_if(c.members.begin(), c.members.end(), std::back_inserter(ms),
                   [](Sym s) { return !is_null(s); });
      empty = empty || ms.empty();
      kept.emplace_back(std::move(ms));
    }
    if (!empty) out.tuples.insert(std::move(kept));
  }
  return out;
}

AnswerSet reduce(const AnswerSet& a) {
  AnswerSet out{a.query, AnswerStage::Reduced, {}};
  for (const auto& t : a.tuples) {
    bool dominated = std::any_of(a.tuples.begin(), a.tuples.end(), [&](const auto& u) {
      return u != t && dominated_or_equal(t, u);
    });
    if (!dominated) out.tuples.insert(t);
  }
  return out;
}

AnswerSet certain_answers(const ConjunctiveQuery& q, const SymbolTable& symbols, const ChaseSequence& seq) {
  if (seq.status != ChaseStatus::Terminated) {
    throw BudgetExhaustedError("chase did not terminate within budget; certain answers unavailable");
  }
  return reduce(drop_nulls(evaluate(q, symbols, seq.final)));
}

AnswerSet certain_answers(const KnowledgeBase& kb, const ConjunctiveQuery& q, const Strategy& strategy,
                          std::size_t max_steps) {
  return certain_answers(q, kb.symbols, run_chase(kb, strategy, max_steps));
}

bool query_preserved(const ConjunctiveQuery& q, const SymbolTable& symbols, const Instance& from,
                     const Instance& to, const Homomorphism& h) {
  auto src = evaluate(q, symbols, from);
  auto dst = evaluate(q, symbols, to);
  for (const auto& t : src.tuples) {
    std::vector<Cell> mapped;
    for (const auto& c : t) mapped.push_back(h.apply(c));
    bool hit = std::any_of(dst.tuples.begin(), dst.tuples.end(),
                           [&](const auto& u) { return dominated_or_equal(mapped, u); });
    if (!hit) return false;
  }
  return true;
}

}  // namespace mergechase
