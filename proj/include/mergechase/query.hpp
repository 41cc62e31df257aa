#pragma once

#include <set>
#include <string>
#include <vector>

#include "mergechase/chase.hpp"

namespace mergechase {

enum class AnswerStage : std::uint8_t { Raw, NullFree, Reduced };

struct AnswerSet {
  std::string query;
  AnswerStage stage = AnswerStage::Raw;
  std::set<std::vector<Cell>> tuples;

  bool operator==(const AnswerSet&) const = default;
};

AnswerSet evaluate(const ConjunctiveQuery& q, const SymbolTable& symbols, const Instance& i,
                   ExecPolicy policy = ExecPolicy::Parallel);
// Removes nulls componentwise and drops tuples left with an empty component.
AnswerSet drop_nulls(const AnswerSet& a);
// Removes strictly dominated tuples.
AnswerSet reduce(const AnswerSet& a);

// Chases `kb` and evaluates `q` on the result. Throws BudgetExhaustedError
// when the chase does not terminate within `max_steps`.
AnswerSet certain_answers(const KnowledgeBase& kb, const ConjunctiveQuery& q,
                          const Strategy& strategy = Strategy::fair(),
                          std::size_t max_steps = kDefaultMaxSteps);
// Same, on an already computed terminated chase.
AnswerSet certain_answers(const ConjunctiveQuery& q, const SymbolTable& symbols, const ChaseSequence& seq);

// True iff every answer tuple of q over `from`, mapped through h, is
// dominated by some answer tuple over `to`.
bool query_preserved(const ConjunctiveQuery& q, const SymbolTable& symbols, const Instance& from,
                     const Instance& to, const Homomorphism& h);

}  // namespace mergechase
