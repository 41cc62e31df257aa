#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mergechase/matching.hpp"

namespace mergechase {

// The trigger handed to apply_step no longer applies.
class StaleTriggerError : public Error {
 public:
  using Error::Error;
};

class ScriptError : public Error {
 public:
  using Error::Error;
};

class BudgetExhaustedError : public Error {
 public:
  using Error::Error;
};

enum class ChaseStatus : std::uint8_t { Terminated, BudgetExhausted };
const char* status_name(ChaseStatus s);

// Next counters for fresh nulls.
struct NullCounter {
  std::uint32_t entity = 1;
  std::uint32_t value = 1;

  static NullCounter after(const Instance& i);
  Sym fresh(ArgType type);
};

struct ChaseStepRecord {
  std::size_t index = 0;  // 1-based
  std::string rule_id;
  RuleKind kind = RuleKind::Tgd;
  Assignment assignment;
  // Entity variables by name, then set-variables as S1^x, in tau order.
  std::vector<std::pair<std::string, Cell>> bindings;
  std::vector<Fact> added;
  std::vector<Fact> removed;
  std::vector<Sym> fresh_nulls;
};

struct ChaseSequence {
  Instance initial;
  std::vector<ChaseStepRecord> records;
  Instance final;
  ChaseStatus status = ChaseStatus::Terminated;

  std::size_t steps() const { return records.size(); }
  // I_k by replaying the first k records on the initial instance.
  Instance instance_at(std::size_t k) const;
  std::vector<Instance> instances() const;
};

std::vector<Assignment> applicable_triggers(const Instance& i, const CompiledRule& rule,
                                            ExecPolicy policy = ExecPolicy::Parallel);

// True iff every image fact of `mu` is still in `i` and `mu` still triggers.
bool still_applicable(const Instance& i, const CompiledRule& rule, const Assignment& mu);

// Applies one chase step in place. Throws StaleTriggerError when `mu` does
// not trigger `rule` in `i`.
ChaseStepRecord apply_step(Instance& i, const CompiledRule& rule, const Assignment& mu,
                           NullCounter& nulls);

// Replays a record on the instance it was recorded against.
void replay(Instance& i, const ChaseStepRecord& rec);

// One scripted step: the rule and the image of the trigger to fire. A
// selector is either `#k` (1-based position in the listing order of the
// current instance) or a fact in canonical text.
struct ScriptStep {
  std::string rule_id;
  std::vector<std::string> selectors;
  int line = 0;
};

// Lines `step <rule-id> image <label>[,<label>...]`; blank lines and `#`
// comments are skipped.
std::vector<ScriptStep> parse_script(std::string_view text);

struct Strategy {
  enum class Kind : std::uint8_t { Fair, Scripted };
  Kind kind = Kind::Fair;
  // Permutes rule order and trigger order; 0 keeps declaration and
  // enumeration order.
  std::uint64_t seed = 0;
  // Scripted: these steps first, then fair rounds.
  std::vector<ScriptStep> script;

  static Strategy fair(std::uint64_t seed = 0) { return {Kind::Fair, seed, {}}; }
  static Strategy scripted(std::vector<ScriptStep> steps) {
    return {Kind::Scripted, 0, std::move(steps)};
  }
};

inline constexpr std::size_t kDefaultMaxSteps = 10000;

ChaseSequence run_chase(const KnowledgeBase& kb, const Strategy& strategy,
                        std::size_t max_steps = kDefaultMaxSteps,
                        ExecPolicy policy = ExecPolicy::Parallel);

// Facts present in every I_j for h <= j <= m of the recorded prefix. Throws
// std::out_of_range when h > m.
std::vector<Fact> persistent_facts(const ChaseSequence& seq, std::size_t from_index);

}  // namespace mergechase
