#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mergechase/chase.hpp"

namespace mergechase {

// Brute-force enumeration would exceed its configured bound.
class OracleBoundError : public Error {
 public:
  using Error::Error;
};

// A corpus candidate is not a solution or its chase did not terminate.
class CorpusError : public Error {
 public:
  using Error::Error;
};

// Brute-force counterpart of an Assignment. `occurrences` lists the images
// of the value-variable occurrences, atom by atom and left to right.
struct NaiveAssignment {
  std::map<std::string, Cell> entity;
  std::map<Sym, Cell> values;
  std::vector<Cell> occurrences;
  std::vector<Fact> image;

  auto operator<=>(const NaiveAssignment&) const = default;
};

inline constexpr std::size_t kNaiveBound = 5'000'000;

// Every choice of one fact per atom, kept when it defines an assignment.
std::vector<NaiveAssignment> naive_assignments(const SymbolTable& symbols, const Instance& i,
                                               const Conjunction& conj, std::size_t bound = kNaiveBound);

bool naive_is_solution(const KnowledgeBase& kb, const Instance& i);
std::set<std::vector<Cell>> naive_answers(const SymbolTable& symbols, const ConjunctiveQuery& q,
                                          const Instance& i);

// Chase results under fair orders with seeds 0..n_orders-1 followed by
// `extras`, each checked with naive_is_solution.
std::vector<Instance> solution_corpus(const KnowledgeBase& kb, std::size_t n_orders,
                                      const std::vector<Instance>& extras = {},
                                      std::size_t max_steps = kDefaultMaxSteps);

struct CertainReport {
  bool ok = true;
  std::vector<std::string> problems;
  std::optional<std::vector<Cell>> counterexample;
};

// Condition (1) against every corpus member, and maximality against
// one-element enlargements drawn from the non-null elements of the corpus.
CertainReport check_certain_against_corpus(const KnowledgeBase& kb, const ConjunctiveQuery& q,
                                           const std::set<std::vector<Cell>>& answers,
                                           const std::vector<Instance>& corpus);

struct KbGeneratorConfig {
  std::uint64_t seed = 0;
  std::size_t max_predicates = 2;
  std::size_t max_arity = 3;
  std::size_t max_rules = 3;
  std::size_t max_facts = 8;
  std::size_t max_entities = 2;
  std::size_t max_values = 3;
  std::size_t max_body_atoms = 3;
  std::size_t max_head_atoms = 2;
  std::size_t max_queries = 2;
  double tgd_weight = 1.0;
  double eegd_weight = 1.0;
  double vegd_weight = 1.0;
  double existential_prob = 0.3;
  double constant_prob = 0.1;
  double builtin_prob = 0.2;
};

struct GeneratedKb {
  KnowledgeBase kb;
  std::vector<ConjunctiveQuery> queries;
};

GeneratedKb generate_kb(const KbGeneratorConfig& cfg);

// A fuzz property: nullopt when the case passes, a message otherwise.
using FuzzCheck = std::function<std::optional<std::string>(const GeneratedKb&)>;

// Round trip, engine vs naive matching, solutions and certain answers.
std::optional<std::string> default_fuzz_check(const GeneratedKb& g);

// Drops rules, facts and queries one at a time while `check` still fails.
GeneratedKb shrink_case(const GeneratedKb& g, const FuzzCheck& check);

struct FuzzReport {
  std::size_t cases_run = 0;
  std::optional<std::uint64_t> failing_seed;
  std::string message;
  std::string repro_path;  // written when a case fails
};

// Cases use seeds first_seed, first_seed+1, ...; stops at the first failure.
FuzzReport fuzz(std::uint64_t first_seed, std::size_t cases, const std::string& repro_dir,
                const KbGeneratorConfig& base = {}, const FuzzCheck& check = default_fuzz_check);

}  // namespace mergechase
