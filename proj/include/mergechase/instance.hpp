#pragma once

#include <compare>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mergechase/kb.hpp"

namespace mergechase {

// Broken instance invariant (incoherent classes, unknown class ids, missing
// image facts).
class InvariantError : public Error {
 public:
  using Error::Error;
};

// One argument of a fact: an equivalence class of entities/entity-nulls or a
// non-empty set of values/value-nulls. Members are kept sorted by id.
struct Cell {
  std::vector<Sym> members;

  Cell() = default;
  explicit Cell(std::vector<Sym> m);
  static Cell singleton(Sym s) { return Cell{{s}}; }

  bool empty() const { return members.empty(); }
  std::size_t size() const { return members.size(); }
  bool is_entity() const { return !members.empty() && is_entity_side(members.front()); }
  bool contains(Sym s) const;
  bool subset_of(const Cell& other) const;
  bool intersects(const Cell& other) const;

  auto operator<=>(const Cell&) const = default;
};

Cell cell_intersection(const Cell& a, const Cell& b);
Cell cell_union(const Cell& a, const Cell& b);

struct Fact {
  PredId pred = 0;
  std::vector<Cell> cells;
  auto operator<=>(const Fact&) const = default;
};

enum class Dominance : std::uint8_t {
  Equal,
  Dominates,    // a strictly dominates b
  DominatedBy,  // b strictly dominates a
  Incomparable,
};

// Componentwise inclusion order on equal-length, equal-kind cell tuples.
// Throws std::invalid_argument on length or kind mismatch.
Dominance compare_tuples(std::span<const Cell> a, std::span<const Cell> b);
// a <= b componentwise (no kind checks).
bool dominated_or_equal(std::span<const Cell> a, std::span<const Cell> b);

// Facts removed from / added to an instance by one mutation.
struct FactDelta {
  std::vector<Fact> added;
  std::vector<Fact> removed;
};

// A fact of the image together with the argument positions to rewrite.
struct CellEdit {
  Fact fact;
  std::vector<std::size_t> positions;
};

// Partition of the entities and entity-nulls occurring in an instance.
// Classes are identified by a representative member; merging relabels the
// smaller class (union by size). Each class counts the entity cells that
// reference it so that classes disappear with their last fact.
class EntityPartition {
 public:
  // Registers one occurrence of `cell`; creates the class on first sight.
  void acquire(const Cell& cell);
  void release(const Cell& cell);
  Sym unite(Sym a, Sym b);

  // Representative of the class that is exactly `cell`, or throws.
  Sym class_id(const Cell& cell) const;
  std::optional<Sym> find(Sym member) const;
  const std::vector<Sym>& members(Sym rep) const { return classes_.at(rep).members; }
  std::vector<Cell> classes() const;
  std::size_t class_count() const { return classes_.size(); }

 private:
  struct Class {
    std::vector<Sym> members;
    std::size_t refs = 0;
  };
  std::unordered_map<Sym, Sym> rep_of_;
  std::unordered_map<Sym, Class> classes_;
};

// A deduplicated set of facts in canonical order plus the equivalence
// relation over under_E. Value-like: copy freely, share read-only.
class Instance {
 public:
  using FactSet = std::set<Fact>;
  using const_iterator = FactSet::const_iterator;
  using Buckets = std::unordered_map<Sym, std::vector<const Fact*>>;

  Instance() = default;
  Instance(const Instance& o) : facts_(o.facts_), eq_(o.eq_) {}
  Instance(Instance&& o) noexcept : facts_(std::move(o.facts_)), eq_(std::move(o.eq_)) {}
  Instance& operator=(const Instance& o) {
    if (this != &o) {
      facts_ = o.facts_;
      eq_ = o.eq_;
      invalidate();
    }
    return *this;
  }
  Instance& operator=(Instance&& o) noexcept {
    facts_ = std::move(o.facts_);
    eq_ = std::move(o.eq_);
    invalidate();
    return *this;
  }

  // Returns false when an identical fact is already present. Throws
  // InvariantError if an entity cell overlaps an existing class without
  // being equal to it.
  bool insert(Fact f);
  bool erase(const Fact& f);
  bool contains(const Fact& f) const { return facts_.count(f) != 0; }

  const FactSet& facts() const { return facts_; }
  std::pair<const_iterator, const_iterator> facts_of(PredId pred) const;
  std::size_t size() const { return facts_.size(); }
  bool empty() const { return facts_.empty(); }

  // Facts of `pred` keyed by the first member of their entity cell at
  // `pos`, in fact order. Built on first use; thread-safe for readers.
  const Buckets& entity_buckets(PredId pred, std::size_t pos) const;

  std::optional<Cell> class_of(Sym entity) const;
  std::vector<Cell> classes() const { return eq_.classes(); }

  // Entity-egd rewrite: replaces every occurrence of c1 and c2 by their
  // union; duplicates collapse.
  FactDelta merge_entity_classes(const Cell& c1, const Cell& c2);

  // Value-egd rewrite, local to the given image facts: the listed positions
  // of each fact become `replacement`.
  FactDelta replace_value_cells_local(std::span<const CellEdit> edits, const Cell& replacement);

  bool operator==(const Instance& other) const { return facts_ == other.facts_; }

 private:
  struct BucketCache {
    std::mutex mutex;
    std::map<std::pair<PredId, std::size_t>, Buckets> by_position;
  };
  void invalidate() { cache_->by_position.clear(); }

  FactSet facts_;
  EntityPartition eq_;
  std::unique_ptr<BucketCache> cache_ = std::make_unique<BucketCache>();
};

struct ActiveDomain {
  std::set<Cell> entity_classes;
  std::set<Cell> value_sets;
};

struct UnderlyingDomain {
  std::set<Sym> entities;  // entities and entity-nulls
  std::set<Sym> values;    // values and value-nulls
};

ActiveDomain active_domain(const Instance& i);
UnderlyingDomain underlying_domain(const Instance& i);

// I^D: one singleton-cell fact per ground atom of D_O plus the materialized
// built-in facts. Throws SchemaError on ill-typed ground atoms.
Instance base_instance(const KnowledgeBase& kb);

// Largest null counters used in an instance (0 when none).
std::pair<std::uint32_t, std::uint32_t> max_null_indices(const Instance& i);

// Canonical text, e.g. CI([Doe1, Doe2], {"J. Doe"}, {"358"}). Members are
// listed in SymbolTable::output_less order.
std::string render_cell(const SymbolTable& symbols, const Cell& cell);
std::string render_fact(const SymbolTable& symbols, const Fact& fact);
std::vector<Sym> output_sorted(const SymbolTable& symbols, const Cell& cell);

// Facts in output order (predicate name, then rendered cells) for listings
// that must not depend on intern order.
std::vector<Fact> listing_order(const SymbolTable& symbols, const Instance& i);

}  // namespace mergechase
