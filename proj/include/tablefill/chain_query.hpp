#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "tablefill/kg_store.hpp"
#include "tablefill/metapath.hpp"

namespace tablefill {

// Work limits for one query. max_steps counts frontier-node expansions and
// stands in for a wall-clock timeout.
struct QueryBudget {
  std::size_t max_rows = 10000;
  std::size_t max_steps = 2'000'000;

  void validate() const;
};

struct BudgetExceeded {
  std::string reason;
};

// Sorted, duplicate-free entity ids.
using EntitySet = std::vector<EntityId>;

using TuplePair = std::pair<EntityId, EntityId>;

// Distinct (x, y) bindings, kept sorted.
class TupleSet {
 public:
  TupleSet() = default;
  explicit TupleSet(std::vector<TuplePair> pairs);

  const std::vector<TuplePair>& pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }
  bool contains(const TuplePair& p) const;
  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }

  // Distinct x values.
  EntitySet project_first() const;

  bool operator==(const TupleSet&) const = default;

 private:
  std::vector<TuplePair> pairs_;
};

using ChainResult = std::variant<TupleSet, BudgetExceeded>;
using PrefixResult = std::variant<EntitySet, BudgetExceeded>;

// SELECT DISTINCT ?x ?y for the chain rooted at se. Partial results are
// discarded when the budget runs out. Throws NotFoundError for unknown se.
ChainResult execute_chain(const KnowledgeGraph& g, EntityId se, const ChainPair& chain, const QueryBudget& budget);

// Distinct x reached from se along p1.
PrefixResult execute_prefix(const KnowledgeGraph& g, EntityId se, const MetaPath& p1, const QueryBudget& budget);

// Unbudgeted frontier walk from a set of start entities.
EntitySet walk(const KnowledgeGraph& g, std::span<const EntityId> start, const MetaPath& path);

// True when `to` is reachable from `from` along `path`.
bool connects(const KnowledgeGraph& g, EntityId from, EntityId to, const MetaPath& path);

// True when at least one entity is reachable from `from` along `path`.
bool has_successor(const KnowledgeGraph& g, EntityId from, const MetaPath& path);

// Five-line SPARQL text for the chain:
//   prefix a: <http://rdf.basekb.com/ns/>
//   SELECT DISTINCT ?x ?y WHERE{
//   a:SE a:R1/a:R2 ?x .
//   ?x a:R3 ?y.
//   }
std::string render_sparql(std::string_view se_mid, const ChainPair& chain);

}  // namespace tablefill
