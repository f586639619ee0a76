#include "tablefill/chain_query.hpp"

#include <algorithm>
#include <optional>

#include "tablefill/error.hpp"

namespace tablefill {

namespace {

struct ResolvedToken {
  std::optional<PredicateId> predicate;
  bool inverse;
};

std::vector<ResolvedToken> resolve(const KnowledgeGraph& g, const MetaPath& path) {
  std::vector<ResolvedToken> out;
  out.reserve(path.size());
  for (const auto& t : path.tokens()) out.push_back({g.find_predicate(t.name()), t.inverse()});
  return out;
}

void sort_unique(EntitySet& s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
}

// Frontier expansion with per-hop deduplication. Returns nullopt when the
// step budget is exhausted; `steps` accumulates across calls.
std::optional<EntitySet> expand(const KnowledgeGraph& g, EntitySet frontier, std::span<const ResolvedToken> hops,
                                std::size_t& steps, std::size_t max_steps) {
  for (const auto& hop : hops) {
    EntitySet next;
    if (!hop.predicate) return EntitySet{};
    for (EntityId e : frontier) {
      if (++steps > max_steps) return std::nullopt;
      for (const Edge& edge : g.edges_with(e, *hop.predicate, hop.inverse)) next.push_back(edge.target);
    }
    sort_unique(next);
    frontier = std::move(next);
    if (frontier.empty()) break;
  }
  return frontier;
}

}  // namespace

void QueryBudget::validate() const {
  if (max_rows == 0 || max_steps == 0) throw InvalidInputError("query budget limits must be positive");
}

TupleSet::TupleSet(std::vector<TuplePair> pairs) : pairs_(std::move(pairs)) {
  std::sort(pairs_.begin(), pairs_.end());
  pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
}

bool TupleSet::contains(const TuplePair& p) const { return std::binary_search(pairs_.begin(), pairs_.end(), p); }

EntitySet TupleSet::project_first() const {
  EntitySet xs;
  for (const auto& [x, y] : pairs_) {
    if (xs.empty() || xs.back() != x) xs.push_back(x);
  }
  return xs;
}

PrefixResult execute_prefix(const KnowledgeGraph& g, EntityId se, const MetaPath& p1, const QueryBudget& budget) {
  budget.validate();
  if (!g.contains(se)) throw NotFoundError("unknown subject entity id " + std::to_string(se));
  std::size_t steps = 0;
  const auto hops = resolve(g, p1);
  auto xs = expand(g, EntitySet{se}, hops, steps, budget.max_steps);
  if (!xs) return BudgetExceeded{"step budget exhausted"};
  if (xs->size() > budget.max_rows) return BudgetExceeded{"row limit exceeded"};
  return std::move(*xs);
}

ChainResult execute_chain(const KnowledgeGraph& g, EntityId se, const ChainPair& chain, const QueryBudget& budget) {
  budget.validate();
  if (!g.contains(se)) throw NotFoundError("unknown subject entity id " + std::to_string(se));
  std::size_t steps = 0;
  const auto hops1 = resolve(g, chain.p1);
  const auto hops2 = resolve(g, chain.p2);
  auto xs = expand(g, EntitySet{se}, hops1, steps, budget.max_steps);
  if (!xs) return BudgetExceeded{"step budget exhausted"};
  std::vector<TuplePair> pairs;
  for (EntityId x : *xs) {
    auto ys = expand(g, EntitySet{x}, hops2, steps, budget.max_steps);
    if (!ys) return BudgetExceeded{"step budget exhausted"};
    // Pairs for distinct x never collide, so the running count is exact.
    if (pairs.size() + ys->size() > budget.max_rows) return BudgetExceeded{"row limit exceeded"};
    for (EntityId y : *ys) pairs.emplace_back(x, y);
  }
  return TupleSet(std::move(pairs));
}

EntitySet walk(const KnowledgeGraph& g, std::span<const EntityId> start, const MetaPath& path) {
  EntitySet frontier(start.begin(), start.end());
  sort_unique(frontier);
  std::size_t steps = 0;
  const auto hops = resolve(g, path);
  return *expand(g, std::move(frontier), hops, steps, SIZE_MAX);
}

bool connects(const KnowledgeGraph& g, EntityId from, EntityId to, const MetaPath& path) {
  const EntitySet reached = walk(g, std::span<const EntityId>(&from, 1), path);
  return std::binary_search(reached.begin(), reached.end(), to);
}

bool has_successor(const KnowledgeGraph& g, EntityId from, const MetaPath& path) {
  return !walk(g, std::span<const EntityId>(&from, 1), path).empty();
}

namespace {

std::string render_segment(const MetaPath& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const auto& t = path.tokens()[i];
    if (i > 0) out.push_back('/');
    if (t.inverse()) out.push_back('^');
    out.append("a:").append(t.name());
  }
  return out;
}

}  // namespace

std::string render_sparql(std::string_view se_mid, const ChainPair& chain) {
  std::string out;
  out.append("prefix a: <http://rdf.basekb.com/ns/>\n");
  out.append("SELECT DISTINCT ?x ?y WHERE{\n");
  out.append("a:").append(se_mid).append(" ").append(render_segment(chain.p1)).append(" ?x .\n");
  out.append("?x ").append(render_segment(chain.p2)).append(" ?y.\n");
  out.append("}\n");
  return out;
}

}  // namespace tablefill
