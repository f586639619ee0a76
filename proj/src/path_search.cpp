#include "tablefill/path_search.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "tablefill/chain_query.hpp"
#include "tablefill/error.hpp"

namespace tablefill {

const std::vector<std::string>& default_banned_prefixes() {
  static const std::vector<std::string> kPrefixes{
      "freebase",     "common.topic.notable", "common.topic.image",      "common.topic.webpage",
      "type.content", "type.object",          "dataworld.gardening_hint"};
  return kPrefixes;
}

bool has_banned_prefix(const MetaPath& path, const std::vector<std::string>& banned_prefixes) {
  if (path.empty()) return false;
  const std::string& first = path.front().name();
  return std::any_of(banned_prefixes.begin(), banned_prefixes.end(),
                     [&](const std::string& prefix) { return first.starts_with(prefix); });
}

std::vector<MetaPath> prune_generic(std::vector<MetaPath> paths, const std::vector<std::string>& banned_prefixes) {
  std::erase_if(paths, [&](const MetaPath& p) { return has_banned_prefix(p, banned_prefixes); });
  return paths;
}

namespace {

class SimplePathSearch {
 public:
  SimplePathSearch(const KnowledgeGraph& g, EntityId src, EntityId dst, const PathSearchOptions& options)
      : g_(g), src_(src), dst_(dst), options_(options) {
    banned_predicate_.resize(g.predicate_count());
    for (PredicateId p = 0; p < g.predicate_count(); ++p) {
      const auto& name = g.predicate_name(p);
      banned_predicate_[p] = std::any_of(options.banned_prefixes.begin(), options.banned_prefixes.end(),
                                         [&](const std::string& prefix) { return name.starts_with(prefix); });
    }
  }

  std::vector<MetaPath> run() {
    on_path_.push_back(src_);
    visit(src_);
    std::vector<MetaPath> out;
    out.reserve(found_.size());
    for (const auto& hops : found_) {
      std::vector<PredicateToken> tokens;
      tokens.reserve(hops.size());
      for (const Edge& e : hops) tokens.push_back(g_.token(e));
      out.emplace_back(std::move(tokens));
    }
    sort_unique(out);
    return out;
  }

 private:
  void visit(EntityId node) {
    if (node == dst_) {
      found_.insert(hops_);
      return;
    }
    if (hops_.size() == options_.max_len) return;
    if (node != src_ && g_.degree(node) > options_.degree_cap) return;
    for (const Edge& edge : g_.adjacency(node)) {
      if (hops_.empty() && banned_predicate_[edge.predicate]) continue;
      if (std::find(on_path_.begin(), on_path_.end(), edge.target) != on_path_.end()) continue;
      hops_.push_back(Edge{edge.predicate, edge.inverse, 0});
      on_path_.push_back(edge.target);
      visit(edge.target);
      on_path_.pop_back();
      hops_.pop_back();
    }
  }

  const KnowledgeGraph& g_;
  EntityId src_;
  EntityId dst_;
  const PathSearchOptions& options_;
  std::vector<bool> banned_predicate_;
  std::vector<EntityId> on_path_;
  // Hop labels only; the target field is zeroed so entity-distinct paths
  // with the same labels collapse.
  std::vector<Edge> hops_;
  std::set<std::vector<Edge>> found_;
};

}  // namespace

std::vector<MetaPath> enumerate_simple_paths(const KnowledgeGraph& g, EntityId src, EntityId dst,
                                             const PathSearchOptions& options) {
  if (!g.contains(src)) throw NotFoundError("unknown source entity id " + std::to_string(src));
  if (!g.contains(dst)) throw NotFoundError("unknown target entity id " + std::to_string(dst));
  if (src == dst) throw InvalidInputError("path search requires distinct endpoints");
  if (options.max_len < 1 || options.max_len > kMaxSegmentLength) {
    throw InvalidInputError("max_len must be in 1.." + std::to_string(kMaxSegmentLength));
  }
  if (options.degree_cap == 0) throw InvalidInputError("degree_cap must be positive");
  return SimplePathSearch(g, src, dst, options).run();
}

CandidateChainSet join_chains(const KnowledgeGraph& g, EntityId se, const std::vector<MetaPath>& p1s,
                              const std::vector<MetaPath>& p2s) {
  CandidateChainSet chains;
  if (p1s.empty() || p2s.empty()) return chains;
  // has_successor(x, p2) memo, keyed by (p2 index, x).
  std::map<std::pair<std::size_t, EntityId>, bool> memo;
  for (const auto& p1 : p1s) {
    const EntitySet xs = walk(g, std::span<const EntityId>(&se, 1), p1);
    if (xs.empty()) continue;
    for (std::size_t j = 0; j < p2s.size(); ++j) {
      const bool joined = std::any_of(xs.begin(), xs.end(), [&](EntityId x) {
        auto [it, inserted] = memo.try_emplace({j, x}, false);
        if (inserted) it->second = has_successor(g, x, p2s[j]);
        return it->second;
      });
      if (joined) chains.push_back(ChainPair{p1, p2s[j]});
    }
  }
  sort_unique(chains);
  return chains;
}

}  // namespace tablefill
