#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "tablefill/kg_store.hpp"
#include "tablefill/metapath.hpp"

namespace tablefill {

inline constexpr std::size_t kDefaultDegreeCap = 500;
inline constexpr std::size_t kUnlimitedDegree = std::numeric_limits<std::size_t>::max();

// Predicate prefixes considered too generic to start a path.
const std::vector<std::string>& default_banned_prefixes();

struct PathSearchOptions {
  std::size_t max_len = kMaxSegmentLength;
  std::size_t degree_cap = kDefaultDegreeCap;
  std::vector<std::string> banned_prefixes = default_banned_prefixes();
};

// Meta-paths of every simple path (no repeated entity, source included) from
// src to dst with at most max_len hops. Intermediate nodes whose degree
// exceeds degree_cap are not expanded; src is always expanded and dst never
// is. Paths whose first predicate starts with a banned prefix are dropped.
// Result is sorted by canonical form.
//
// Throws NotFoundError for unknown entities and InvalidInputError when
// src == dst or max_len is outside 1..3.
std::vector<MetaPath> enumerate_simple_paths(const KnowledgeGraph& g, EntityId src, EntityId dst,
                                             const PathSearchOptions& options);

// Removes paths whose first token name starts with any banned prefix.
std::vector<MetaPath> prune_generic(std::vector<MetaPath> paths, const std::vector<std::string>& banned_prefixes);

bool has_banned_prefix(const MetaPath& path, const std::vector<std::string>& banned_prefixes);

// M x N join keeping (p1, p2) when some entity reached from se via p1 has at
// least one p2-successor.
CandidateChainSet join_chains(const KnowledgeGraph& g, EntityId se, const std::vector<MetaPath>& p1s,
                              const std::vector<MetaPath>& p2s);

}  // namespace tablefill
