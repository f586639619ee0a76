#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "tablefill/metapath.hpp"
#include "tablefill/text.hpp"

namespace tablefill {

using EntityId = std::uint32_t;
using PredicateId = std::uint32_t;

struct Triple {
  std::string subject;
  std::string predicate;
  std::string object;
};

// Adjacency entry. An inverse edge (^p, s) stored under o stands for the
// triple (s, p, o).
struct Edge {
  PredicateId predicate;
  bool inverse;
  EntityId target;

  auto operator<=>(const Edge&) const = default;
};

struct HubSkipped {};

using NeighborResult = std::variant<std::span<const Edge>, HubSkipped>;

// Immutable in-memory graph in CSR form. Entity and predicate ids are
// assigned in lexicographic order of their identifier strings, so the
// structure does not depend on input order, and sorting adjacency by
// (predicate id, inverse, target) sorts it by (predicate name, inverse,
// neighbor id).
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  static KnowledgeGraph from_triples(std::span<const Triple> triples);

  std::size_t entity_count() const noexcept { return entity_keys_.size(); }
  std::size_t predicate_count() const noexcept { return predicate_names_.size(); }
  // Distinct stored triples.
  std::size_t triple_count() const noexcept { return edges_.size() / 2; }

  bool contains(EntityId e) const noexcept { return e < entity_keys_.size(); }
  std::optional<EntityId> find_entity(std::string_view key) const;
  // Throws NotFoundError.
  EntityId require_entity(std::string_view key) const;
  const std::string& entity_key(EntityId e) const;

  std::optional<PredicateId> find_predicate(std::string_view name) const;
  const std::string& predicate_name(PredicateId p) const { return predicate_names_.at(p); }

  // Throws NotFoundError for unknown entities.
  std::span<const Edge> adjacency(EntityId e) const;
  std::size_t degree(EntityId e) const { return adjacency(e).size(); }

  // Edges of e labelled with the given direction-encoded predicate.
  std::span<const Edge> edges_with(EntityId e, PredicateId p, bool inverse) const;

  PredicateToken token(const Edge& edge) const { return PredicateToken(predicate_names_[edge.predicate], edge.inverse); }

 private:
  std::vector<std::string> entity_keys_;
  std::unordered_map<std::string, EntityId> entity_index_;
  std::vector<std::string> predicate_names_;
  std::unordered_map<std::string, PredicateId> predicate_index_;
  std::vector<std::size_t> offsets_;  // entity_count + 1
  std::vector<Edge> edges_;
};

// Full adjacency when degree(e) <= degree_cap, HubSkipped otherwise.
NeighborResult neighbors(const KnowledgeGraph& g, EntityId e, std::size_t degree_cap);

// Tab-separated "subject predicate object" lines; '#' lines and blank lines
// are skipped. Duplicate triples collapse.
KnowledgeGraph load_triples(const std::filesystem::path& path);
KnowledgeGraph load_triples(std::istream& in, const std::string& source_name = "<stream>");

struct EntityMeta {
  std::string name;
  TokenList description;
  TokenSet description_set;
  TokenSet notable_types;
  TokenSet rdf_types;
};

// Metadata keyed by external entity id. Lookups of unseen ids return an
// empty record.
class EntityMetaStore {
 public:
  void insert(std::string mid, EntityMeta meta);
  const EntityMeta& lookup(std::string_view mid) const;
  bool contains(std::string_view mid) const { return records_.find(mid) != records_.end(); }
  std::size_t size() const noexcept { return records_.size(); }

 private:
  std::map<std::string, EntityMeta, std::less<>> records_;
};

// Records: {"mid", "name", "description", "notable_types": [...], "rdf_types": [...]}
EntityMetaStore load_entity_meta(const std::filesystem::path& path);
EntityMetaStore load_entity_meta(std::istream& in, const std::string& source_name = "<stream>");

struct PredicateMeta {
  TokenSet src_type;
  TokenSet tgt_types;
};

// Drops the last dot-separated segment of the predicate name, splits the rest
// on '.' and '_', and removes the generic tokens base/common/type.
TokenSet predicate_source_type(std::string_view predicate_name);

class PredicateMetaStore {
 public:
  void insert(std::string name, TokenSet expected_target_types);
  // src_type is always derived from the name; tgt_types is empty for
  // predicates without a record.
  PredicateMeta lookup(std::string_view name) const;
  std::size_t size() const noexcept { return targets_.size(); }

 private:
  std::map<std::string, TokenSet, std::less<>> targets_;
};

// Records: {"name", "expected_target_types": [...]}. Repeated records for one
// predicate union their target types.
PredicateMetaStore load_predicate_meta(const std::filesystem::path& path);
PredicateMetaStore load_predicate_meta(std::istream& in, const std::string& source_name = "<stream>");

}  // namespace tablefill
