#include "tablefill/kg_store.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

#include <json.hpp>

#include "tablefill/error.hpp"

namespace tablefill {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path.string());
  return in;
}

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

TokenSet tokens_of_list(const nlohmann::json& record, const char* key) {
  TokenList tokens;
  if (auto it = record.find(key); it != record.end() && !it->is_null()) {
    for (const auto& item : *it) {
      for (auto& t : tokenize(item.get<std::string>())) tokens.push_back(std::move(t));
    }
  }
  return to_token_set(std::move(tokens));
}

std::string string_field(const nlohmann::json& record, const char* key) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) return {};
  return it->get<std::string>();
}

template <class Fn>
void for_each_json_line(std::istream& in, const std::string& source, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
      if (!record.is_object()) throw ParseError(source, line_no, "expected a JSON object");
      fn(record);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
}

}  // namespace

KnowledgeGraph KnowledgeGraph::from_triples(std::span<const Triple> triples) {
  KnowledgeGraph g;
  std::vector<std::string> entities;
  std::vector<std::string> predicates;
  entities.reserve(triples.size() * 2);
  predicates.reserve(triples.size());
  for (const auto& t : triples) {
    entities.push_back(t.subject);
    entities.push_back(t.object);
    predicates.push_back(t.predicate);
  }
  g.entity_keys_ = sorted_unique(std::move(entities));
  g.predicate_names_ = sorted_unique(std::move(predicates));
  for (std::size_t i = 0; i < g.entity_keys_.size(); ++i) g.entity_index_.emplace(g.entity_keys_[i], static_cast<EntityId>(i));
  for (std::size_t i = 0; i < g.predicate_names_.size(); ++i) {
    // Validates the name against the token rules.
    PredicateToken(g.predicate_names_[i], false);
    g.predicate_index_.emplace(g.predicate_names_[i], static_cast<PredicateId>(i));
  }

  std::vector<std::pair<EntityId, Edge>> half_edges;
  half_edges.reserve(triples.size() * 2);
  for (const auto& t : triples) {
    const EntityId s = g.entity_index_.at(t.subject);
    const EntityId o = g.entity_index_.at(t.object);
    const PredicateId p = g.predicate_index_.at(t.predicate);
    half_edges.push_back({s, Edge{p, false, o}});
    half_edges.push_back({o, Edge{p, true, s}});
  }
  std::sort(half_edges.begin(), half_edges.end());
  half_edges.erase(std::unique(half_edges.begin(), half_edges.end()), half_edges.end());

  g.offsets_.assign(g.entity_keys_.size() + 1, 0);
  g.edges_.reserve(half_edges.size());
  for (const auto& [owner, edge] : half_edges) {
    ++g.offsets_[owner + 1];
    g.edges_.push_back(edge);
  }
  for (std::size_t i = 1; i < g.offsets_.size(); ++i) g.offsets_[i] += g.offsets_[i - 1];
  return g;
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view key) const {
  auto it = entity_index_.find(std::string(key));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

EntityId KnowledgeGraph::require_entity(std::string_view key) const {
  if (auto e = find_entity(key)) return *e;
  throw NotFoundError("unknown entity: " + std::string(key));
}

const std::string& KnowledgeGraph::entity_key(EntityId e) const {
  if (!contains(e)) throw NotFoundError("unknown entity id " + std::to_string(e));
  return entity_keys_[e];
}

std::optional<PredicateId> KnowledgeGraph::find_predicate(std::string_view name) const {
  auto it = predicate_index_.find(std::string(name));
  if (it == predicate_index_.end()) return std::nullopt;
  return it->second;
}

std::span<const Edge> KnowledgeGraph::adjacency(EntityId e) const {
  if (!contains(e)) throw NotFoundError("unknown entity id " + std::to_string(e));
  return {edges_.data() + offsets_[e], edges_.data() + offsets_[e + 1]};
}

std::span<const Edge> KnowledgeGraph::edges_with(EntityId e, PredicateId p, bool inverse) const {
  const auto adj = adjacency(e);
  auto lo = std::lower_bound(adj.begin(), adj.end(), Edge{p, inverse, 0});
  auto hi = lo;
  while (hi != adj.end() && hi->predicate == p && hi->inverse == inverse) ++hi;
  return {lo, hi};
}

NeighborResult neighbors(const KnowledgeGraph& g, EntityId e, std::size_t degree_cap) {
  const auto adj = g.adjacency(e);
  if (adj.size() > degree_cap) return HubSkipped{};
  return adj;
}

KnowledgeGraph load_triples(std::istream& in, const std::string& source_name) {
  std::vector<Triple> triples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3) throw ParseError(source_name, line_no, "expected 3 tab-separated fields");
    for (auto& f : fields) {
      f = std::string(trim(f));
      if (f.empty()) throw ParseError(source_name, line_no, "empty field");
    }
    try {
      PredicateToken(fields[1], false);
    } catch (const InvalidInputError& e) {
      throw ParseError(source_name, line_no, e.what());
    }
    triples.push_back({std::move(fields[0]), std::move(fields[1]), std::move(fields[2])});
  }
  return KnowledgeGraph::from_triples(triples);
}

KnowledgeGraph load_triples(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_triples(in, path.string());
}

void EntityMetaStore::insert(std::string mid, EntityMeta meta) { records_.insert_or_assign(std::move(mid), std::move(meta)); }

const EntityMeta& EntityMetaStore::lookup(std::string_view mid) const {
  static const EntityMeta kEmpty{};
  auto it = records_.find(mid);
  return it == records_.end() ? kEmpty : it->second;
}

EntityMetaStore load_entity_meta(std::istream& in, const std::string& source_name) {
  EntityMetaStore store;
  for_each_json_line(in, source_name, [&](const nlohmann::json& record) {
    EntityMeta meta;
    const std::string mid = record.at("mid").get<std::string>();
    meta.name = string_field(record, "name");
    meta.description = tokenize(string_field(record, "description"));
    meta.description_set = to_token_set(meta.description);
    meta.notable_types = tokens_of_list(record, "notable_types");
    meta.rdf_types = tokens_of_list(record, "rdf_types");
    store.insert(mid, std::move(meta));
  });
  return store;
}

EntityMetaStore load_entity_meta(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_entity_meta(in, path.string());
}

TokenSet predicate_source_type(std::string_view predicate_name) {
  const auto last_dot = predicate_name.rfind('.');
  if (last_dot == std::string_view::npos) return {};
  TokenList tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && current != "base" && current != "common" && current != "type") tokens.push_back(current);
    current.clear();
  };
  for (char c : to_lower(predicate_name.substr(0, last_dot))) {
    if (c == '.' || c == '_') {
      flush();
    } else {
      current.push_back(c);
    }
  }
  flush();
  return to_token_set(std::move(tokens));
}

void PredicateMetaStore::insert(std::string name, TokenSet expected_target_types) {
  auto& slot = targets_[std::move(name)];
  slot = merge_sets(slot, expected_target_types);
}

PredicateMeta PredicateMetaStore::lookup(std::string_view name) const {
  PredicateMeta meta;
  meta.src_type = predicate_source_type(name);
  if (auto it = targets_.find(name); it != targets_.end()) meta.tgt_types = it->second;
  return meta;
}

PredicateMetaStore load_predicate_meta(std::istream& in, const std::string& source_name) {
  PredicateMetaStore store;
  for_each_json_line(in, source_name, [&](const nlohmann::json& record) {
    store.insert(record.at("name").get<std::string>(), tokens_of_list(record, "expected_target_types"));
  });
  return store;
}

PredicateMetaStore load_predicate_meta(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_predicate_meta(in, path.string());
}

}  // namespace tablefill
