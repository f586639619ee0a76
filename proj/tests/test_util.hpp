#pragma once

#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tablefill/dataset.hpp"
#include "tablefill/embeddings.hpp"
#include "tablefill/kg_store.hpp"
#include "tablefill/metapath.hpp"
#include "tablefill/rng.hpp"
#include "tablefill/synthetic.hpp"

namespace tablefill::testutil {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("tablefill_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string node_name(std::size_t i) { return "n" + std::to_string(i); }

// Random multigraph over n nodes with up to `edges` triples drawn from
// `predicates` labels. Self loops are allowed.
inline std::vector<Triple> random_triples(std::uint64_t seed, std::size_t nodes, std::size_t edges,
                                          std::size_t predicates) {
  Rng rng(seed);
  std::vector<Triple> out;
  for (std::size_t e = 0; e < edges; ++e) {
    out.push_back({node_name(rng.uniform_index(nodes)), "p" + std::to_string(rng.uniform_index(predicates)),
                   node_name(rng.uniform_index(nodes))});
  }
  return out;
}

// Brute-force simple-path enumeration over the raw triple list, no degree
// cap and no banned prefixes. Returns canonical meta-path strings.
inline void brute_paths_from(const std::vector<Triple>& triples, const std::string& at, const std::string& dst,
                             std::size_t max_len, std::vector<std::string>& visited, std::vector<std::string>& tokens,
                             std::set<std::string>& out) {
  if (tokens.size() == max_len) return;
  for (const auto& t : triples) {
    for (int dir = 0; dir < 2; ++dir) {
      const std::string& from = dir == 0 ? t.subject : t.object;
      const std::string& to = dir == 0 ? t.object : t.subject;
      if (from != at) continue;
      if (std::find(visited.begin(), visited.end(), to) != visited.end()) continue;
      tokens.push_back(dir == 0 ? t.predicate : "^" + t.predicate);
      if (to == dst) {
        std::string s;
        for (std::size_t i = 0; i < tokens.size(); ++i) s += (i ? "/" : "") + tokens[i];
        out.insert(s);
      } else {
        visited.push_back(to);
        brute_paths_from(triples, to, dst, max_len, visited, tokens, out);
        visited.pop_back();
      }
      tokens.pop_back();
    }
  }
}

inline std::set<std::string> brute_paths(const std::vector<Triple>& triples, const std::string& src,
                                         const std::string& dst, std::size_t max_len) {
  std::set<std::string> out;
  std::vector<std::string> visited{src};
  std::vector<std::string> tokens;
  brute_paths_from(triples, src, dst, max_len, visited, tokens, out);
  return out;
}

using Relation = std::set<std::pair<std::string, std::string>>;

// Relation of one (possibly inverse) token as a set of (from, to) pairs.
inline Relation token_relation(const std::vector<Triple>& triples, const PredicateToken& tok) {
  Relation r;
  for (const auto& t : triples) {
    if (t.predicate != tok.name()) continue;
    if (tok.inverse()) r.emplace(t.object, t.subject);
    else r.emplace(t.subject, t.object);
  }
  return r;
}

inline Relation compose(const Relation& a, const Relation& b) {
  Relation out;
  for (const auto& [x, y] : a) {
    for (const auto& [u, v] : b) {
      if (y == u) out.emplace(x, v);
    }
  }
  return out;
}

inline Relation path_relation(const std::vector<Triple>& triples, const MetaPath& path) {
  Relation r = token_relation(triples, path.tokens().front());
  for (std::size_t i = 1; i < path.size(); ++i) r = compose(r, token_relation(triples, path.tokens()[i]));
  return r;
}

// Naive nested-join evaluation of SELECT DISTINCT ?x ?y from the relations
// of P1 and P2.
inline Relation join_relations(const Relation& r1, const Relation& r2, const std::string& se) {
  Relation out;
  for (const auto& [s, x] : r1) {
    if (s != se) continue;
    for (const auto& [u, y] : r2) {
      if (u == x) out.emplace(x, y);
    }
  }
  return out;
}

inline Relation naive_chain(const std::vector<Triple>& triples, const std::string& se, const ChainPair& chain) {
  return join_relations(path_relation(triples, chain.p1), path_relation(triples, chain.p2), se);
}

// Small synthetic corpus written to disk.
inline SyntheticOptions small_synthetic(std::size_t tables = 30, std::uint64_t seed = 7) {
  SyntheticOptions o;
  o.tables = tables;
  o.seed = seed;
  return o;
}

// A synthetic corpus round-tripped through disk and loaded the way the CLI
// loads it, plus the dataset built from it.
struct World {
  KnowledgeGraph graph;
  EntityMetaStore entities;
  PredicateMetaStore predicates;
  PretrainedEmbeddings embeddings;
  CorpusInputs inputs;
  Dataset dataset;
};

inline World load_world(const std::filesystem::path& dir, const BuildOptions& build = {}) {
  namespace L = tablefill;
  World w;
  w.graph = L::load_triples(dir / SyntheticLayout::kGraph);
  w.entities = L::load_entity_meta(dir / SyntheticLayout::kEntityMeta);
  w.predicates = L::load_predicate_meta(dir / SyntheticLayout::kPredicateMeta);
  w.embeddings = L::load_embeddings(dir / SyntheticLayout::kEmbeddings);
  w.inputs.tables = L::load_corpus(dir / SyntheticLayout::kCorpus);
  w.inputs.url_to_mid = L::load_url_to_mid(dir / SyntheticLayout::kUrlToMid);
  w.inputs.entity_types = L::load_entity_types(dir / SyntheticLayout::kEntityTypes);
  w.inputs.fine_types = L::load_fine_types(dir / SyntheticLayout::kFineTypes);
  w.dataset = build_dataset(w.inputs, w.graph, w.entities, build);
  return w;
}

inline World make_world(const std::filesystem::path& dir, const SyntheticOptions& options,
                        const BuildOptions& build = {}) {
  write_synthetic(generate_synthetic(options), dir);
  return load_world(dir, build);
}

}  // namespace tablefill::testutil
