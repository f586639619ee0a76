#pragma once

#include <array>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "tablefill/dataset.hpp"
#include "tablefill/embeddings.hpp"
#include "tablefill/kg_store.hpp"
#include "tablefill/metapath.hpp"

namespace tablefill {

inline constexpr std::size_t kFeatureCount = 27;
using FeatureVector = std::array<double, kFeatureCount>;

// Frozen feature order:
//   0      c1 frequency in the candidate set
//   1-4    description match (jaccard c1, jaccard c2, cosine c1, cosine c2)
//   5-8    query intent vs description (same pattern)
//   9-12   notable type match
//   13-16  rdf type match
//   17-19  chain type differences, jaccard: tgt(P1) vs c1, src(P2) vs c1, tgt(P2) vs c2
//   20-22  the same three with cosine
//   23-26  column name vs notable type differences (jaccard c1, jaccard c2, cosine c1, cosine c2)
const std::array<std::string_view, kFeatureCount>& feature_names();

// Everything about the query that candidate features are measured against.
struct RankingQuery {
  TokenList qis;
  TokenList cn1;
  TokenList cn2;
  ChainPair chain;
  MidPair example_row;
};

// Expected types at the two ends of a chain segment. Inverse hops swap the
// source and target roles of their predicate.
TokenSet segment_target_type(const MetaPath& segment, const PredicateMetaStore& predicates);
TokenSet segment_source_type(const MetaPath& segment, const PredicateMetaStore& predicates);

class Featurizer {
 public:
  Featurizer(const EntityMetaStore& entities, const PredicateMetaStore& predicates,
             const PretrainedEmbeddings& embeddings)
      : entities_(entities), predicates_(predicates), embeddings_(embeddings) {}

  // c1_count is how often the candidate's column-1 entity occurs in the
  // candidate set.
  FeatureVector featurize(const RankingQuery& query, const MidPair& candidate, std::size_t c1_count) const;

  // Features for every candidate; c1 counts are taken over `candidates`.
  std::vector<FeatureVector> featurize_all(const RankingQuery& query, const std::vector<MidPair>& candidates) const;

 private:
  const EntityMetaStore& entities_;
  const PredicateMetaStore& predicates_;
  const PretrainedEmbeddings& embeddings_;
};

// CSV dump with the frozen column names as header.
void write_feature_csv(std::ostream& out, const std::vector<FeatureVector>& rows);

}  // namespace tablefill
