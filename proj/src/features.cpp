#include "tablefill/features.hpp"

#include <map>
#include <ostream>
#include <unordered_map>

#include "tablefill/simd/kernels.hpp"

namespace tablefill {

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static const std::array<std::string_view, kFeatureCount> kNames{
      "c1_frequency",
      "desc_jaccard_c1",
      "desc_jaccard_c2",
      "desc_cosine_c1",
      "desc_cosine_c2",
      "qis_desc_jaccard_c1",
      "qis_desc_jaccard_c2",
      "qis_desc_cosine_c1",
      "qis_desc_cosine_c2",
      "notable_type_jaccard_c1",
      "notable_type_jaccard_c2",
      "notable_type_cosine_c1",
      "notable_type_cosine_c2",
      "rdf_type_jaccard_c1",
      "rdf_type_jaccard_c2",
      "rdf_type_cosine_c1",
      "rdf_type_cosine_c2",
      "chain_tgt_p1_jaccard_diff",
      "chain_src_p2_jaccard_diff",
      "chain_tgt_p2_jaccard_diff",
      "chain_tgt_p1_cosine_diff",
      "chain_src_p2_cosine_diff",
      "chain_tgt_p2_cosine_diff",
      "colname_type_jaccard_diff_c1",
      "colname_type_jaccard_diff_c2",
      "colname_type_cosine_diff_c1",
      "colname_type_cosine_diff_c2",
  };
  return kNames;
}

TokenSet segment_target_type(const MetaPath& segment, const PredicateMetaStore& predicates) {
  const auto& last = segment.back();
  auto meta = predicates.lookup(last.name());
  return last.inverse() ? meta.src_type : meta.tgt_types;
}

TokenSet segment_source_type(const MetaPath& segment, const PredicateMetaStore& predicates) {
  const auto& first = segment.front();
  auto meta = predicates.lookup(first.name());
  return first.inverse() ? meta.tgt_types : meta.src_type;
}

namespace {

// A token set with its mean embedding.
struct Bag {
  TokenSet tokens;
  std::vector<double> mean;

  Bag(TokenSet t, const PretrainedEmbeddings& emb) : tokens(std::move(t)), mean(emb.mean_of(tokens)) {}
};

struct EntityView {
  Bag description;
  Bag notable;
  Bag rdf;

  EntityView(const EntityMeta& meta, const PretrainedEmbeddings& emb)
      : description(meta.description_set, emb), notable(meta.notable_types, emb), rdf(meta.rdf_types, emb) {}
};

struct QueryView {
  Bag qis;
  Bag cn1;
  Bag cn2;
  Bag tgt_p1;
  Bag src_p2;
  Bag tgt_p2;

  QueryView(const RankingQuery& q, const PredicateMetaStore& preds, const PretrainedEmbeddings& emb)
      : qis(to_token_set(q.qis), emb),
        cn1(to_token_set(q.cn1), emb),
        cn2(to_token_set(q.cn2), emb),
        tgt_p1(segment_target_type(q.chain.p1, preds), emb),
        src_p2(segment_source_type(q.chain.p2, preds), emb),
        tgt_p2(segment_target_type(q.chain.p2, preds), emb) {}
};

double jac(const Bag& a, const Bag& b) { return jaccard(a.tokens, b.tokens); }

double cos(const Bag& a, const Bag& b) {
  if (a.mean.empty()) return 0.0;
  return simd::cosine(a.mean, b.mean);
}

FeatureVector compute(const QueryView& q, const EntityView& er1, const EntityView& er2, const EntityView& t1,
                      const EntityView& t2, std::size_t c1_count) {
  FeatureVector f{};
  f[0] = static_cast<double>(c1_count);

  f[1] = jac(er1.description, t1.description);
  f[2] = jac(er2.description, t2.description);
  f[3] = cos(er1.description, t1.description);
  f[4] = cos(er2.description, t2.description);

  f[5] = jac(q.qis, t1.description);
  f[6] = jac(q.qis, t2.description);
  f[7] = cos(q.qis, t1.description);
  f[8] = cos(q.qis, t2.description);

  f[9] = jac(er1.notable, t1.notable);
  f[10] = jac(er2.notable, t2.notable);
  f[11] = cos(er1.notable, t1.notable);
  f[12] = cos(er2.notable, t2.notable);

  f[13] = jac(er1.rdf, t1.rdf);
  f[14] = jac(er2.rdf, t2.rdf);
  f[15] = cos(er1.rdf, t1.rdf);
  f[16] = cos(er2.rdf, t2.rdf);

  f[17] = jac(er1.notable, q.tgt_p1) - jac(t1.notable, q.tgt_p1);
  f[18] = jac(er1.notable, q.src_p2) - jac(t1.notable, q.src_p2);
  f[19] = jac(er2.notable, q.tgt_p2) - jac(t2.notable, q.tgt_p2);
  f[20] = cos(er1.notable, q.tgt_p1) - cos(t1.notable, q.tgt_p1);
  f[21] = cos(er1.notable, q.src_p2) - cos(t1.notable, q.src_p2);
  f[22] = cos(er2.notable, q.tgt_p2) - cos(t2.notable, q.tgt_p2);

  f[23] = jac(er1.notable, q.cn1) - jac(t1.notable, q.cn1);
  f[24] = jac(er2.notable, q.cn2) - jac(t2.notable, q.cn2);
  f[25] = cos(er1.notable, q.cn1) - cos(t1.notable, q.cn1);
  f[26] = cos(er2.notable, q.cn2) - cos(t2.notable, q.cn2);
  return f;
}

}  // namespace

FeatureVector Featurizer::featurize(const RankingQuery& query, const MidPair& candidate, std::size_t c1_count) const {
  const QueryView q(query, predicates_, embeddings_);
  const EntityView er1(entities_.lookup(query.example_row.first), embeddings_);
  const EntityView er2(entities_.lookup(query.example_row.second), embeddings_);
  const EntityView t1(entities_.lookup(candidate.first), embeddings_);
  const EntityView t2(entities_.lookup(candidate.second), embeddings_);
  return compute(q, er1, er2, t1, t2, c1_count);
}

std::vector<FeatureVector> Featurizer::featurize_all(const RankingQuery& query,
                                                     const std::vector<MidPair>& candidates) const {
  const QueryView q(query, predicates_, embeddings_);
  std::unordered_map<std::string, EntityView> views;
  auto view = [&](const std::string& mid) -> const EntityView& {
    auto it = views.find(mid);
    if (it == views.end()) it = views.emplace(mid, EntityView(entities_.lookup(mid), embeddings_)).first;
    return it->second;
  };
  std::map<std::string, std::size_t> c1_counts;
  for (const auto& c : candidates) ++c1_counts[c.first];
  const EntityView er1 = view(query.example_row.first);
  const EntityView er2 = view(query.example_row.second);
  std::vector<FeatureVector> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    out.push_back(compute(q, er1, er2, view(c.first), view(c.second), c1_counts[c.first]));
  }
  return out;
}

void write_feature_csv(std::ostream& out, const std::vector<FeatureVector>& rows) {
  const auto& names = feature_names();
  for (std::size_t i = 0; i < kFeatureCount; ++i) out << (i ? "," : "") << names[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < kFeatureCount; ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  }
}

}  // namespace tablefill
