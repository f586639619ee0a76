#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "tablefill/features.hpp"
#include "feature_fixture.hpp"
#include "test_util.hpp"

using namespace tablefill;


TEST(Features, NamesAreFrozen) {
  const auto& n = feature_names();
  EXPECT_EQ(n.size(), 27u);
  EXPECT_EQ(n[0], "c1_frequency");
  EXPECT_EQ(n[10], "notable_type_jaccard_c2");
  EXPECT_EQ(n[26], "colname_type_cosine_diff_c2");
  std::set<std::string_view> unique(n.begin(), n.end());
  EXPECT_EQ(unique.size(), 27u);
}

TEST(Features, ChainSegmentTypes) {
  testutil::FeatureFixture f;
  EXPECT_EQ(segment_target_type(f.query.chain.p1, f.predicates), (TokenSet{"actor", "tv"}));
  EXPECT_EQ(segment_source_type(f.query.chain.p2, f.predicates), (TokenSet{"actor", "tv"}));
  EXPECT_EQ(segment_target_type(f.query.chain.p2, f.predicates), (TokenSet{"character", "tv"}));
  // An inverse hop's target is its predicate's source type.
  EXPECT_EQ(segment_target_type(MetaPath::parse("^tv.tv_actor.starring_roles"), f.predicates),
            (TokenSet{"actor", "tv"}));
}

TEST(Features, GoldenFixture) {
  testutil::FeatureFixture f;
  const Featurizer fz(f.entities, f.predicates, f.embeddings);
  const auto cands = testutil::FeatureFixture::candidates();
  const auto all = fz.featurize_all(f.query, cands);
  const auto want = testutil::FeatureFixture::expected_first();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    EXPECT_NEAR(all[0][i], want[i], 1e-9) << feature_names()[i];
  }

  // Second candidate: m.b2 has no record at all.
  const auto& b = all[1];
  EXPECT_EQ(b[0], 1.0);
  EXPECT_NEAR(b[1], 1.0 / 4, 1e-12);  // {american, actor} vs {film, actor, director}
  EXPECT_EQ(b[2], 0.0);
  EXPECT_EQ(b[4], 0.0);
  EXPECT_EQ(b[9], 0.0);                // {tv, actor} vs {film, director}
  EXPECT_NEAR(b[17], 1.0, 1e-12);      // 1 - 0
  EXPECT_NEAR(b[19], 1.0, 1e-12);      // {tv, character} vs {}
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const std::size_t c1 = cands[i].first == "m.a1" ? 2 : 1;
    const auto one = fz.featurize(f.query, cands[i], c1);
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      EXPECT_DOUBLE_EQ(one[k], all[i][k]);
    }
  }
}

TEST(Features, ValueRangesOnSyntheticData) {
  tablefill::testutil::TempDir dir("features");
  auto w = tablefill::testutil::make_world(dir.path(), tablefill::testutil::small_synthetic(15, 2));
  const Featurizer fz(w.entities, w.predicates, w.embeddings);
  for (const auto& t : w.dataset.tables) {
    RankingQuery q{t.qis, t.cn1, t.cn2, t.first_positive().chain, t.rr.front()};
    const auto rows = fz.featurize_all(q, t.rr);
    for (const auto& r : rows) {
      EXPECT_GE(r[0], 1.0);
      for (std::size_t k : {1, 2, 5, 6, 9, 10, 13, 14}) {
        EXPECT_GE(r[k], 0.0);
        EXPECT_LE(r[k], 1.0);
      }
      for (std::size_t k : {3, 4, 7, 8, 11, 12, 15, 16}) {
        EXPECT_GE(r[k], -1.0 - 1e-12);
        EXPECT_LE(r[k], 1.0 + 1e-12);
      }
      for (std::size_t k = 17; k < kFeatureCount; ++k) {
        EXPECT_GE(r[k], -2.0 - 1e-12);
        EXPECT_LE(r[k], 2.0 + 1e-12);
        EXPECT_TRUE(std::isfinite(r[k]));
      }
    }
  }
}

TEST(Features, CsvHeader) {
  std::ostringstream out;
  write_feature_csv(out, {FeatureVector{}});
  const auto text = out.str();
  EXPECT_EQ(text.substr(0, text.find(',')), "c1_frequency");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}
