#include <gtest/gtest.h>

#include <cmath>

#include "tablefill/embedding_scorer.hpp"
#include "tablefill/error.hpp"
#include "test_util.hpp"

using namespace tablefill;
using tablefill::testutil::TempDir;

namespace {

Vocabulary vocab(VocabKind kind, const std::vector<std::string>& tokens) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : tokens) counts[t] = 2;
  return Vocabulary::build(kind, counts);
}

EmbeddingDims small_dims() {
  EmbeddingDims d;
  d.input_dim = 4;
  d.qis = 3;
  d.cn = 2;
  d.set = 3;
  d.chain = 10;
  return d;
}

struct Fixture {
  Vocabulary tb = vocab(VocabKind::kTable, {"cast", "actor", "role", "show"});
  Vocabulary kb = vocab(VocabKind::kKnowledgeBase, {"tv", "program", "cast", "appearance", "character", "film"});
  QueryEncoder enc{tb, kb};
  QueryContext ctx = enc.context("q", {"show", "cast", "unknown"}, {"actor"}, {"role", "role"}, {"tv", "program"});
  ChainEncoding pos = enc.chain(ChainPair::parse("tv.program.cast~tv.appearance.character"));
  ChainEncoding neg = enc.chain(ChainPair::parse("film.cast~film.character"));
};

}  // namespace

TEST(EmbeddingDims, Validate) {
  EXPECT_NO_THROW(EmbeddingDims{}.validate());
  auto d = small_dims();
  d.chain = 11;
  EXPECT_THROW(d.validate(), ConfigError);
  d = small_dims();
  d.input_dim = 0;
  EXPECT_THROW(d.validate(), ConfigError);
}

TEST(EmbeddingScorer, GradientMatchesFiniteDifferences) {
  Fixture f;
  EmbeddingScorer model(f.tb, f.kb, small_dims(), 1.5);
  model.initialize(3, 0.5);
  ASSERT_GT(model.triple_loss(f.ctx, f.pos, f.neg), 0.0);
  const auto grad = model.triple_gradient(f.ctx, f.pos, f.neg);
  auto params = model.parameters();
  ASSERT_EQ(grad.size(), params.size());
  const double h = 1e-6;
  std::size_t checked = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (model.is_frozen(i)) {
      EXPECT_EQ(grad[i], 0.0);
      continue;
    }
    const double saved = params[i];
    params[i] = saved + h;
    const double up = model.triple_loss(f.ctx, f.pos, f.neg);
    params[i] = saved - h;
    const double down = model.triple_loss(f.ctx, f.pos, f.neg);
    params[i] = saved;
    const double numeric = (up - down) / (2 * h);
    EXPECT_NEAR(grad[i], numeric, 1e-4 * std::max(1.0, std::abs(numeric))) << "param " << i;
    ++checked;
  }
  EXPECT_GT(checked, 100u);
}

TEST(EmbeddingScorer, ScoreIsCosineAndOovStaysZero) {
  Fixture f;
  EmbeddingScorer model(f.tb, f.kb, small_dims(), 0.25);
  model.initialize(1, 0.3);
  const double s = model.score(f.ctx, f.pos);
  EXPECT_GE(s, -1.0);
  EXPECT_LE(s, 1.0);
  const auto q = model.query_vector(f.ctx);
  const auto c = model.chain_vector(f.pos);
  double dot = 0, nq = 0, nc = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    dot += q[i] * c[i];
    nq += q[i] * q[i];
    nc += c[i] * c[i];
  }
  EXPECT_NEAR(s, dot / std::sqrt(nq * nc), 1e-9);
  for (auto b : {EmbeddingScorer::kQisEmbedding, EmbeddingScorer::kCnEmbedding, EmbeddingScorer::kKbEmbedding}) {
    const auto off = model.block_offset(b);
    for (std::size_t k = 0; k < 4; ++k) {
      EXPECT_EQ(model.parameters()[off + k], 0.0);
      EXPECT_TRUE(model.is_frozen(off + k));
    }
  }
}

TEST(EmbeddingScorer, JsonRoundTrip) {
  Fixture f;
  EmbeddingScorer model(f.tb, f.kb, small_dims(), 0.25);
  model.initialize(8, 0.2);
  const auto back = EmbeddingScorer::from_json(model.to_json(), f.tb, f.kb);
  EXPECT_DOUBLE_EQ(back.score(f.ctx, f.neg), model.score(f.ctx, f.neg));
  EXPECT_THROW(EmbeddingScorer::from_json(model.to_json(), f.kb, f.kb), ConfigError);
}

TEST(TrainEmbedding, DeterministicAndLearns) {
  TempDir dir("embedding");
  auto w = tablefill::testutil::make_world(dir.path(), tablefill::testutil::small_synthetic(30, 4));
  const auto& ds = w.dataset;
  const QueryEncoder enc(ds.tb_vocab, ds.kb_vocab);
  const auto train = ds.tables_in(ds.split.train);
  EmbeddingConfig cfg;
  cfg.dims = small_dims();
  cfg.dims.input_dim = 8;
  cfg.optimizer = OptimizerKind::kAdam;
  cfg.learning_rate = 0.01;
  cfg.epochs = 40;
  cfg.batch_size = 32;
  TrainReport r1;
  TrainReport r2;
  const auto a = train_embedding(train, enc, cfg, &r1);
  const auto b = train_embedding(train, enc, cfg, &r2);
  EXPECT_EQ(r1.loss_history, r2.loss_history);
  ASSERT_EQ(r1.loss_history.size(), 40u);
  EXPECT_LT(r1.loss_history.back(), 0.5 * r1.loss_history.front());
  const auto pa = a.parameters();
  const auto pb = b.parameters();
  EXPECT_TRUE(std::equal(pa.begin(), pa.end(), pb.begin(), pb.end()));
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (a.is_frozen(i)) {
      EXPECT_EQ(pa[i], 0.0);
    }
  }
  EXPECT_THROW(train_embedding(std::span<const AnnotatedTable* const>{}, enc, cfg), ConfigError);
}
