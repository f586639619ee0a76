#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "tablefill/chain_query.hpp"
#include "tablefill/eval.hpp"
#include "tablefill/selector.hpp"
#include "test_util.hpp"

using namespace tablefill;
using tablefill::testutil::TempDir;

namespace {

class RandomSelector final : public ChainSelector {
 public:
  explicit RandomSelector(std::uint64_t seed) : scorer_(seed) {}
  std::string name() const override { return "random"; }
  ChainPair select(const AnnotatedTable& table, std::span<const ChainPair> candidates) const override {
    ChainPair best = candidates.front();
    double top = -1;
    for (const auto& c : candidates) {
      ChainEncoding e{c, c.canonical(), {}, {}};
      QueryContext ctx;
      ctx.key = table.table_id;
      const double s = scorer_.score(ctx, e);
      if (s > top) {
        top = s;
        best = c;
      }
    }
    return best;
  }

 private:
  RandomScorer scorer_;
};

struct EvalWorld {
  TempDir dir{"eval"};
  testutil::World w = testutil::make_world(dir.path(), testutil::small_synthetic(40, 13));
  Featurizer featurizer{w.entities, w.predicates, w.embeddings};

  std::vector<const AnnotatedTable*> all() const {
    std::vector<const AnnotatedTable*> out;
    for (const auto& t : w.dataset.tables) out.push_back(&t);
    return out;
  }
};

EvalWorld& world() {
  static EvalWorld* w = new EvalWorld();
  return *w;
}

}  // namespace

TEST(TupleRecall, Values) {
  const std::vector<MidPair> ct{{"a", "1"}, {"b", "2"}, {"c", "3"}};
  const std::vector<MidPair> err{{"a", "1"}, {"d", "4"}};
  EXPECT_DOUBLE_EQ(tuple_recall(ct, err), 0.5);
  EXPECT_DOUBLE_EQ(tuple_recall(ct, std::vector<MidPair>{}), 0.0);
  EXPECT_DOUBLE_EQ(tuple_recall(TupleSet({{1, 2}, {3, 4}}), TupleSet({{3, 4}})), 1.0);
}

TEST(Percentiles, LinearInterpolation) {
  const auto p = summarize_values({4, 1, 3, 2});
  EXPECT_DOUBLE_EQ(p.p25, 1.75);
  EXPECT_DOUBLE_EQ(p.p50, 2.5);
  EXPECT_DOUBLE_EQ(p.p75, 3.25);
  EXPECT_DOUBLE_EQ(p.mean, 2.5);
  const auto one = summarize_values({7});
  EXPECT_EQ(one.p25, 7.0);
  EXPECT_EQ(one.p75, 7.0);
  const auto none = summarize_values({});
  EXPECT_EQ(none.mean, 0.0);
}

TEST(FilterCcEr, MatchesConnectivityOracle) {
  auto& ew = world();
  const auto& g = ew.w.graph;
  for (const auto& t : ew.w.dataset.tables) {
    const auto se = g.require_entity(t.se);
    for (const auto& er : t.rr) {
      const auto got = filter_cc_er(t, er, g);
      CandidateChainSet want;
      const auto x = g.find_entity(er.first);
      const auto y = g.find_entity(er.second);
      for (const auto& c : t.chains) {
        if (c.padded || !x || !y) continue;
        if (connects(g, se, *x, c.chain.p1) && connects(g, *x, *y, c.chain.p2)) want.push_back(c.chain);
      }
      sort_unique(want);
      std::vector<std::string> gs;
      std::vector<std::string> ws;
      for (const auto& c : got) gs.push_back(c.canonical());
      for (const auto& c : want) ws.push_back(c.canonical());
      EXPECT_EQ(gs, ws) << t.table_id;
    }
  }
}

TEST(E2e, RunAccountingAndOracleRecall) {
  auto& ew = world();
  const auto tables = ew.all();
  const OracleSelector oracle;
  const auto runs = run_e2e(tables, oracle, nullptr, ew.featurizer, ew.w.graph, E2eOptions{});
  std::size_t rows = 0;
  for (const auto* t : tables) rows += t->rr.size();
  ASSERT_EQ(runs.size(), rows);
  const auto s = summarize_runs(runs);
  EXPECT_EQ(s.executed + s.skipped_empty_cc + s.budget_exceeded + s.errors, rows);
  EXPECT_EQ(s.errors, 0u);
  EXPECT_GT(s.skipped_empty_cc, 0u);  // orphan rows
  for (const auto& r : runs) {
    if (r.status != RunStatus::kOk) {
      EXPECT_TRUE(r.cc_er.empty() || r.status != RunStatus::kSkippedEmptyCc);
      continue;
    }
    EXPECT_GE(r.tuple_recall, 0.0);
    EXPECT_LE(r.tuple_recall, 1.0);
    EXPECT_GE(r.ndcg, 0.0);
    EXPECT_LE(r.ndcg, 1.0 + 1e-12);
    ASSERT_TRUE(r.selected.has_value());
    // Independent recall: execute the chain and count table rows other than ER.
    const auto& t = ew.w.dataset.table(r.table_id);
    const auto ct = std::get<TupleSet>(
        execute_chain(ew.w.graph, ew.w.graph.require_entity(t.se), *r.selected, QueryBudget{}));
    std::size_t hits = 0;
    std::size_t err = 0;
    for (const auto& row : t.rr) {
      if (row == r.er) continue;
      ++err;
      const auto x = ew.w.graph.find_entity(row.first);
      const auto y = ew.w.graph.find_entity(row.second);
      hits += x && y && ct.contains({*x, *y});
    }
    EXPECT_NEAR(r.tuple_recall, err ? double(hits) / err : 0.0, 1e-12);
  }
}

TEST(E2e, ThreadAndOrderInvariance) {
  auto& ew = world();
  auto tables = ew.all();
  const OracleSelector oracle;
  const auto a = run_e2e(tables, oracle, nullptr, ew.featurizer, ew.w.graph, E2eOptions{});
  std::reverse(tables.begin(), tables.end());
  E2eOptions four;
  four.threads = 4;
  const auto b = run_e2e(tables, oracle, nullptr, ew.featurizer, ew.w.graph, four);
  std::multiset<std::string> ja;
  std::multiset<std::string> jb;
  for (const auto& r : a) ja.insert(query_run_to_json(r).dump());
  for (const auto& r : b) jb.insert(query_run_to_json(r).dump());
  EXPECT_EQ(ja, jb);
}

TEST(AccuracyAt1, OracleIsPerfectAndRandomMatchesExpectation) {
  auto& ew = world();
  const auto tables = ew.all();
  EXPECT_DOUBLE_EQ(accuracy_at_1(tables, OracleSelector{}), 1.0);
  double expected = 0;
  std::size_t n = 0;
  for (const auto* t : tables) {
    if (t->negative_count(false) == 0) continue;
    const double unpadded = double(t->chains.size() - (t->negative_count() - t->negative_count(false)));
    expected += double(t->positive_count()) / unpadded;
    ++n;
  }
  expected /= double(n);
  double sum = 0;
  const int trials = 300;
  for (int s = 0; s < trials; ++s) sum += accuracy_at_1(tables, RandomSelector(s));
  EXPECT_NEAR(sum / trials, expected, 0.03);
}

TEST(CoreColumn, PrefixDominatesFull) {
  auto& ew = world();
  const auto tables = ew.all();
  const auto runs = run_e2e(tables, OracleSelector{}, nullptr, ew.featurizer, ew.w.graph, E2eOptions{});
  const auto p1 = core_column_eval(runs, tables, ew.w.graph, CoreColumnMode::kPrefix, QueryBudget{});
  const auto full = core_column_eval(runs, tables, ew.w.graph, CoreColumnMode::kFull, QueryBudget{});
  ASSERT_EQ(p1.size(), full.size());
  ASSERT_FALSE(p1.empty());
  for (std::size_t i = 0; i < p1.size(); ++i) {
    EXPECT_EQ(p1[i].table_id, full[i].table_id);
    EXPECT_GE(p1[i].c1_recall + 1e-12, full[i].c1_recall);
    EXPECT_LE(p1[i].c1_recall, 1.0);
  }
}

TEST(RankingGroups, RelevanceIsTableMembership) {
  auto& ew = world();
  const auto tables = ew.all();
  const auto groups = build_ranking_groups(tables, ew.w.graph, ew.featurizer, QueryBudget{});
  ASSERT_FALSE(groups.empty());
  std::size_t relevant = 0;
  std::size_t irrelevant = 0;
  for (const auto& g : groups) {
    const auto& t = ew.w.dataset.table(g.key);
    const std::set<MidPair> rows(t.rr.begin(), t.rr.end());
    ASSERT_EQ(g.candidates.size(), g.features.size());
    for (std::size_t i = 0; i < g.candidates.size(); ++i) {
      EXPECT_EQ(g.relevance[i], rows.count(g.candidates[i]) ? 1 : 0);
      (g.relevance[i] ? relevant : irrelevant)++;
    }
  }
  EXPECT_GT(relevant, 0u);
  EXPECT_GT(irrelevant, 0u);
}

TEST(EvalOutputs, FilesWritten) {
  auto& ew = world();
  const auto tables = ew.all();
  const auto runs = run_e2e(tables, OracleSelector{}, nullptr, ew.featurizer, ew.w.graph, E2eOptions{});
  TempDir out("eval_out");
  write_eval_outputs(runs, summarize_runs(runs), out.path());
  std::ifstream csv(out / "metrics.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "metric,p25,p50,mean,p75");
  std::ifstream jl(out / "runs.jsonl");
  std::size_t lines = 0;
  for (std::string line; std::getline(jl, line);) ++lines;
  EXPECT_EQ(lines, runs.size());
  EXPECT_TRUE(std::filesystem::exists(out / "summary.json"));
}
