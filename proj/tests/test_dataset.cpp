#include <gtest/gtest.h>

#include <set>

#include "tablefill/dataset.hpp"
#include "tablefill/error.hpp"
#include "test_util.hpp"

using namespace tablefill;
using tablefill::testutil::TempDir;

namespace {

Cell linked(const std::string& text, const std::string& url) { return Cell{text, {url}}; }

LabeledChain lc(const std::string& chain, double recall, double f1) {
  LabeledChain c;
  c.chain = ChainPair::parse(chain);
  c.recall = recall;
  c.f1 = f1;
  return c;
}

}  // namespace

TEST(LinkCells, UsesFirstUrlAndDropsPartialRows) {
  RawTable raw;
  raw.rows = {{linked("A", "u/a"), linked("B", "u/b")},
              {Cell{"C", {"u/none", "u/c"}}, linked("D", "u/d")},
              {linked("E", "u/e"), Cell{"plain", {}}},
              {linked("F", "u/f")},
              {linked("G", "u/g"), linked("H", "u/h"), linked("I", "u/i")}};
  const UrlToMid map{{"u/a", "m.a"}, {"u/b", "m.b"}, {"u/c", "m.c"}, {"u/d", "m.d"},
                     {"u/e", "m.e"}, {"u/f", "m.f"}, {"u/g", "m.g"}, {"u/h", "m.h"}};
  const std::vector<MidPair> want{{"m.a", "m.b"}, {"m.g", "m.h"}};
  EXPECT_EQ(link_cells(raw, map), want);
}

TEST(BuildQis, RemovesEntityNameAndMapsNumbers) {
  EXPECT_EQ(build_qis("Friends cast", "season 10 episodes", "friends"),
            (TokenList{"cast", "season", "numtkn", "episodes"}));
  EXPECT_EQ(build_qis("Friends", "", "Friends"), (TokenList{"emptstr"}));
  // Only the first occurrence goes.
  EXPECT_EQ(build_qis("Lost and Lost", "", "lost"), (TokenList{"and", "lost"}));
}

TEST(NormalizeHeader, SingularizesLongTokens) {
  EXPECT_EQ(normalize_header("Actors"), (TokenList{"actor"}));
  EXPECT_EQ(normalize_header("Roles played"), (TokenList{"role", "played"}));
  EXPECT_EQ(normalize_header("bus"), (TokenList{"bus"}));
  EXPECT_EQ(normalize_header("Classes"), (TokenList{"class"}));
  EXPECT_EQ(normalize_header("Status"), (TokenList{"status"}));
  EXPECT_THROW(normalize_column_names({"only"}), TableRejected);
  try {
    normalize_column_names({"!!", "b"});
    FAIL();
  } catch (const TableRejected& r) {
    EXPECT_EQ(r.reason(), "empty_column_name");
  }
}

TEST(BuildSet, PicksRarestSpecificType) {
  const std::map<std::string, std::size_t> freq{{"tv.tv_program", 5}, {"award.winning_work", 2}, {"common.topic", 1}};
  const FineTypeMap fine{{"award.winning_work", "f.work"}};
  EXPECT_EQ(build_set({"tv.tv_program", "award.winning_work", "common.topic"}, freq, fine),
            (TokenList{"award", "winning", "work", "f", "work"}));
  // Tie on frequency goes to the lexicographically smaller type.
  const std::map<std::string, std::size_t> tie{{"b.x", 1}, {"a.y", 1}};
  EXPECT_EQ(build_set({"b.x", "a.y"}, tie, {}), (TokenList{"a", "y"}));
  EXPECT_THROW(build_set({"base.a", "type.object"}, freq, fine), TableRejected);
  EXPECT_TRUE(is_generic_type("common.topic"));
  EXPECT_FALSE(is_generic_type("commons.topic"));
}

TEST(ChainMetrics, MatchDefinitions) {
  const auto m = chain_metrics_from_counts(3, 6, 4);
  EXPECT_DOUBLE_EQ(m.recall, 0.75);
  EXPECT_DOUBLE_EQ(m.precision, 0.5);
  EXPECT_DOUBLE_EQ(m.f1, 2 * 0.75 * 0.5 / 1.25);
  EXPECT_EQ(chain_metrics_from_counts(0, 0, 0).f1, 0.0);
  for (std::size_t h = 0; h <= 5; ++h) {
    for (std::size_t r = h; r <= 8; ++r) {
      for (std::size_t t = std::max<std::size_t>(h, 1); t <= 8; ++t) {
        const auto x = chain_metrics_from_counts(h, r, t);
        const double p = r == 0 ? 0 : double(h) / r;
        const double rc = double(h) / t;
        const double f = p + rc == 0 ? 0 : 2 * p * rc / (p + rc);
        EXPECT_NEAR(x.f1, f, 1e-12);
        EXPECT_GE(x.recall, 0.0);
        EXPECT_LE(x.recall, 1.0);
      }
    }
  }
}

TEST(AnnotateChains, OrdersAndLabelsTies) {
  const auto out = annotate_chains({lc("a/b~c", 1.0, 0.5), lc("a~c", 0.5, 0.9), lc("z~c", 1.0, 0.5),
                                    lc("y~c", 1.0, 0.5), lc("x~c", 1.0, 0.4)});
  std::vector<std::string> order;
  for (const auto& c : out) order.push_back(c.chain.canonical());
  EXPECT_EQ(order, (std::vector<std::string>{"y~c", "z~c", "x~c", "a/b~c", "a~c"}));
  EXPECT_EQ(out[0].label, ChainLabel::kPositive);
  EXPECT_EQ(out[1].label, ChainLabel::kPositive);
  for (std::size_t i = 2; i < out.size(); ++i) EXPECT_EQ(out[i].label, ChainLabel::kNegative);
  EXPECT_THROW(annotate_chains({}), TableRejected);
}

TEST(SplitDataset, PartitionsDeterministically) {
  std::vector<std::string> ids;
  for (int i = 0; i < 200; ++i) ids.push_back("t" + std::to_string(i));
  const auto a = split_dataset(ids, 5);
  const auto b = split_dataset(std::vector<std::string>(ids.rbegin(), ids.rend()), 5);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.train.size(), 160u);
  EXPECT_EQ(a.validation.size(), 20u);
  EXPECT_EQ(a.test.size(), 20u);
  std::set<std::string> all(a.train.begin(), a.train.end());
  all.insert(a.validation.begin(), a.validation.end());
  all.insert(a.test.begin(), a.test.end());
  EXPECT_EQ(all.size(), 200u);
  EXPECT_NE(split_dataset(ids, 6).test, a.test);
}

TEST(BuildVocab, CountsTrainAndValidationOnly) {
  AnnotatedTable t1;
  t1.table_id = "a";
  t1.qis = {"cast", "cast"};
  t1.cn1 = {"actor"};
  t1.cn2 = {"role"};
  t1.set_tokens = {"tv"};
  t1.chains = {lc("tv.x~tv.y", 1, 1)};
  AnnotatedTable t2 = t1;
  t2.table_id = "b";
  t2.qis = {"secret", "secret"};
  DatasetSplit split;
  split.train = {"a"};
  split.test = {"b"};
  const auto [tb, kb] = build_vocab({t1, t2}, split);
  EXPECT_EQ(tb.token(0), "<oov>");
  EXPECT_TRUE(tb.contains("cast"));
  EXPECT_FALSE(tb.contains("secret"));
  EXPECT_FALSE(tb.contains("actor"));  // count 1
  EXPECT_TRUE(kb.contains("tv"));      // set once + chain twice
  EXPECT_FALSE(kb.contains("x"));
}

TEST(PadNegatives, FillsTrainingTablesFromOtherTables) {
  std::vector<AnnotatedTable> tables(3);
  for (std::size_t i = 0; i < 3; ++i) {
    tables[i].table_id = "t" + std::to_string(i);
    auto pos = lc("p" + std::to_string(i) + "~q", 1, 1);
    pos.label = ChainLabel::kPositive;
    tables[i].chains.push_back(pos);
    tables[i].chains.push_back(lc("n" + std::to_string(i) + "~q", 0.5, 0.5));
  }
  DatasetSplit split;
  split.train = {"t0", "t1"};
  split.test = {"t2"};
  auto padded = tables;
  pad_negatives(padded, split, 4, 1);
  EXPECT_EQ(padded[2].chains.size(), 2u);
  // Pool is {n0, n1}; t0 can only draw n1.
  EXPECT_EQ(padded[0].negative_count(), 2u);
  EXPECT_EQ(padded[0].negative_count(false), 1u);
  EXPECT_EQ(padded[0].chains.back().chain.canonical(), "n1~q");
  EXPECT_TRUE(padded[0].chains.back().padded);
  auto again = tables;
  pad_negatives(again, split, 4, 1);
  EXPECT_EQ(annotated_table_to_json_line(again[0]), annotated_table_to_json_line(padded[0]));
  EXPECT_THROW(pad_negatives(tables, split, 0, 1), ConfigError);
}

TEST(BuildDataset, SyntheticCorpusInvariants) {
  TempDir dir("dataset");
  auto w = tablefill::testutil::make_world(dir.path(), tablefill::testutil::small_synthetic(40, 11));
  const auto& ds = w.dataset;
  EXPECT_EQ(ds.report.input_tables, 44u);
  EXPECT_EQ(ds.report.accepted_tables, 40u);
  EXPECT_EQ(ds.report.rejected.at("core_column_not_unique"), 1u);
  EXPECT_EQ(ds.report.rejected.at("too_few_linked_rows"), 1u);
  EXPECT_EQ(ds.report.rejected.at("entity_name_mismatch"), 1u);
  std::size_t total = 0;
  for (const auto& [k, v] : ds.report.rejected) total += v;
  EXPECT_EQ(total, 4u);

  const std::set<std::string> train(ds.split.train.begin(), ds.split.train.end());
  for (const auto& t : ds.tables) {
    EXPECT_GE(t.rr.size(), 3u);
    std::set<std::string> core;
    for (const auto& row : t.rr) EXPECT_TRUE(core.insert(row.first).second);
    ASSERT_GE(t.positive_count(), 1u);
    if (train.count(t.table_id)) {
      EXPECT_GE(t.negative_count(), 9u);
    }
    // Every unpadded chain reproduces its stored metrics and has >= 2 hits.
    const auto se = w.graph.require_entity(t.se);
    const auto rr = ground_truth_ids(t, w.graph);
    for (const auto& c : t.chains) {
      if (c.padded) continue;
      const auto ct = std::get<TupleSet>(execute_chain(w.graph, se, c.chain, QueryBudget{}));
      std::size_t hits = 0;
      for (const auto& row : rr) hits += ct.contains(row);
      EXPECT_GE(hits, 2u);
      EXPECT_DOUBLE_EQ(c.recall, double(hits) / t.rr.size());
      EXPECT_DOUBLE_EQ(c.f1, 2.0 * hits / double(ct.size() + t.rr.size()));
      EXPECT_LE(c.chain.total_length(), 6u);
    }
    // Annotation order.
    for (std::size_t i = 1; i < t.chains.size(); ++i) {
      const auto& a = t.chains[i - 1];
      const auto& b = t.chains[i];
      if (a.padded || b.padded) continue;
      EXPECT_GE(a.recall, b.recall);
    }
  }
}

TEST(BuildDataset, DeterministicAcrossThreadCounts) {
  TempDir dir("dataset_threads");
  BuildOptions one;
  BuildOptions four;
  four.threads = 4;
  auto a = tablefill::testutil::make_world(dir.path(), tablefill::testutil::small_synthetic(20, 3), one);
  auto b = tablefill::testutil::load_world(dir.path(), four);
  ASSERT_EQ(a.dataset.tables.size(), b.dataset.tables.size());
  for (std::size_t i = 0; i < a.dataset.tables.size(); ++i) {
    EXPECT_EQ(annotated_table_to_json_line(a.dataset.tables[i]), annotated_table_to_json_line(b.dataset.tables[i]));
  }
  EXPECT_EQ(a.dataset.tb_vocab.fingerprint(), b.dataset.tb_vocab.fingerprint());
}

TEST(Dataset, WriteReadRoundTrip) {
  TempDir dir("dataset_rt");
  auto w = tablefill::testutil::make_world(dir.path(), tablefill::testutil::small_synthetic(20, 5));
  const auto out = dir / "ds";
  write_dataset(w.dataset, out);
  const auto back = read_dataset(out);
  ASSERT_EQ(back.tables.size(), w.dataset.tables.size());
  for (std::size_t i = 0; i < back.tables.size(); ++i) {
    EXPECT_EQ(annotated_table_to_json_line(back.tables[i]), annotated_table_to_json_line(w.dataset.tables[i]));
  }
  EXPECT_EQ(back.split.train, w.dataset.split.train);
  EXPECT_EQ(back.split.test, w.dataset.split.test);
  EXPECT_EQ(back.tb_vocab.fingerprint(), w.dataset.tb_vocab.fingerprint());
  EXPECT_EQ(back.kb_vocab.fingerprint(), w.dataset.kb_vocab.fingerprint());
  EXPECT_EQ(back.report.rejected, w.dataset.report.rejected);
}

TEST(LoadCorpus, RejectsMalformedLines) {
  std::istringstream bad("{\"table_id\": \"a\"}\nnot json\n");
  EXPECT_THROW(load_corpus(bad), ParseError);
}
