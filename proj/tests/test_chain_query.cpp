#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "tablefill/chain_query.hpp"
#include "tablefill/error.hpp"
#include "tablefill/path_search.hpp"
#include "test_util.hpp"

using namespace tablefill;
using tablefill::testutil::naive_chain;
using tablefill::testutil::random_triples;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kGolden = std::string(TABLEFILL_TEST_DATA) + "/golden/";

}  // namespace

TEST(ExecuteChain, MatchesNaiveJoin) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto triples = random_triples(seed + 500, 8, 20, 3);
    const auto g = KnowledgeGraph::from_triples(triples);
    PathSearchOptions o;
    o.degree_cap = kUnlimitedDegree;
    o.banned_prefixes = {};
    o.max_len = 2;
    std::vector<MetaPath> paths;
    for (EntityId s = 0; s < g.entity_count(); ++s) {
      for (EntityId d = 0; d < g.entity_count(); ++d) {
        if (s != d) {
          for (auto& p : enumerate_simple_paths(g, s, d, o)) paths.push_back(std::move(p));
        }
      }
    }
    sort_unique(paths);
    for (EntityId se = 0; se < g.entity_count(); se += 3) {
      for (std::size_t i = 0; i < paths.size(); i += 2) {
        for (std::size_t j = 0; j < paths.size(); j += 3) {
          const ChainPair chain{paths[i], paths[j]};
          auto r = execute_chain(g, se, chain, QueryBudget{});
          ASSERT_TRUE(std::holds_alternative<TupleSet>(r));
          std::set<std::pair<std::string, std::string>> got;
          for (const auto& [x, y] : std::get<TupleSet>(r)) got.emplace(g.entity_key(x), g.entity_key(y));
          EXPECT_EQ(got, naive_chain(triples, g.entity_key(se), chain)) << chain.canonical();
        }
      }
    }
  }
}

TEST(ExecuteChain, PrefixContainsProjection) {
  const auto triples = random_triples(77, 9, 25, 3);
  const auto g = KnowledgeGraph::from_triples(triples);
  const auto chain = ChainPair::parse("p0/^p1~p2");
  for (EntityId se = 0; se < g.entity_count(); ++se) {
    const auto xs = std::get<EntitySet>(execute_prefix(g, se, chain.p1, QueryBudget{}));
    const auto ts = std::get<TupleSet>(execute_chain(g, se, chain, QueryBudget{}));
    for (EntityId x : ts.project_first()) EXPECT_TRUE(std::binary_search(xs.begin(), xs.end(), x));
  }
}

TEST(ExecuteChain, BudgetsDiscardPartialResults) {
  std::vector<Triple> triples;
  for (int i = 0; i < 20; ++i) {
    triples.push_back({"s", "p", "x" + std::to_string(i)});
    triples.push_back({"x" + std::to_string(i), "q", "y" + std::to_string(i)});
  }
  const auto g = KnowledgeGraph::from_triples(triples);
  const auto se = g.require_entity("s");
  const auto chain = ChainPair::parse("p~q");
  EXPECT_EQ(std::get<TupleSet>(execute_chain(g, se, chain, QueryBudget{20, 100})).size(), 20u);
  EXPECT_TRUE(std::holds_alternative<BudgetExceeded>(execute_chain(g, se, chain, QueryBudget{19, 100})));
  EXPECT_TRUE(std::holds_alternative<BudgetExceeded>(execute_chain(g, se, chain, QueryBudget{100, 10})));
  EXPECT_THROW(execute_chain(g, se, chain, QueryBudget{0, 10}), InvalidInputError);
  EXPECT_THROW(execute_chain(g, 999, chain, QueryBudget{}), NotFoundError);
}

TEST(ExecuteChain, UnknownPredicateGivesEmptyResult) {
  const auto g = KnowledgeGraph::from_triples(std::vector<Triple>{{"s", "p", "x"}, {"x", "q", "y"}});
  EXPECT_TRUE(std::get<TupleSet>(execute_chain(g, 0, ChainPair::parse("nope~q"), QueryBudget{})).empty());
}

TEST(Connects, FollowsInverseHops) {
  const auto g = KnowledgeGraph::from_triples(std::vector<Triple>{{"a", "p", "b"}, {"c", "p", "b"}});
  const auto a = g.require_entity("a");
  const auto c = g.require_entity("c");
  EXPECT_TRUE(connects(g, a, c, MetaPath::parse("p/^p")));
  EXPECT_FALSE(connects(g, a, c, MetaPath::parse("p/p")));
  EXPECT_TRUE(has_successor(g, a, MetaPath::parse("p")));
  EXPECT_FALSE(has_successor(g, a, MetaPath::parse("^p")));
}

TEST(RenderSparql, GoldenPlain) {
  EXPECT_EQ(render_sparql("m.friends", ChainPair::parse("tv.tv_program.regular_cast~tv.regular_tv_appearance.character")),
            slurp(kGolden + "plain.sparql"));
}

TEST(RenderSparql, GoldenMultiHop) {
  EXPECT_EQ(render_sparql("m.friends", ChainPair::parse("tv.tv_program.regular_cast/tv.regular_tv_appearance.actor~"
                                                         "tv.tv_actor.starring_roles/tv.regular_tv_appearance.character")),
            slurp(kGolden + "multi_hop.sparql"));
}

TEST(RenderSparql, GoldenInverse) {
  EXPECT_EQ(render_sparql("m.friends", ChainPair::parse("^tv.regular_tv_appearance.series/^tv.tv_actor.starring_roles~"
                                                         "tv.tv_actor.starring_roles/tv.regular_tv_appearance.character")),
            slurp(kGolden + "inverse.sparql"));
}
