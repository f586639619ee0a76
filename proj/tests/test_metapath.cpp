#include <gtest/gtest.h>

#include "tablefill/error.hpp"
#include "tablefill/metapath.hpp"

using namespace tablefill;

TEST(MetaPath, RoundTripsCanonicalForm) {
  const std::string text = "tv.tv_program.regular_cast/^tv.tv_actor.starring_roles";
  const auto p = MetaPath::parse(text);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_FALSE(p.front().inverse());
  EXPECT_TRUE(p.back().inverse());
  EXPECT_EQ(p.back().name(), "tv.tv_actor.starring_roles");
  EXPECT_EQ(p.canonical(), text);
}

TEST(MetaPath, RejectsBadLengthsAndNames) {
  EXPECT_THROW(MetaPath::parse("a/b/c/d"), InvalidInputError);
  EXPECT_THROW(MetaPath(std::vector<PredicateToken>{}), InvalidInputError);
  EXPECT_THROW(PredicateToken("", false), InvalidInputError);
  EXPECT_THROW(PredicateToken("a~b", false), InvalidInputError);
  EXPECT_THROW(PredicateToken::parse("^^x"), InvalidInputError);
}

TEST(ChainPair, ParseAndCanonical) {
  const auto c = ChainPair::parse("a/^b~c");
  EXPECT_EQ(c.p1.canonical(), "a/^b");
  EXPECT_EQ(c.p2.canonical(), "c");
  EXPECT_EQ(c.total_length(), 3u);
  EXPECT_EQ(c.canonical(), "a/^b~c");
  EXPECT_THROW(ChainPair::parse("a/b"), ParseError);
}

TEST(SortUnique, OrdersByCanonicalString) {
  CandidateChainSet chains{ChainPair::parse("b~a"), ChainPair::parse("a~b"), ChainPair::parse("b~a")};
  sort_unique(chains);
  ASSERT_EQ(chains.size(), 2u);
  EXPECT_EQ(chains[0].canonical(), "a~b");
  EXPECT_EQ(chains[1].canonical(), "b~a");
}

TEST(PredicateToken, InvertedFlipsDirection) {
  const PredicateToken t("x.y", false);
  EXPECT_EQ(t.inverted().render(), "^x.y");
  EXPECT_EQ(t.inverted().inverted(), t);
}
