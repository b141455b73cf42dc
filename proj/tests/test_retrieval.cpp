#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "checks.hpp"
#include "faqforge/error.hpp"
#include "faqforge/retrieval.hpp"
#include "faqforge/translated_faq.hpp"

using namespace faqforge;

namespace {

using Tokens = std::vector<std::string>;

EmbeddingTable plane() {
  EmbeddingTable t(2);
  t.insert("x", {1, 0});
  t.insert("y", {0, 3});  // unit-normalized before use
  t.insert("z", {-1, 0});
  t.insert("xy", {1, 1});
  return t;
}

TranslatedTuple tuple(std::size_t id, Tokens keywords) {
  return {id, "q" + std::to_string(id), std::move(keywords), "a" + std::to_string(id)};
}

Query query_with(Tokens keywords) {
  Query q;
  q.predicted_keywords = std::move(keywords);
  return q;
}

} // namespace

TEST(Levenshtein, Examples) {
  EXPECT_EQ(token_levenshtein(Tokens{"dropbox", "security"}, Tokens{"dropbox", "threat"}), 1u);
  EXPECT_EQ(token_levenshtein(Tokens{}, Tokens{"a", "b"}), 2u);
  EXPECT_EQ(token_levenshtein(Tokens{"a", "b", "c"}, Tokens{"b", "c", "a"}), 2u);
}

TEST(Levenshtein, MatchesEditEnumerationOracle) {
  const auto r = checks::levenshtein_matches_oracle();
  EXPECT_TRUE(r.pass) << r.detail;
}

TEST(Transport, SmallKnownPlan) {
  Eigen::MatrixXd cost(2, 2);
  cost << 0, 5, 5, 1;
  const std::vector<std::int64_t> supply = {3, 1}, demand = {2, 2};
  // Ship 2 along (0,0), 1 along (0,1) and 1 along (1,1): 0 + 5 + 1.
  EXPECT_DOUBLE_EQ(exact_transport(cost, supply, demand), 6.0);
}

TEST(Wmd, Examples) {
  const auto t = plane();
  EXPECT_DOUBLE_EQ(wmd(Tokens{"x"}, Tokens{"x"}, t), 0.0);
  EXPECT_NEAR(wmd(Tokens{"x"}, Tokens{"y"}, t), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(wmd(Tokens{"x"}, Tokens{"z"}, t), 2.0, 1e-12);
  // Half the mass stays, half moves a quarter turn.
  EXPECT_NEAR(wmd(Tokens{"x", "y"}, Tokens{"x"}, t), std::sqrt(2.0) / 2, 1e-12);
  EXPECT_NEAR(wmd(Tokens{"x", "x", "y"}, Tokens{"x", "y"}, t), std::sqrt(2.0) / 6, 1e-12);
}

TEST(Wmd, IsSymmetricAndSkipsUnknownTokens) {
  const auto t = plane();
  EXPECT_NEAR(wmd(Tokens{"x", "xy"}, Tokens{"y", "z", "z"}, t),
              wmd(Tokens{"y", "z", "z"}, Tokens{"x", "xy"}, t), 1e-12);
  EXPECT_DOUBLE_EQ(wmd(Tokens{"x", "unknown"}, Tokens{"x"}, t), 0.0);
  try {
    wmd(Tokens{"unknown"}, Tokens{"x"}, t);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyBag);
  }
}

TEST(Wmd, MatchesVertexEnumerationOracle) {
  const auto r = checks::wmd_matches_oracle(99, 300);
  EXPECT_TRUE(r.pass) << r.detail;
}

TEST(CombinedDistance, HandComputedValue) {
  // Orthogonal unit vectors: wmd = sqrt 2, one substitution over length 1.
  EXPECT_NEAR(combined_distance(Tokens{"x"}, Tokens{"y"}, plane()),
              0.5 * (std::sqrt(2.0) / 2) + 0.5, 1e-12);
  EXPECT_NEAR(combined_distance(Tokens{"x"}, Tokens{"y"}, plane()), 0.8536, 1e-4);
}

TEST(CombinedDistance, BoundsAndEmptyBags) {
  const auto t = plane();
  EXPECT_DOUBLE_EQ(combined_distance(Tokens{"x", "y"}, Tokens{"x", "y"}, t), 0.0);
  EXPECT_DOUBLE_EQ(combined_distance(Tokens{}, Tokens{}, t), 0.0);
  EXPECT_DOUBLE_EQ(combined_distance(Tokens{}, Tokens{"x"}, t), 1.0);
  EXPECT_DOUBLE_EQ(combined_distance(Tokens{"x"}, Tokens{"z"}, t), 1.0);
  EXPECT_DOUBLE_EQ(combined_distance(Tokens{"nope"}, Tokens{"x"}, t), 1.0);
}

TEST(Rank, OrdersByDistanceThenEntryId) {
  TranslatedFaq index;
  index.tuples = {tuple(0, {"z"}), tuple(1, {"x"}), tuple(2, {"y"}), tuple(3, {"x"})};
  const auto r = rank(query_with({"x"}), index, plane());
  EXPECT_EQ(r.ids(), (std::vector<std::size_t>{1, 3, 2, 0}));
  EXPECT_DOUBLE_EQ(r.entries[0].distance, 0.0);
  EXPECT_EQ(r.entries[0].answer, "a1");
  EXPECT_EQ(rank(query_with({"x"}), index, plane(), 2).ids(), (std::vector<std::size_t>{1, 3}));
}

TEST(Rank, CanonicalizesPredictedKeywords) {
  TranslatedFaq index;
  index.tuples = {tuple(0, {"x", "y"}), tuple(1, {"y"})};
  const auto a = rank(query_with({"y", "x", "y"}), index, plane());
  const auto b = rank(query_with({"x", "y"}), index, plane());
  EXPECT_EQ(a, b);
  EXPECT_DOUBLE_EQ(a.entries[0].distance, 0.0);
}

TEST(Rank, EmptyIndexIsAnError) {
  try {
    rank(query_with({"x"}), TranslatedFaq{}, plane());
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyIndex);
  }
}

TEST(Rank, ResultJsonShape) {
  TranslatedFaq index;
  index.tuples = {tuple(4, {"x"})};
  const auto j = to_json(rank(query_with({"x"}), index, plane()));
  ASSERT_TRUE(j.is_array());
  EXPECT_EQ(j[0]["entry_id"], 4);
  EXPECT_EQ(j[0]["question"], "q4");
  EXPECT_TRUE(j[0].contains("distance"));
}

TEST(TranslatedFaq, IndexJsonlRoundTrip) {
  TranslatedFaq index;
  index.model_fingerprint = "abc";
  index.config_digest = "def";
  index.tuples = {tuple(0, {"dropbox", "security"}), tuple(3, {})};
  std::ostringstream out;
  write_index_jsonl(out, index);
  std::istringstream in(out.str());
  EXPECT_EQ(read_index_jsonl(in), index);
  EXPECT_EQ(canonicalize({"b", "a", "b"}), (Tokens{"a", "b"}));
}
