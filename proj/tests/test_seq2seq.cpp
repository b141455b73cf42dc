#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "checks.hpp"
#include "faqforge/error.hpp"
#include "faqforge/rng.hpp"
#include "faqforge/seq2seq.hpp"

using namespace faqforge;

namespace {

using Tokens = std::vector<std::string>;

EmbeddingTable toy_table() {
  EmbeddingTable t(6);
  Rng rng(1);
  for (const char *w : {"secure", "sensitive", "data", "dropbox", "split", "conversation",
                        "gmail", "divide"}) {
    std::vector<float> v(6);
    for (auto &x : v) x = static_cast<float>(rng.normal());
    t.insert(w, v);
  }
  return t;
}

TrainingExample example(Tokens input, Tokens keywords) {
  TrainingExample e;
  e.input.tokens = std::move(input);
  e.target.push_back(kStartToken);
  for (auto &k : keywords) e.target.push_back(std::move(k));
  e.target.push_back(kEndToken);
  return e;
}

std::vector<TrainingExample> toy_examples() {
  return {example({"secure", "sensitive", "data", "dropbox"}, {"dropbox", "security"}),
          example({"sensitive", "data", "dropbox", "secure"}, {"dropbox", "security"}),
          example({"data", "dropbox"}, {"dropbox", "security"}),
          example({"split", "conversation", "gmail"}, {"conversation", "gmail", "split"}),
          example({"divide", "conversation", "gmail"}, {"conversation", "gmail", "split"}),
          example({"split", "gmail"}, {"conversation", "gmail", "split"})};
}

Seq2SeqConfig small_config() {
  Seq2SeqConfig c;
  c.encoder_units = 16;
  c.decoder_embedding_dim = 6;
  c.dropout = 0.0;
  c.epochs = 120;
  c.batch_size = 3;
  c.learning_rate = 1e-2;
  c.seed = 2;
  return c;
}

} // namespace

TEST(Attention, OneDimensionalHandValue) {
  AttentionParams p{Eigen::MatrixXd(1, 2), Eigen::VectorXd(1)};
  p.weight << 1, 1;
  p.v << 2;
  const double s = attention_score(Eigen::VectorXd::Constant(1, 0.5),
                                   Eigen::VectorXd::Constant(1, 0.25), p);
  EXPECT_NEAR(s, 2 * std::tanh(0.75), 1e-15);
  EXPECT_NEAR(s, 1.27030, 1e-5);
}

TEST(Attention, RejectsMismatchedWidths) {
  AttentionParams p{Eigen::MatrixXd(1, 2), Eigen::VectorXd(1)};
  try {
    attention_score(Eigen::VectorXd(2), Eigen::VectorXd(1), p);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(Attention, WeightsAreADistribution) {
  const auto r = checks::attention_weights_normalized(3, 200);
  EXPECT_TRUE(r.pass) << r.detail;
}

TEST(Attention, EqualScoresGiveUniformWeights) {
  AttentionParams p{Eigen::MatrixXd::Ones(2, 4), Eigen::VectorXd::Ones(2)};
  Eigen::MatrixXd enc(2, 3);
  enc << 1, 1, 1, -1, -1, -1;
  const auto w = attention_weights(Eigen::VectorXd::Zero(2), enc, p);
  EXPECT_TRUE(w.isApprox(Eigen::VectorXd::Constant(3, 1.0 / 3)));
}

TEST(Seq2Seq, OutputProjectionGradientMatchesFiniteDifferences) {
  const auto r = checks::seq2seq_gradient_check("output.weight", 1e-4);
  EXPECT_TRUE(r.pass) << r.detail;
}

TEST(Seq2Seq, EveryParameterGradientMatchesFiniteDifferences) {
  const auto r = checks::seq2seq_gradient_check("", 1e-4);
  EXPECT_TRUE(r.pass) << r.detail;
}

TEST(Seq2Seq, VocabularyLayout) {
  Seq2SeqModel m(small_config(), {"security", "dropbox", "dropbox"}, 6);
  EXPECT_EQ(m.vocabulary(), (Tokens{kPadToken, kStartToken, kEndToken, "dropbox", "security"}));
}

TEST(Seq2Seq, TrainingSetUsesGroupKeywords) {
  std::vector<TokenSequence> tokens(4);
  tokens[0].tokens = {"secure", "data"};
  tokens[1].tokens = {"dropbox"};
  tokens[2].tokens = {"threat"};
  tokens[3].tokens = {"gmail"};
  QuestionGroup g;
  g.group_id = 0;
  g.member_ids = {0, 1, 2};
  const std::vector<QuestionGroup> groups = {g};
  const std::vector<KeywordSet> sets = {{0, 0.4, {"dropbox", "security"}, false}};
  DatasetSplit split;
  split.train_ids = {0, 1, 2};
  const auto examples = build_training_set(tokens, groups, sets, split);
  ASSERT_EQ(examples.size(), 3u);
  for (const auto &e : examples)
    EXPECT_EQ(e.target, (Tokens{kStartToken, "dropbox", "security", kEndToken}));
  EXPECT_EQ(examples[2].input.tokens, Tokens{"threat"});

  try {
    build_training_set(tokens, groups, {}, split);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingKeywordSet);
  }
}

TEST(Seq2Seq, OverfitsToyKeywords) {
  const auto table = toy_table();
  const auto examples = toy_examples();
  const auto model = train(small_config(), examples, table);
  TokenSequence q;
  q.tokens = {"secure", "sensitive", "data", "dropbox"};
  EXPECT_EQ(model.predict(q, table), (Tokens{"dropbox", "security"}));
  q.tokens = {"divide", "conversation", "gmail"};
  EXPECT_EQ(predict_keywords(model, q, table), (Tokens{"conversation", "gmail", "split"}));
  const auto &h = model.loss_history();
  ASSERT_EQ(h.size(), 120u);
  EXPECT_LT(h.back(), 0.1 * h.front());
}

TEST(Seq2Seq, TrainingIsDeterministic) {
  auto cfg = small_config();
  cfg.epochs = 5;
  cfg.dropout = 0.3;
  const auto table = toy_table();
  const auto examples = toy_examples();
  EXPECT_EQ(train(cfg, examples, table).fingerprint(), train(cfg, examples, table).fingerprint());
  auto other = cfg;
  other.seed = 99;
  EXPECT_NE(train(cfg, examples, table).fingerprint(),
            train(other, examples, table).fingerprint());
}

TEST(Seq2Seq, ArchiveRoundTripPreservesModel) {
  auto cfg = small_config();
  cfg.epochs = 10;
  cfg.decoder_units = 12;
  const auto table = toy_table();
  const auto model = train(cfg, toy_examples(), table);
  std::stringstream buf;
  write_archive(buf, model.to_archive());
  const auto copy = Seq2SeqModel::from_archive(read_archive(buf));
  EXPECT_EQ(copy.fingerprint(), model.fingerprint());
  EXPECT_EQ(copy.vocabulary(), model.vocabulary());
  EXPECT_EQ(copy.loss_history(), model.loss_history());
  for (const auto &e : toy_examples()) {
    EXPECT_EQ(copy.predict(e.input, table), model.predict(e.input, table));
    EXPECT_DOUBLE_EQ(copy.loss(e, table), model.loss(e, table));
  }
  Archive foreign = model.to_archive();
  foreign.kind = "something-else";
  EXPECT_THROW(Seq2SeqModel::from_archive(foreign), Error);
}

TEST(Seq2Seq, PredictionStopsAtMaxLength) {
  auto cfg = small_config();
  cfg.max_decode_len = 2;
  Seq2SeqModel m(cfg, {"a", "b"}, 6);
  TokenSequence q;
  q.tokens = {"data"};
  EXPECT_LE(m.predict(q, toy_table()).size(), 2u);
}

TEST(Seq2Seq, EmptyInputStillDecodes) {
  Seq2SeqModel m(small_config(), {"a"}, 6);
  EXPECT_NO_THROW(m.predict(TokenSequence{}, toy_table()));
}

TEST(Seq2Seq, TrainingErrors) {
  const auto table = toy_table();
  try {
    train(small_config(), {}, table);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyTrainingSet);
  }
  auto bad = small_config();
  bad.learning_rate = 1e6;
  bad.epochs = 30;
  bool diverged_or_finite = true;
  try {
    train(bad, toy_examples(), table);
  } catch (const Error &e) {
    diverged_or_finite = e.kind() == ErrorKind::NonFiniteLoss;
  }
  EXPECT_TRUE(diverged_or_finite);
}

TEST(Seq2Seq, ConfigJsonRoundTripAndValidation) {
  auto cfg = small_config();
  cfg.decoder_units = 7;
  const auto back = seq2seq_config_from_json(nlohmann::json::parse(to_json(cfg).dump()));
  EXPECT_EQ(to_json(back), to_json(cfg));
  cfg.encoder_units = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = small_config();
  cfg.dropout = 1.0;
  EXPECT_THROW(cfg.validate(), Error);
}
