#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "faqforge/archive.hpp"
#include "faqforge/corpus.hpp"
#include "faqforge/embeddings.hpp"
#include "faqforge/nn.hpp"
#include "faqforge/preprocess.hpp"
#include "faqforge/retrieval.hpp"
#include "faqforge/translated_faq.hpp"

namespace faqforge {

struct PairFeatures {
  double entity_overlap = 0.0;        // Jaccard of content-token sets
  double levenshtein_norm = 0.0;      // token edit distance / max length
  double embedding_similarity = 0.0;  // cosine of mean vectors

  bool operator==(const PairFeatures &) const = default;
};

PairFeatures pair_features(const TokenSequence &q1, const TokenSequence &q2,
                           const EmbeddingTable &table);

struct ClassifierConfig {
  std::size_t gru_units = 1024;
  std::size_t dense_units = 512;
  double dropout = 0.5;
  std::size_t batch_size = 32;
  std::size_t epochs = 30;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::ordered_json to_json(const ClassifierConfig &config);
ClassifierConfig classifier_config_from_json(const nlohmann::json &j);

// Siamese GRU over the two embedded questions; [|a-b|, a*b, features] feed
// a tanh dense layer, dropout, and a two-way softmax (relevant, not relevant).
class CandidateClassifier {
public:
  CandidateClassifier(const ClassifierConfig &config, std::size_t input_dim);

  const ClassifierConfig &config() const { return config_; }
  std::size_t input_dim() const { return input_dim_; }
  const std::vector<double> &loss_history() const { return loss_history_; }

  // Final GRU state; zero for an empty question.
  Eigen::VectorXd encode(const TokenSequence &question, const EmbeddingTable &table) const;
  // (P(relevant), P(not relevant)).
  Eigen::Vector2d predict(const Eigen::VectorXd &a, const Eigen::VectorXd &b,
                          const PairFeatures &features) const;
  Eigen::Vector2d predict(const TokenSequence &q1, const TokenSequence &q2,
                          const EmbeddingTable &table) const;

  std::vector<nn::Param *> parameters();
  std::vector<const nn::Param *> parameters() const;

  Archive to_archive() const;
  static CandidateClassifier from_archive(const Archive &archive);
  std::string fingerprint() const;

private:
  friend CandidateClassifier train_classifier(const FaqCollection &, const RelevanceMatrix &,
                                              const DatasetSplit &,
                                              std::span<const TokenSequence>,
                                              const EmbeddingTable &,
                                              const ClassifierConfig &);

  Eigen::MatrixXd embed(const TokenSequence &question, const EmbeddingTable &table) const;

  ClassifierConfig config_;
  std::size_t input_dim_ = 0;
  std::vector<double> loss_history_;
  nn::Gru gru_;
  nn::Param hidden_weight_;  // D x (2U + 3)
  nn::Param hidden_bias_;
  nn::Param out_weight_;     // 2 x D
  nn::Param out_bias_;
};

struct LabeledPair {
  std::size_t a = 0;
  std::size_t b = 0;
  bool relevant = false;
};

// All relevant unordered train pairs plus an equal number of uniformly
// sampled non-relevant ones. Throws NoPositives / NoNegatives.
std::vector<LabeledPair> sample_training_pairs(const RelevanceMatrix &matrix,
                                               const DatasetSplit &split,
                                               std::uint64_t seed);

// `tokens` is indexed by entry id.
CandidateClassifier train_classifier(const FaqCollection &collection,
                                     const RelevanceMatrix &matrix,
                                     const DatasetSplit &split,
                                     std::span<const TokenSequence> tokens,
                                     const EmbeddingTable &table,
                                     const ClassifierConfig &config);

// Relevance probability of a query against every indexed question.
class CandidateScorer {
public:
  virtual ~CandidateScorer() = default;
  // Aligned with the index positions the scorer was built for.
  virtual std::vector<double> score(const TokenSequence &query) const = 0;
};

// Caches the GRU encodings of the indexed questions.
class ClassifierScorer : public CandidateScorer {
public:
  ClassifierScorer(const CandidateClassifier &classifier,
                   std::vector<TokenSequence> indexed, const EmbeddingTable &table);
  std::vector<double> score(const TokenSequence &query) const override;

private:
  const CandidateClassifier &classifier_;
  const EmbeddingTable &table_;
  std::vector<TokenSequence> indexed_;
  std::vector<Eigen::VectorXd> encodings_;
  std::vector<std::optional<Eigen::VectorXd>> means_;
};

// Returns the same probability for every pair; 1.0 accepts everything.
class ConstantScorer : public CandidateScorer {
public:
  ConstantScorer(std::size_t size, double probability)
      : size_(size), probability_(probability) {}
  std::vector<double> score(const TokenSequence &) const override {
    return std::vector<double>(size_, probability_);
  }

private:
  std::size_t size_;
  double probability_;
};

struct CandidateSet {
  std::vector<std::size_t> positions;   // index positions, best first
  std::vector<double> probabilities;    // aligned with positions
  std::vector<double> all_probabilities;  // every index position
  std::size_t k = 20;
  double prob_threshold = 0.5;
  bool fallback = false;  // nothing passed the threshold: full collection
};

CandidateSet select_candidates(const CandidateScorer &scorer, const Query &query,
                               std::size_t index_size, std::size_t k,
                               double prob_threshold);

// Candidates ranked by combined distance, then every other entry ordered by
// classifier probability (descending) and entry id.
RankedResult rank_guided(const Query &query, const TranslatedFaq &index,
                         const CandidateScorer &scorer, const EmbeddingTable &table,
                         std::size_t k, double prob_threshold = 0.5,
                         std::optional<std::size_t> top_k = std::nullopt);

} // namespace faqforge
