#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "faqforge/archive.hpp"
#include "faqforge/corpus.hpp"
#include "faqforge/embeddings.hpp"
#include "faqforge/intent_keywords.hpp"
#include "faqforge/nn.hpp"
#include "faqforge/preprocess.hpp"

namespace faqforge {

inline constexpr const char *kPadToken = "<pad>";
inline constexpr const char *kStartToken = "<start>";
inline constexpr const char *kEndToken = "<end>";

struct Seq2SeqConfig {
  std::size_t encoder_units = 2048;
  std::size_t decoder_units = 0;  // 0: same as encoder_units
  std::size_t decoder_embedding_dim = 64;
  double dropout = 0.4;
  std::size_t batch_size = 32;
  std::size_t epochs = 30;
  std::size_t max_decode_len = 0;  // 0: longest training target + 2
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;

  std::size_t effective_decoder_units() const {
    return decoder_units == 0 ? encoder_units : decoder_units;
  }
  void validate() const;  // throws InvalidArgument
};

nlohmann::ordered_json to_json(const Seq2SeqConfig &config);
Seq2SeqConfig seq2seq_config_from_json(const nlohmann::json &j);

struct TrainingExample {
  TokenSequence input;
  std::vector<std::string> target;  // <start> keywords... <end>
};

// One example per train entry; the target is its group's sorted keywords.
// `tokens` is indexed by entry id. Throws MissingKeywordSet.
std::vector<TrainingExample> build_training_set(std::span<const TokenSequence> tokens,
                                                std::span<const QuestionGroup> groups,
                                                std::span<const KeywordSet> keyword_sets,
                                                const DatasetSplit &split);

// Luong "concat" scoring: v^T tanh(W [decoder_state; encoder_state]).
struct AttentionParams {
  Eigen::MatrixXd weight;
  Eigen::VectorXd v;
};

double attention_score(const Eigen::VectorXd &decoder_state,
                       const Eigen::VectorXd &encoder_state,
                       const AttentionParams &params);
// Softmax of the scores against every column of `encoder_states`.
Eigen::VectorXd attention_weights(const Eigen::VectorXd &decoder_state,
                                  const Eigen::MatrixXd &encoder_states,
                                  const AttentionParams &params);

// LSTM encoder over frozen word vectors, LSTM decoder over a learned
// keyword embedding, concat attention and a tanh attentional layer before
// the output projection.
class Seq2SeqModel {
public:
  Seq2SeqModel(const Seq2SeqConfig &config, std::vector<std::string> keywords,
               std::size_t input_dim);

  const Seq2SeqConfig &config() const { return config_; }
  // <pad>, <start>, <end>, then the keywords in ascending order.
  const std::vector<std::string> &vocabulary() const { return vocab_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t max_decode_len() const { return max_decode_len_; }
  const std::vector<double> &loss_history() const { return loss_history_; }
  AttentionParams attention() const;

  // Greedy decode, dropout off, sentinels stripped.
  std::vector<std::string> predict(const TokenSequence &input,
                                   const EmbeddingTable &table) const;

  // Mean per-token cross-entropy under teacher forcing, no dropout.
  double loss(const TrainingExample &example, const EmbeddingTable &table) const;
  // Same loss; adds grad_scale * dLoss/dparam into every parameter's grad.
  // Dropout is applied when `dropout_rng` is non-null.
  double accumulate_gradients(const TrainingExample &example,
                              const EmbeddingTable &table, Rng *dropout_rng,
                              double grad_scale);

  std::vector<nn::Param *> parameters();
  std::vector<const nn::Param *> parameters() const;

  Archive to_archive() const;
  static Seq2SeqModel from_archive(const Archive &archive);
  // SHA-256 of the serialized archive.
  std::string fingerprint() const;

private:
  friend Seq2SeqModel train(const Seq2SeqConfig &, std::span<const TrainingExample>,
                            const EmbeddingTable &);

  Eigen::MatrixXd embed_input(const TokenSequence &input,
                              const EmbeddingTable &table) const;
  std::vector<int> encode_target(const std::vector<std::string> &target) const;
  struct Trace;
  Trace forward(const Eigen::MatrixXd &source, const std::vector<int> &target,
                Rng *dropout_rng) const;
  void backward(const Trace &trace, double grad_scale);

  Seq2SeqConfig config_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> vocab_index_;
  std::size_t input_dim_ = 0;
  std::size_t max_decode_len_ = 0;
  std::vector<double> loss_history_;
  bool bridged_ = false;

  nn::Lstm encoder_;
  nn::Lstm decoder_;
  nn::Param target_embedding_;  // V x E
  nn::Param bridge_h_;          // Hd x He, only when widths differ
  nn::Param bridge_c_;
  nn::Param att_weight_;        // Hd x (Hd + He)
  nn::Param att_v_;             // Hd x 1
  nn::Param combine_weight_;    // Hd x (He + Hd)
  nn::Param combine_bias_;
  nn::Param out_weight_;        // V x Hd
  nn::Param out_bias_;
};

// Teacher-forced training with Adam; deterministic for a given seed.
// Throws EmptyTrainingSet / NonFiniteLoss.
Seq2SeqModel train(const Seq2SeqConfig &config,
                   std::span<const TrainingExample> examples,
                   const EmbeddingTable &table);

std::vector<std::string> predict_keywords(const Seq2SeqModel &model,
                                          const TokenSequence &input,
                                          const EmbeddingTable &table);

} // namespace faqforge
