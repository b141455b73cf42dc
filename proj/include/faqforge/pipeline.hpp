#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "faqforge/candidate_guide.hpp"
#include "faqforge/corpus.hpp"
#include "faqforge/embeddings.hpp"
#include "faqforge/evaluation.hpp"
#include "faqforge/preprocess.hpp"
#include "faqforge/retrieval.hpp"
#include "faqforge/seq2seq.hpp"
#include "faqforge/translated_faq.hpp"

namespace faqforge {

namespace artifact {
inline constexpr const char *kCorpus = "corpus.jsonl";
inline constexpr const char *kEmbeddings = "embeddings.bin";
inline constexpr const char *kKeywords = "keywords.jsonl";
inline constexpr const char *kSeq2Seq = "seq2seq.faqa";
inline constexpr const char *kClassifier = "classifier.faqa";
inline constexpr const char *kIndex = "index.jsonl";
inline constexpr const char *kReportJson = "report.json";
inline constexpr const char *kReportText = "report.txt";
} // namespace artifact

struct PipelineConfig {
  std::filesystem::path corpus;
  std::filesystem::path embeddings;
  double tau = 0.15;
  std::size_t candidate_k = 20;
  double prob_threshold = 0.5;
  Seq2SeqConfig seq2seq;
  ClassifierConfig classifier;
  std::uint64_t seed = 0;
  std::size_t folds = 5;
  double train_frac = 0.8;
  std::filesystem::path artifacts_dir = "artifacts";

  void validate() const;
  ExperimentConfig experiment() const;
};

// Everything that shapes trained artifacts (paths excluded).
nlohmann::ordered_json training_config_json(const PipelineConfig &config);
std::string training_digest(const PipelineConfig &config);

// An explicit flag wins, then FAQFORGE_ARTIFACTS, then "artifacts".
std::filesystem::path resolve_artifacts_dir(const std::optional<std::filesystem::path> &flag);

// .jsonl files are canonical JSONL; anything else goes through the StackFAQ adapter.
CorpusFormat corpus_format_for(const std::filesystem::path &path);

// Each command writes its outputs plus "<command>.manifest.json" holding the
// config, input digests and output digests. Outputs carry no timestamps, so
// re-runs with unchanged inputs are byte-identical.
void cmd_ingest(const PipelineConfig &config);
void cmd_train(const PipelineConfig &config);
void cmd_translate(const PipelineConfig &config);
MetricsReport cmd_evaluate(const PipelineConfig &config, const ProgressFn &progress = {});
std::vector<SweepPoint> cmd_sweep_tau(const PipelineConfig &config,
                                      const std::vector<double> &taus,
                                      const ProgressFn &progress = {});
std::vector<RobustnessPoint> cmd_robustness(const PipelineConfig &config,
                                            const std::vector<std::size_t> &per_thread,
                                            const ProgressFn &progress = {});

enum class QueryMode { TiS2S, GtiS2S };
QueryMode parse_query_mode(const std::string &text);  // throws InvalidArgument

// Read-only view over trained and translated artifacts.
class QueryService {
public:
  // Throws MissingArtifact when the index or model is absent and
  // ConfigMismatch when the index was built by a different model.
  static std::unique_ptr<QueryService> open(const std::filesystem::path &artifacts_dir,
                                            std::size_t candidate_k = 20,
                                            double prob_threshold = 0.5);

  QueryService(const QueryService &) = delete;
  QueryService &operator=(const QueryService &) = delete;

  // Throws InvalidArgument for a blank question.
  RankedResult query(const std::string &question, QueryMode mode, std::size_t top_k) const;
  // Same, with an explicit candidate scorer for the guided mode.
  RankedResult query(const std::string &question, const CandidateScorer &scorer,
                     std::size_t top_k) const;

  const TranslatedFaq &index() const { return index_; }
  const EmbeddingTable &embeddings() const { return table_; }
  bool has_classifier() const { return classifier_.has_value(); }

private:
  QueryService(TextResources resources, EmbeddingTable table, Seq2SeqModel model,
               std::optional<CandidateClassifier> classifier, TranslatedFaq index,
               std::size_t candidate_k, double prob_threshold);

  TextResources resources_;
  EmbeddingTable table_;
  Seq2SeqModel model_;
  std::optional<CandidateClassifier> classifier_;
  TranslatedFaq index_;
  std::size_t candidate_k_;
  double prob_threshold_;
  std::unique_ptr<ClassifierScorer> scorer_;
};

nlohmann::ordered_json error_json(const std::exception &e);

} // namespace faqforge
