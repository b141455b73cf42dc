#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "faqforge/candidate_guide.hpp"
#include "faqforge/corpus.hpp"
#include "faqforge/embeddings.hpp"
#include "faqforge/preprocess.hpp"
#include "faqforge/seq2seq.hpp"

namespace faqforge {

// Mean of precision at each relevant hit. Throws EmptyRelevantSet.
double average_precision(std::span<const std::size_t> ranked,
                         const std::set<std::size_t> &relevant);
// |top-k ∩ relevant| / k; a ranking shorter than k counts the gap as misses.
double precision_at_k(std::span<const std::size_t> ranked,
                      const std::set<std::size_t> &relevant, std::size_t k);

struct ExperimentConfig {
  double tau = 0.15;
  std::size_t candidate_k = 20;
  double prob_threshold = 0.5;
  Seq2SeqConfig seq2seq;
  ClassifierConfig classifier;
  std::size_t folds = 5;
  double train_frac = 0.8;
  std::uint64_t seed = 0;
  bool run_guided = true;
  // Total training questions kept per thread (original included).
  std::optional<std::size_t> train_per_thread;
  std::vector<std::size_t> p_at = {1, 2, 5};

  void validate() const;
};

nlohmann::ordered_json to_json(const ExperimentConfig &config);
ExperimentConfig experiment_config_from_json(const nlohmann::json &j);

struct SystemMetrics {
  double map = 0.0;
  std::map<std::size_t, double> p_at_k;
  std::vector<std::size_t> query_ids;     // per-query values below align with these
  std::vector<double> average_precisions;
};

struct FoldReport {
  std::size_t fold_index = 0;
  std::size_t index_size = 0;
  std::size_t query_count = 0;
  std::size_t candidate_fallbacks = 0;  // guided queries where nothing passed
  SystemMetrics tis2s;
  std::optional<SystemMetrics> gtis2s;
};

struct MetricsReport {
  nlohmann::ordered_json config;  // snapshot, including the relevance protocol
  std::vector<FoldReport> folds;
  SystemMetrics tis2s;            // unweighted mean over folds
  std::optional<SystemMetrics> gtis2s;
};

nlohmann::ordered_json to_json(const MetricsReport &report);
// Results table with the published comparison rows.
void write_report_table(std::ostream &out, const MetricsReport &report);

using ProgressFn = std::function<void(std::string_view)>;

// Per fold: keywords, seq2seq and (optionally) the classifier are trained on
// the train split, train entries form the index, and every test entry is a
// query whose relevant set is its thread's indexed entries.
MetricsReport run_experiment(const FaqCollection &collection,
                             const TextResources &resources,
                             const EmbeddingTable &table,
                             const ExperimentConfig &config,
                             const ProgressFn &progress = {});

struct SweepPoint {
  double tau = 0.0;
  MetricsReport report;
};

std::vector<SweepPoint> sweep_tau(const FaqCollection &collection,
                                  const TextResources &resources,
                                  const EmbeddingTable &table,
                                  const ExperimentConfig &base,
                                  std::span<const double> taus,
                                  const ProgressFn &progress = {});

struct RobustnessPoint {
  std::size_t per_thread = 0;
  MetricsReport report;
};

std::vector<RobustnessPoint> robustness(const FaqCollection &collection,
                                        const TextResources &resources,
                                        const EmbeddingTable &table,
                                        const ExperimentConfig &base,
                                        std::span<const std::size_t> per_thread,
                                        const ProgressFn &progress = {});

nlohmann::ordered_json sweep_summary(std::span<const SweepPoint> points);
nlohmann::ordered_json robustness_summary(std::span<const RobustnessPoint> points);

} // namespace faqforge
