#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "faqforge/embeddings.hpp"
#include "faqforge/preprocess.hpp"
#include "faqforge/seq2seq.hpp"
#include "faqforge/translated_faq.hpp"

namespace faqforge {

struct Query {
  std::string raw_text;
  TokenSequence tokens;
  std::vector<std::string> predicted_keywords;  // canonical
};

Query make_query(std::string text, const TextResources &resources,
                 const Seq2SeqModel &model, const EmbeddingTable &table);

struct RankedEntry {
  std::size_t entry_id = 0;
  double distance = 0.0;
  std::string question;
  std::string answer;

  bool operator==(const RankedEntry &) const = default;
};

struct RankedResult {
  std::vector<RankedEntry> entries;

  std::vector<std::size_t> ids() const;
  bool operator==(const RankedResult &) const = default;
};

nlohmann::ordered_json to_json(const RankedResult &result);

// Token-level insert/delete/substitute distance.
std::size_t token_levenshtein(std::span<const std::string> a,
                              std::span<const std::string> b);

// Minimum-cost transport of integer masses (sum(supply) == sum(demand)),
// solved exactly by successive shortest paths.
double exact_transport(const Eigen::MatrixXd &cost,
                       std::span<const std::int64_t> supply,
                       std::span<const std::int64_t> demand);

// Word Mover's Distance between uniform-weight bags, unit-normalized vectors,
// Euclidean ground cost. OOV tokens are skipped; throws EmptyBag when either
// bag has no in-vocabulary token.
double wmd(std::span<const std::string> a, std::span<const std::string> b,
           const EmbeddingTable &table);

// 0.5 * wmd/2 + 0.5 * levenshtein / max length, in [0, 1]. A side with no
// in-vocabulary token makes the WMD part 1 (0 when both are empty).
double combined_distance(std::span<const std::string> query_keywords,
                         std::span<const std::string> entry_keywords,
                         const EmbeddingTable &table);

// Ascending combined distance, ties by entry id. Throws EmptyIndex.
RankedResult rank(const Query &query, const TranslatedFaq &index,
                  const EmbeddingTable &table,
                  std::optional<std::size_t> top_k = std::nullopt);

// Ranks only the tuples at the given positions of `index.tuples`.
RankedResult rank_positions(const Query &query, const TranslatedFaq &index,
                            std::span<const std::size_t> positions,
                            const EmbeddingTable &table);

} // namespace faqforge
