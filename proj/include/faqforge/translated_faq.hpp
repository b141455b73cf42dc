#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "faqforge/corpus.hpp"
#include "faqforge/embeddings.hpp"
#include "faqforge/preprocess.hpp"
#include "faqforge/seq2seq.hpp"

namespace faqforge {

struct TranslatedTuple {
  std::size_t entry_id = 0;
  std::string question;
  std::vector<std::string> keywords;  // canonical: sorted, distinct
  std::string answer;

  bool operator==(const TranslatedTuple &) const = default;
};

struct TranslatedFaq {
  std::vector<TranslatedTuple> tuples;
  std::string model_fingerprint;
  std::string config_digest;

  bool operator==(const TranslatedFaq &) const = default;
};

// Sorted and deduplicated.
std::vector<std::string> canonicalize(std::vector<std::string> keywords);

// Translates the entries listed in `members` (every entry when empty), in
// ascending id order. `tokens` holds the preprocessed questions by entry id.
TranslatedFaq translate_faq(const Seq2SeqModel &model, const FaqCollection &collection,
                            std::span<const TokenSequence> tokens,
                            const EmbeddingTable &table,
                            std::span<const std::size_t> members = {});

TranslatedFaq translate_faq(const Seq2SeqModel &model, const FaqCollection &collection,
                            const TextResources &resources, const EmbeddingTable &table);

// First line is a header {"model_fingerprint", "config_digest", "count"}; then
// one {"entry_id", "question", "keywords", "answer"} record per tuple.
void write_index_jsonl(std::ostream &out, const TranslatedFaq &index);
TranslatedFaq read_index_jsonl(std::istream &in);

} // namespace faqforge
