#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "faqforge/corpus.hpp"
#include "faqforge/preprocess.hpp"

namespace faqforge {

struct QuestionGroup {
  std::size_t group_id = 0;
  std::vector<std::size_t> member_ids;  // ascending
  std::vector<std::string> document;    // members' tokens, concatenated
};

// Connected components of the relevance graph over `members` (all entries
// when empty). `tokens` is indexed by entry id. Groups are numbered by their
// smallest member.
std::vector<QuestionGroup> group_questions(const RelevanceMatrix &matrix,
                                           std::span<const TokenSequence> tokens,
                                           std::span<const std::size_t> members = {});

// entry id -> group id for every grouped entry; entries outside any group
// map to npos.
std::vector<std::size_t> group_lookup(std::span<const QuestionGroup> groups,
                                      std::size_t entry_count);

struct TfidfTable {
  std::vector<std::size_t> group_ids;
  // One score map per group, aligned with group_ids. Scores are max-scaled
  // per group into [0, 1].
  std::vector<std::map<std::string, double>> scores;
  // Set when only one group exists: every idf is 0.
  bool degenerate = false;

  double score(std::size_t group_index, const std::string &token) const;
};

// tf = count / |document|, idf = log10(N / df) with groups as documents.
TfidfTable compute_tfidf(std::span<const QuestionGroup> groups);

struct KeywordSet {
  std::size_t group_id = 0;
  double tau = 0.0;
  std::vector<std::string> keywords;  // sorted, distinct
  bool fallback = false;              // top-1 token substituted for an empty set

  bool operator==(const KeywordSet &) const = default;
};

// Keeps tokens with a positive score >= tau; an empty result falls back to
// the group's top-scoring token.
std::vector<KeywordSet> extract_keywords(const TfidfTable &table, double tau);

void write_keywords_jsonl(std::ostream &out, std::span<const KeywordSet> sets);
std::vector<KeywordSet> read_keywords_jsonl(std::istream &in);

} // namespace faqforge
