#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace faqforge {

struct TokenSequence {
  std::vector<std::string> tokens;
  std::optional<std::size_t> source_entry_id;

  bool empty() const { return tokens.empty(); }
  std::size_t size() const { return tokens.size(); }
};

// Stopword list (one word per line) and lemma lexicon (surface<TAB>lemma).
class TextResources {
public:
  TextResources() = default;
  TextResources(std::unordered_set<std::string> stopwords,
                std::unordered_map<std::string, std::string> lemmas);

  static TextResources load(const std::filesystem::path &stopwords,
                            const std::filesystem::path &lexicon);
  // The shipped English resources under the data directory.
  static TextResources load_default();

  bool is_stopword(std::string_view word) const;
  // Unknown words lemmatize to themselves.
  std::string lemma(const std::string &word) const;

  const std::unordered_map<std::string, std::string> &lexicon() const {
    return lemmas_;
  }

private:
  std::unordered_set<std::string> stopwords_;
  std::unordered_map<std::string, std::string> lemmas_;
};

std::filesystem::path default_data_dir();

// Splits on Unicode whitespace, lowercases ASCII letters and strips
// leading/trailing punctuation.
std::vector<std::string> tokenize(std::string_view text);

TokenSequence preprocess(std::string_view text, const TextResources &resources);

std::string join_tokens(const std::vector<std::string> &tokens);

} // namespace faqforge
