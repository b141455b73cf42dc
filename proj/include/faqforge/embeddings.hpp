#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

namespace faqforge {

enum class OovPolicy { Zero, HashRandom, Skip };

// Word vectors stored as float32 exactly as read, so writing the binary
// format back out is bit-identical.
class EmbeddingTable {
public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  bool contains(const std::string &token) const { return index_.contains(token); }
  const std::vector<std::string> &words() const { return words_; }

  // Replaces an existing vector. Throws DimensionMismatch.
  void insert(const std::string &token, std::vector<float> vector);
  const std::vector<float> *find(const std::string &token) const;

  // nullopt only under OovPolicy::Skip for unknown tokens.
  std::optional<Eigen::VectorXd> embed(const std::string &token,
                                       OovPolicy policy) const;

private:
  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::vector<std::vector<float>> vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

using VocabularyFilter = std::unordered_set<std::string>;

// "<vocab> <dim>\n" then per word: token bytes, a space, dim little-endian
// float32 values. Vectors whose token is outside `filter` are read and
// dropped. Throws BadHeader / TruncatedStream.
EmbeddingTable load_word2vec_binary(std::istream &in,
                                    const VocabularyFilter *filter = nullptr);
// One "token v1 v2 ..." line per word; an optional "<vocab> <dim>" first line.
EmbeddingTable load_word2vec_text(std::istream &in,
                                  const VocabularyFilter *filter = nullptr);
// .txt / .vec files are read as text, anything else as binary.
EmbeddingTable load_embeddings_file(const std::filesystem::path &path,
                                    const VocabularyFilter *filter = nullptr);

void write_word2vec_binary(std::ostream &out, const EmbeddingTable &table);

// Unit vector seeded by the token's bytes; identical in every process.
Eigen::VectorXd hash_random_vector(const std::string &token, std::size_t dim);

} // namespace faqforge
