#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace faqforge {

struct FaqEntry {
  std::size_t entry_id = 0;
  std::size_t thread_id = 0;
  std::string question;
  std::string answer;
  bool is_paraphrase = false;

  bool operator==(const FaqEntry &) const = default;
};

// Validated, immutable FAQ collection. Entry ids are dense from 0 in
// encounter order, thread ids dense from 0, one original per thread.
class FaqCollection {
public:
  FaqCollection() = default;
  // Throws Error{EmptyCorpus | MalformedRecord | DuplicateOriginal}.
  explicit FaqCollection(std::vector<FaqEntry> entries);

  const std::vector<FaqEntry> &entries() const { return entries_; }
  const FaqEntry &operator[](std::size_t id) const { return entries_[id]; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t thread_count() const { return threads_.size(); }
  // Entry ids of a thread, ascending.
  const std::vector<std::size_t> &thread_members(std::size_t thread_id) const {
    return threads_[thread_id];
  }
  std::size_t original_of(std::size_t thread_id) const;

  bool operator==(const FaqCollection &other) const {
    return entries_ == other.entries_;
  }

private:
  std::vector<FaqEntry> entries_;
  std::vector<std::vector<std::size_t>> threads_;
};

enum class CorpusFormat { Jsonl, StackFaqAdapter };

// Canonical JSONL: {"thread_id", "question", "answer", "is_paraphrase"} per
// line. Thread ids are remapped to a dense range preserving numeric order.
FaqCollection load_faq(std::istream &source, CorpusFormat format);
// StackFaqAdapter accepts an XML file or a directory of XML files.
FaqCollection load_faq_file(const std::filesystem::path &path,
                            CorpusFormat format);
void write_jsonl(std::ostream &out, const FaqCollection &collection);

class RelevanceMatrix {
public:
  RelevanceMatrix() = default;
  explicit RelevanceMatrix(std::size_t n) : n_(n), cells_(n * n, 0) {}

  std::size_t size() const { return n_; }
  bool operator()(std::size_t i, std::size_t j) const {
    return cells_[i * n_ + j] != 0;
  }
  void set(std::size_t i, std::size_t j, bool value) {
    cells_[i * n_ + j] = value ? 1 : 0;
  }

private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> cells_;
};

RelevanceMatrix build_relevance_matrix(const FaqCollection &collection);

struct DatasetSplit {
  std::size_t fold_index = 0;
  std::vector<std::size_t> train_ids; // sorted
  std::vector<std::size_t> test_ids;  // sorted

  bool operator==(const DatasetSplit &) const = default;
};

// Per thread, test count = max(1, floor((1 - train_frac) * thread_size)).
// Originals are always in train; paraphrases rotate through the test slots
// so folds are disjoint whenever the thread is large enough.
std::vector<DatasetSplit> split_folds(const FaqCollection &collection,
                                      double train_frac, std::size_t folds,
                                      std::uint64_t seed);

// Keeps the original plus a seeded choice of (per_thread - 1) train
// paraphrases of every thread. Used for the training-size study.
DatasetSplit limit_train_per_thread(const FaqCollection &collection,
                                    const DatasetSplit &split,
                                    std::size_t per_thread, std::uint64_t seed);

} // namespace faqforge
