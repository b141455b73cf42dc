#include "faqforge/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <boost/algorithm/string/case_conv.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>

#include "faqforge/error.hpp"
#include "faqforge/rng.hpp"

namespace faqforge {

namespace {

bool blank(const std::string &s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

struct RawRecord {
  std::int64_t thread_key;
  std::string question;
  std::string answer;
  bool is_paraphrase;
  std::size_t line;
};

FaqCollection assemble(std::vector<RawRecord> raw) {
  if (raw.empty())
    throw Error(ErrorKind::EmptyCorpus, "corpus contains no entries");
  std::map<std::int64_t, std::size_t> dense;
  for (const auto &r : raw) dense.emplace(r.thread_key, 0);
  std::size_t next = 0;
  for (auto &[key, id] : dense) id = next++;

  std::vector<FaqEntry> entries;
  entries.reserve(raw.size());
  std::vector<std::optional<std::size_t>> original_line(dense.size());
  for (const auto &r : raw) {
    if (blank(r.question))
      throw Error(ErrorKind::MalformedRecord,
                  "line " + std::to_string(r.line) + ": empty question");
    const std::size_t thread = dense.at(r.thread_key);
    if (!r.is_paraphrase) {
      if (original_line[thread])
        throw Error(ErrorKind::DuplicateOriginal,
                    "line " + std::to_string(r.line) + ": thread " +
                        std::to_string(r.thread_key) +
                        " already has an original question (line " +
                        std::to_string(*original_line[thread]) + ")");
      original_line[thread] = r.line;
    }
    entries.push_back(FaqEntry{entries.size(), thread, r.question, r.answer,
                               r.is_paraphrase});
  }
  return FaqCollection(std::move(entries));
}

FaqCollection load_jsonl(std::istream &in) {
  std::vector<RawRecord> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fail = [&](const std::string &what) {
      return Error(ErrorKind::MalformedRecord,
                   "line " + std::to_string(line_no) + ": " + what);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error &e) {
      throw fail(std::string("invalid JSON (") + e.what() + ")");
    }
    if (!j.is_object()) throw fail("record is not an object");
    if (!j.contains("thread_id") || !j["thread_id"].is_number_integer())
      throw fail("missing or non-integer thread_id");
    if (!j.contains("question") || !j["question"].is_string())
      throw fail("missing question");
    if (!j.contains("answer") || !j["answer"].is_string())
      throw fail("missing answer");
    if (!j.contains("is_paraphrase") || !j["is_paraphrase"].is_boolean())
      throw fail("missing is_paraphrase");
    const auto thread = j["thread_id"].get<std::int64_t>();
    if (thread < 0) throw fail("negative thread_id");
    raw.push_back(RawRecord{thread, j["question"].get<std::string>(),
                            j["answer"].get<std::string>(),
                            j["is_paraphrase"].get<bool>(), line_no});
  }
  return assemble(std::move(raw));
}

// StackFAQ-style XML: every <thread> element holds one original question,
// one answer and any number of paraphrases (possibly inside a container).
// Tag names are matched case-insensitively against a few known aliases.
namespace pt = boost::property_tree;

std::string lower(std::string s) {
  boost::algorithm::to_lower(s);
  return s;
}

bool is_question_tag(const std::string &t) {
  return t == "question" || t == "original" || t == "originalquestion";
}
bool is_answer_tag(const std::string &t) { return t == "answer"; }
bool is_paraphrase_tag(const std::string &t) {
  return t == "paraphrase" || t == "query" || t == "rephrase" ||
         t == "variant" || t == "paraphrasedquestion";
}

void collect_paraphrases(const pt::ptree &node, std::vector<std::string> &out) {
  for (const auto &[tag, child] : node) {
    const std::string t = lower(tag);
    if (t == "<xmlattr>") continue;
    if (is_paraphrase_tag(t))
      out.push_back(child.get_value<std::string>());
    else if (!is_question_tag(t) && !is_answer_tag(t))
      collect_paraphrases(child, out);
  }
}

void collect_threads(const pt::ptree &node, std::vector<RawRecord> &raw,
                     std::int64_t &next_thread) {
  for (const auto &[tag, child] : node) {
    const std::string t = lower(tag);
    if (t == "<xmlattr>") continue;
    if (t != "thread") {
      collect_threads(child, raw, next_thread);
      continue;
    }
    std::optional<std::string> question, answer;
    for (const auto &[ctag, c] : child) {
      const std::string ct = lower(ctag);
      if (is_question_tag(ct) && !question) question = c.get_value<std::string>();
      if (is_answer_tag(ct) && !answer) answer = c.get_value<std::string>();
    }
    const std::size_t record = static_cast<std::size_t>(next_thread) + 1;
    if (!question || !answer)
      throw Error(ErrorKind::MalformedRecord,
                  "thread record " + std::to_string(record) +
                      ": missing question or answer element");
    std::vector<std::string> paraphrases;
    collect_paraphrases(child, paraphrases);
    const std::int64_t id = next_thread++;
    raw.push_back(RawRecord{id, *question, *answer, false, record});
    for (auto &p : paraphrases)
      raw.push_back(RawRecord{id, std::move(p), *answer, true, record});
  }
}

std::vector<RawRecord> parse_stackfaq(std::istream &in, std::int64_t &next_thread) {
  pt::ptree tree;
  try {
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error &e) {
    throw Error(ErrorKind::MalformedRecord,
                "line " + std::to_string(e.line()) + ": " + e.message());
  }
  std::vector<RawRecord> raw;
  collect_threads(tree, raw, next_thread);
  return raw;
}

} // namespace

FaqCollection::FaqCollection(std::vector<FaqEntry> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty())
    throw Error(ErrorKind::EmptyCorpus, "corpus contains no entries");
  std::size_t max_thread = 0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].entry_id != i)
      throw Error(ErrorKind::MalformedRecord,
                  "entry ids must be dense and ordered from 0");
    if (blank(entries_[i].question))
      throw Error(ErrorKind::MalformedRecord,
                  "entry " + std::to_string(i) + ": empty question");
    max_thread = std::max(max_thread, entries_[i].thread_id);
  }
  threads_.assign(max_thread + 1, {});
  for (const auto &e : entries_) threads_[e.thread_id].push_back(e.entry_id);
  for (std::size_t t = 0; t < threads_.size(); ++t) {
    if (threads_[t].empty())
      throw Error(ErrorKind::MalformedRecord,
                  "thread ids are not contiguous (missing " + std::to_string(t) + ")");
    const auto originals = std::count_if(
        threads_[t].begin(), threads_[t].end(),
        [&](std::size_t id) { return !entries_[id].is_paraphrase; });
    if (originals > 1)
      throw Error(ErrorKind::DuplicateOriginal,
                  "thread " + std::to_string(t) + " has several originals");
    if (originals == 0)
      throw Error(ErrorKind::MalformedRecord,
                  "thread " + std::to_string(t) + " has no original question");
  }
}

std::size_t FaqCollection::original_of(std::size_t thread_id) const {
  for (std::size_t id : threads_[thread_id])
    if (!entries_[id].is_paraphrase) return id;
  return threads_[thread_id].front();
}

FaqCollection load_faq(std::istream &source, CorpusFormat format) {
  if (format == CorpusFormat::Jsonl) return load_jsonl(source);
  std::int64_t next_thread = 0;
  return assemble(parse_stackfaq(source, next_thread));
}

FaqCollection load_faq_file(const std::filesystem::path &path,
                            CorpusFormat format) {
  namespace fs = std::filesystem;
  if (format == CorpusFormat::StackFaqAdapter && fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto &e : fs::directory_iterator(path))
      if (e.is_regular_file() && lower(e.path().extension().string()) == ".xml")
        files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<RawRecord> raw;
    std::int64_t next_thread = 0;
    for (const auto &f : files) {
      std::ifstream in(f);
      auto part = parse_stackfaq(in, next_thread);
      raw.insert(raw.end(), part.begin(), part.end());
    }
    return assemble(std::move(raw));
  }
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open corpus " + path.string());
  return load_faq(in, format);
}

void write_jsonl(std::ostream &out, const FaqCollection &collection) {
  for (const auto &e : collection.entries()) {
    nlohmann::ordered_json j;
    j["thread_id"] = e.thread_id;
    j["question"] = e.question;
    j["answer"] = e.answer;
    j["is_paraphrase"] = e.is_paraphrase;
    out << j.dump() << '\n';
  }
}

RelevanceMatrix build_relevance_matrix(const FaqCollection &collection) {
  RelevanceMatrix m(collection.size());
  for (std::size_t t = 0; t < collection.thread_count(); ++t) {
    const auto &members = collection.thread_members(t);
    for (std::size_t i : members)
      for (std::size_t j : members) m.set(i, j, true);
  }
  return m;
}

std::vector<DatasetSplit> split_folds(const FaqCollection &collection,
                                      double train_frac, std::size_t folds,
                                      std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw Error(ErrorKind::InvalidFraction,
                "train fraction must lie strictly between 0 and 1");
  if (folds == 0)
    throw Error(ErrorKind::InvalidArgument, "fold count must be at least 1");

  std::vector<DatasetSplit> splits(folds);
  for (std::size_t k = 0; k < folds; ++k) splits[k].fold_index = k;

  for (std::size_t t = 0; t < collection.thread_count(); ++t) {
    const auto &members = collection.thread_members(t);
    std::vector<std::size_t> paraphrases;
    for (std::size_t id : members)
      if (collection[id].is_paraphrase) paraphrases.push_back(id);
    // The epsilon keeps e.g. 0.2 * 10 from flooring to 1.
    const double raw = (1.0 - train_frac) * static_cast<double>(members.size());
    const std::size_t test_count =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(raw + 1e-9)));
    if (paraphrases.size() < test_count)
      throw Error(ErrorKind::InsufficientParaphrases,
                  "thread " + std::to_string(t) + " has " +
                      std::to_string(paraphrases.size()) +
                      " paraphrases, needs at least " + std::to_string(test_count));
    Rng rng(mix_seed(seed, t));
    rng.shuffle(std::span<std::size_t>(paraphrases));
    for (std::size_t k = 0; k < folds; ++k) {
      std::vector<bool> held(paraphrases.size(), false);
      for (std::size_t j = 0; j < test_count; ++j)
        held[(k * test_count + j) % paraphrases.size()] = true;
      auto &split = splits[k];
      split.train_ids.push_back(collection.original_of(t));
      for (std::size_t p = 0; p < paraphrases.size(); ++p)
        (held[p] ? split.test_ids : split.train_ids).push_back(paraphrases[p]);
    }
  }
  for (auto &s : splits) {
    std::sort(s.train_ids.begin(), s.train_ids.end());
    std::sort(s.test_ids.begin(), s.test_ids.end());
  }
  return splits;
}

DatasetSplit limit_train_per_thread(const FaqCollection &collection,
                                    const DatasetSplit &split,
                                    std::size_t per_thread, std::uint64_t seed) {
  if (per_thread == 0)
    throw Error(ErrorKind::InvalidArgument, "per-thread limit must be at least 1");
  std::vector<std::vector<std::size_t>> by_thread(collection.thread_count());
  for (std::size_t id : split.train_ids)
    if (collection[id].is_paraphrase)
      by_thread[collection[id].thread_id].push_back(id);
  DatasetSplit limited{split.fold_index, {}, split.test_ids};
  for (std::size_t t = 0; t < by_thread.size(); ++t) {
    limited.train_ids.push_back(collection.original_of(t));
    auto &pool = by_thread[t];
    Rng rng(mix_seed(seed ^ 0x5eedULL, t));
    rng.shuffle(std::span<std::size_t>(pool));
    for (std::size_t j = 0; j + 1 < per_thread && j < pool.size(); ++j)
      limited.train_ids.push_back(pool[j]);
  }
  std::sort(limited.train_ids.begin(), limited.train_ids.end());
  return limited;
}

} // namespace faqforge
