#include "faqforge/translated_faq.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "faqforge/error.hpp"

namespace faqforge {

std::vector<std::string> canonicalize(std::vector<std::string> keywords) {
  std::sort(keywords.begin(), keywords.end());
  keywords.erase(std::unique(keywords.begin(), keywords.end()), keywords.end());
  return keywords;
}

TranslatedFaq translate_faq(const Seq2SeqModel &model, const FaqCollection &collection,
                            std::span<const TokenSequence> tokens,
                            const EmbeddingTable &table,
                            std::span<const std::size_t> members) {
  std::vector<std::size_t> ids(members.begin(), members.end());
  if (ids.empty()) {
    ids.resize(collection.size());
    std::iota(ids.begin(), ids.end(), 0);
  }
  std::sort(ids.begin(), ids.end());
  TranslatedFaq index;
  index.model_fingerprint = model.fingerprint();
  for (std::size_t id : ids) {
    const auto &e = collection[id];
    index.tuples.push_back(TranslatedTuple{
        id, e.question, canonicalize(model.predict(tokens[id], table)), e.answer});
  }
  return index;
}

TranslatedFaq translate_faq(const Seq2SeqModel &model, const FaqCollection &collection,
                            const TextResources &resources, const EmbeddingTable &table) {
  std::vector<TokenSequence> tokens;
  for (const auto &e : collection.entries()) tokens.push_back(preprocess(e.question, resources));
  return translate_faq(model, collection, tokens, table);
}

void write_index_jsonl(std::ostream &out, const TranslatedFaq &index) {
  nlohmann::ordered_json header;
  header["model_fingerprint"] = index.model_fingerprint;
  header["config_digest"] = index.config_digest;
  header["count"] = index.tuples.size();
  out << header.dump() << '\n';
  for (const auto &t : index.tuples) {
    nlohmann::ordered_json j;
    j["entry_id"] = t.entry_id;
    j["question"] = t.question;
    j["keywords"] = t.keywords;
    j["answer"] = t.answer;
    out << j.dump() << '\n';
  }
}

TranslatedFaq read_index_jsonl(std::istream &in) {
  TranslatedFaq index;
  std::string line;
  std::size_t line_no = 0;
  std::size_t expected = 0;
  try {
    if (!std::getline(in, line))
      throw Error(ErrorKind::MalformedRecord, "index file is empty");
    ++line_no;
    const auto header = nlohmann::json::parse(line);
    index.model_fingerprint = header.at("model_fingerprint").get<std::string>();
    index.config_digest = header.value("config_digest", "");
    expected = header.at("count").get<std::size_t>();
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      index.tuples.push_back(TranslatedTuple{
          j.at("entry_id").get<std::size_t>(), j.at("question").get<std::string>(),
          canonicalize(j.at("keywords").get<std::vector<std::string>>()),
          j.at("answer").get<std::string>()});
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::MalformedRecord,
                "index line " + std::to_string(line_no) + ": " + e.what());
  }
  if (index.tuples.size() != expected)
    throw Error(ErrorKind::MalformedRecord, "index header promises " +
                                                std::to_string(expected) + " records, found " +
                                                std::to_string(index.tuples.size()));
  return index;
}

} // namespace faqforge
