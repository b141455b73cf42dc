#include "faqforge/intent_keywords.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include <json.hpp>

#include "faqforge/error.hpp"

namespace faqforge {

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

} // namespace

std::vector<QuestionGroup> group_questions(const RelevanceMatrix &matrix,
                                           std::span<const TokenSequence> tokens,
                                           std::span<const std::size_t> members) {
  std::vector<std::size_t> ids(members.begin(), members.end());
  if (ids.empty()) {
    ids.resize(matrix.size());
    std::iota(ids.begin(), ids.end(), 0);
  }
  std::sort(ids.begin(), ids.end());
  DisjointSets sets(ids.size());
  for (std::size_t a = 0; a < ids.size(); ++a)
    for (std::size_t b = a + 1; b < ids.size(); ++b)
      if (matrix(ids[a], ids[b]) || matrix(ids[b], ids[a])) sets.unite(a, b);

  std::vector<QuestionGroup> groups;
  std::vector<std::size_t> slot(ids.size(), std::numeric_limits<std::size_t>::max());
  for (std::size_t a = 0; a < ids.size(); ++a) {
    const std::size_t root = sets.find(a);
    if (slot[root] == std::numeric_limits<std::size_t>::max()) {
      slot[root] = groups.size();
      groups.push_back(QuestionGroup{ids[a], {}, {}});
    }
    auto &g = groups[slot[root]];
    g.member_ids.push_back(ids[a]);
    const auto &toks = tokens[ids[a]].tokens;
    g.document.insert(g.document.end(), toks.begin(), toks.end());
  }
  return groups;
}

std::vector<std::size_t> group_lookup(std::span<const QuestionGroup> groups,
                                      std::size_t entry_count) {
  std::vector<std::size_t> out(entry_count, static_cast<std::size_t>(-1));
  for (const auto &g : groups)
    for (std::size_t id : g.member_ids) out[id] = g.group_id;
  return out;
}

double TfidfTable::score(std::size_t group_index, const std::string &token) const {
  const auto &m = scores[group_index];
  const auto it = m.find(token);
  return it == m.end() ? 0.0 : it->second;
}

TfidfTable compute_tfidf(std::span<const QuestionGroup> groups) {
  if (groups.empty())
    throw Error(ErrorKind::EmptyDocument, "no question groups to score");
  std::map<std::string, std::size_t> df;
  std::vector<std::map<std::string, std::size_t>> counts(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].document.empty())
      throw Error(ErrorKind::EmptyDocument,
                  "group " + std::to_string(groups[g].group_id) +
                      " has no content tokens");
    for (const auto &w : groups[g].document) ++counts[g][w];
    for (const auto &[w, c] : counts[g]) ++df[w];
  }

  const auto n = static_cast<double>(groups.size());
  TfidfTable table;
  table.degenerate = groups.size() == 1;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    table.group_ids.push_back(groups[g].group_id);
    const auto len = static_cast<double>(groups[g].document.size());
    std::map<std::string, double> raw;
    double top = 0.0;
    for (const auto &[w, c] : counts[g]) {
      const double s = (static_cast<double>(c) / len) *
                       std::log10(n / static_cast<double>(df[w]));
      raw[w] = s;
      top = std::max(top, s);
    }
    if (top > 0.0)
      for (auto &[w, s] : raw) s /= top;
    table.scores.push_back(std::move(raw));
  }
  return table;
}

std::vector<KeywordSet> extract_keywords(const TfidfTable &table, double tau) {
  if (tau < 0.0) throw Error(ErrorKind::InvalidArgument, "tau must be >= 0");
  std::vector<KeywordSet> out;
  for (std::size_t g = 0; g < table.scores.size(); ++g) {
    KeywordSet set{table.group_ids[g], tau, {}, false};
    const std::string *best = nullptr;
    double best_score = -1.0;
    for (const auto &[w, s] : table.scores[g]) {  // map order: alphabetical
      if (s > 0.0 && s >= tau) set.keywords.push_back(w);
      if (s > best_score) {
        best_score = s;
        best = &w;
      }
    }
    if (set.keywords.empty() && best != nullptr) {
      set.keywords.push_back(*best);
      set.fallback = true;
    }
    out.push_back(std::move(set));
  }
  return out;
}

void write_keywords_jsonl(std::ostream &out, std::span<const KeywordSet> sets) {
  for (const auto &s : sets) {
    nlohmann::ordered_json j;
    j["group_id"] = s.group_id;
    j["tau"] = s.tau;
    j["keywords"] = s.keywords;
    j["fallback"] = s.fallback;
    out << j.dump() << '\n';
  }
}

std::vector<KeywordSet> read_keywords_jsonl(std::istream &in) {
  std::vector<KeywordSet> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back(KeywordSet{j.at("group_id").get<std::size_t>(),
                               j.at("tau").get<double>(),
                               j.at("keywords").get<std::vector<std::string>>(),
                               j.value("fallback", false)});
    } catch (const nlohmann::json::exception &e) {
      throw Error(ErrorKind::MalformedRecord,
                  "keywords line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

} // namespace faqforge
