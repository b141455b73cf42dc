#include "faqforge/preprocess.hpp"

#include <cstdlib>
#include <fstream>

#include "faqforge/error.hpp"

namespace faqforge {

namespace {

// Decodes one UTF-8 code point starting at text[i] and advances i. Invalid
// or truncated sequences decode byte by byte.
char32_t next_code_point(std::string_view text, std::size_t &i) {
  const auto b0 = static_cast<unsigned char>(text[i]);
  std::size_t extra = 0;
  char32_t cp = b0;
  if (b0 >= 0xC0 && b0 < 0xE0) { extra = 1; cp = b0 & 0x1F; }
  else if (b0 >= 0xE0 && b0 < 0xF0) { extra = 2; cp = b0 & 0x0F; }
  else if (b0 >= 0xF0 && b0 < 0xF8) { extra = 3; cp = b0 & 0x07; }
  if (extra == 0 || i + extra >= text.size()) {
    ++i;
    return b0;
  }
  for (std::size_t k = 1; k <= extra; ++k) {
    const auto b = static_cast<unsigned char>(text[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return b0;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += 1 + extra;
  return cp;
}

bool is_unicode_space(char32_t cp) {
  switch (cp) {
  case U' ': case U'\t': case U'\n': case U'\v': case U'\f': case U'\r':
  case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
  case 0x202F: case 0x205F: case 0x3000:
    return true;
  default:
    return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_punct(char32_t cp) {
  if (cp < 0x80) {
    const auto c = static_cast<unsigned char>(cp);
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
           (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
  }
  return cp == 0xA1 || cp == 0xAB || cp == 0xBB || cp == 0xBF ||
         (cp >= 0x2010 && cp <= 0x2027);
}

std::string strip_punct(std::string_view token) {
  std::vector<std::pair<std::size_t, char32_t>> cps; // (byte offset, cp)
  for (std::size_t i = 0; i < token.size();) {
    const std::size_t at = i;
    cps.emplace_back(at, next_code_point(token, i));
  }
  std::size_t lo = 0, hi = cps.size();
  while (lo < hi && is_punct(cps[lo].second)) ++lo;
  while (hi > lo && is_punct(cps[hi - 1].second)) --hi;
  if (lo == hi) return {};
  const std::size_t begin = cps[lo].first;
  const std::size_t end = hi < cps.size() ? cps[hi].first : token.size();
  return std::string(token.substr(begin, end - begin));
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
    s.pop_back();
  std::size_t lead = 0;
  while (lead < s.size() && (s[lead] == ' ' || s[lead] == '\t')) ++lead;
  return s.substr(lead);
}

} // namespace

TextResources::TextResources(std::unordered_set<std::string> stopwords,
                             std::unordered_map<std::string, std::string> lemmas)
    : stopwords_(std::move(stopwords)), lemmas_(std::move(lemmas)) {
  // Resolve chains so that lemma(lemma(w)) == lemma(w).
  for (auto &[surface, target] : lemmas_) {
    for (int hops = 0; hops < 16; ++hops) {
      const auto it = lemmas_.find(target);
      if (it == lemmas_.end() || it->second == target) break;
      target = it->second;
    }
  }
}

TextResources TextResources::load(const std::filesystem::path &stopwords,
                                  const std::filesystem::path &lexicon) {
  std::ifstream sw(stopwords);
  if (!sw) throw Error(ErrorKind::Io, "cannot open stopword list " + stopwords.string());
  std::unordered_set<std::string> stops;
  for (std::string line; std::getline(sw, line);) {
    line = trim(line);
    if (!line.empty()) stops.insert(line);
  }
  std::ifstream lx(lexicon);
  if (!lx) throw Error(ErrorKind::Io, "cannot open lemma lexicon " + lexicon.string());
  std::unordered_map<std::string, std::string> lemmas;
  std::size_t line_no = 0;
  for (std::string line; std::getline(lx, line);) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(ErrorKind::MalformedRecord, lexicon.string() + " line " +
                                                  std::to_string(line_no) +
                                                  ": expected surface<TAB>lemma");
    lemmas.emplace(line.substr(0, tab), line.substr(tab + 1));
  }
  return TextResources(std::move(stops), std::move(lemmas));
}

std::filesystem::path default_data_dir() {
  if (const char *env = std::getenv("FAQFORGE_DATA_DIR")) return env;
  return FAQFORGE_DATA_DIR;
}

TextResources TextResources::load_default() {
  const auto dir = default_data_dir();
  return load(dir / "stopwords_en.txt", dir / "lemmas_en.tsv");
}

bool TextResources::is_stopword(std::string_view word) const {
  return stopwords_.contains(std::string(word));
}

std::string TextResources::lemma(const std::string &word) const {
  const auto it = lemmas_.find(word);
  return it == lemmas_.end() ? word : it->second;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    std::string t = strip_punct(current);
    if (!t.empty()) out.push_back(std::move(t));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size();) {
    const std::size_t start = i;
    const char32_t cp = next_code_point(text, i);
    if (is_unicode_space(cp)) {
      flush();
      continue;
    }
    for (std::size_t k = start; k < i; ++k) {
      char c = text[k];
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      current.push_back(c);
    }
  }
  flush();
  return out;
}

TokenSequence preprocess(std::string_view text, const TextResources &resources) {
  TokenSequence seq;
  for (auto &word : tokenize(text)) {
    if (resources.is_stopword(word)) continue;
    std::string lemma = resources.lemma(word);
    if (lemma.empty() || resources.is_stopword(lemma)) continue;
    seq.tokens.push_back(std::move(lemma));
  }
  return seq;
}

std::string join_tokens(const std::vector<std::string> &tokens) {
  std::string out;
  for (const auto &t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

} // namespace faqforge
