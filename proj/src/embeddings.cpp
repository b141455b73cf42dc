#include "faqforge/embeddings.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <boost/algorithm/string/case_conv.hpp>

#include "faqforge/error.hpp"
#include "faqforge/rng.hpp"

namespace faqforge {

namespace {

float decode_le_float(const unsigned char *p) {
  std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                       static_cast<std::uint32_t>(p[1]) << 8 |
                       static_cast<std::uint32_t>(p[2]) << 16 |
                       static_cast<std::uint32_t>(p[3]) << 24;
  return std::bit_cast<float>(bits);
}

void encode_le_float(float v, unsigned char *p) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  p[0] = static_cast<unsigned char>(bits);
  p[1] = static_cast<unsigned char>(bits >> 8);
  p[2] = static_cast<unsigned char>(bits >> 16);
  p[3] = static_cast<unsigned char>(bits >> 24);
}

std::pair<std::size_t, std::size_t> parse_header(const std::string &line) {
  std::istringstream hs(line);
  long long vocab = -1, dim = -1;
  std::string extra;
  if (!(hs >> vocab >> dim) || (hs >> extra) || vocab < 0 || dim <= 0)
    throw Error(ErrorKind::BadHeader,
                "expected '<vocab_size> <dim>' header, got '" + line + "'");
  return {static_cast<std::size_t>(vocab), static_cast<std::size_t>(dim)};
}

} // namespace

void EmbeddingTable::insert(const std::string &token, std::vector<float> vector) {
  if (vector.size() != dim_)
    throw Error(ErrorKind::DimensionMismatch,
                "vector for '" + token + "' has length " +
                    std::to_string(vector.size()) + ", table dim is " +
                    std::to_string(dim_));
  if (const auto it = index_.find(token); it != index_.end()) {
    vectors_[it->second] = std::move(vector);
    return;
  }
  index_.emplace(token, words_.size());
  words_.push_back(token);
  vectors_.push_back(std::move(vector));
}

const std::vector<float> *EmbeddingTable::find(const std::string &token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? nullptr : &vectors_[it->second];
}

std::optional<Eigen::VectorXd> EmbeddingTable::embed(const std::string &token,
                                                     OovPolicy policy) const {
  if (const auto *v = find(token)) {
    Eigen::VectorXd out(dim_);
    for (std::size_t i = 0; i < dim_; ++i) out[i] = (*v)[i];
    return out;
  }
  switch (policy) {
  case OovPolicy::Zero: return Eigen::VectorXd::Zero(dim_);
  case OovPolicy::HashRandom: return hash_random_vector(token, dim_);
  case OovPolicy::Skip: return std::nullopt;
  }
  return std::nullopt;
}

EmbeddingTable load_word2vec_binary(std::istream &in, const VocabularyFilter *filter) {
  std::string header;
  if (!std::getline(in, header))
    throw Error(ErrorKind::BadHeader, "missing word2vec header");
  const auto [vocab, dim] = parse_header(header);
  EmbeddingTable table(dim);
  std::vector<unsigned char> raw(dim * sizeof(float));
  for (std::size_t w = 0; w < vocab; ++w) {
    std::string token;
    int c = in.get();
    while (c == '\n' || c == '\r') c = in.get();
    while (c != std::char_traits<char>::eof() && c != ' ') {
      token.push_back(static_cast<char>(c));
      c = in.get();
    }
    if (c == std::char_traits<char>::eof())
      throw Error(ErrorKind::TruncatedStream,
                  "stream ended after " + std::to_string(w) + " of " +
                      std::to_string(vocab) + " vectors");
    in.read(reinterpret_cast<char *>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
      throw Error(ErrorKind::TruncatedStream,
                  "vector " + std::to_string(w) + " ('" + token + "') is truncated");
    if (filter && !filter->contains(token)) continue;
    std::vector<float> v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = decode_le_float(&raw[i * 4]);
    table.insert(token, std::move(v));
  }
  return table;
}

EmbeddingTable load_word2vec_text(std::istream &in, const VocabularyFilter *filter) {
  EmbeddingTable table;
  bool have_dim = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    std::vector<float> v;
    for (float x; ls >> x;) v.push_back(x);
    if (line_no == 1 && v.size() == 1) {
      table = EmbeddingTable(parse_header(line).second);
      have_dim = true;
      continue;
    }
    if (!ls.eof())
      throw Error(ErrorKind::MalformedRecord,
                  "embedding line " + std::to_string(line_no) + " has a non-numeric value");
    if (!have_dim) {
      table = EmbeddingTable(v.size());
      have_dim = true;
    }
    if (filter && !filter->contains(token)) continue;
    table.insert(token, std::move(v));
  }
  if (!have_dim) throw Error(ErrorKind::BadHeader, "empty embedding file");
  return table;
}

EmbeddingTable load_embeddings_file(const std::filesystem::path &path,
                                    const VocabularyFilter *filter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open embeddings " + path.string());
  const std::string ext = boost::algorithm::to_lower_copy(path.extension().string());
  if (ext == ".txt" || ext == ".vec") return load_word2vec_text(in, filter);
  return load_word2vec_binary(in, filter);
}

void write_word2vec_binary(std::ostream &out, const EmbeddingTable &table) {
  out << table.size() << ' ' << table.dim() << '\n';
  std::vector<unsigned char> raw(table.dim() * sizeof(float));
  for (const auto &w : table.words()) {
    const auto &v = *table.find(w);
    for (std::size_t i = 0; i < v.size(); ++i) encode_le_float(v[i], &raw[i * 4]);
    out << w << ' ';
    out.write(reinterpret_cast<const char *>(raw.data()),
              static_cast<std::streamsize>(raw.size()));
    out << '\n';
  }
}

Eigen::VectorXd hash_random_vector(const std::string &token, std::size_t dim) {
  Rng rng(fnv1a64(token));
  Eigen::VectorXd v(dim);
  for (std::size_t i = 0; i < dim; ++i) v[i] = rng.normal();
  const double n = v.norm();
  if (n > 0.0) v /= n;
  return v;
}

} // namespace faqforge
