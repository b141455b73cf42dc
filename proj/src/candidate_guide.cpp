#include "faqforge/candidate_guide.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "faqforge/error.hpp"

namespace faqforge {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::optional<VectorXd> mean_vector(const TokenSequence &q, const EmbeddingTable &table) {
  VectorXd sum = VectorXd::Zero(static_cast<Index>(table.dim()));
  std::size_t found = 0;
  for (const auto &t : q.tokens)
    if (auto v = table.embed(t, OovPolicy::Skip)) {
      sum += *v;
      ++found;
    }
  if (found == 0) return std::nullopt;
  return sum / static_cast<double>(found);
}

double cosine(const std::optional<VectorXd> &a, const std::optional<VectorXd> &b) {
  if (!a || !b) return 0.0;
  const double denom = a->norm() * b->norm();
  return denom > 0.0 ? std::clamp(a->dot(*b) / denom, -1.0, 1.0) : 0.0;
}

PairFeatures features_with_means(const TokenSequence &q1, const TokenSequence &q2,
                                 const std::optional<VectorXd> &m1,
                                 const std::optional<VectorXd> &m2) {
  PairFeatures f;
  const std::set<std::string> s1(q1.tokens.begin(), q1.tokens.end());
  const std::set<std::string> s2(q2.tokens.begin(), q2.tokens.end());
  std::size_t common = 0;
  for (const auto &t : s1) common += s2.count(t);
  const std::size_t uni = s1.size() + s2.size() - common;
  f.entity_overlap = uni == 0 ? 1.0 : static_cast<double>(common) / static_cast<double>(uni);
  const std::size_t longest = std::max(q1.size(), q2.size());
  if (longest == 0)
    f.levenshtein_norm = 0.0;
  else if (q1.empty() || q2.empty())
    f.levenshtein_norm = 1.0;
  else
    f.levenshtein_norm = static_cast<double>(token_levenshtein(q1.tokens, q2.tokens)) /
                         static_cast<double>(longest);
  f.embedding_similarity = cosine(m1, m2);
  return f;
}

VectorXd dense_input(const VectorXd &a, const VectorXd &b, const PairFeatures &f) {
  const Index u = a.size();
  VectorXd x(2 * u + 3);
  x.head(u) = (a - b).cwiseAbs();
  x.segment(u, u) = a.cwiseProduct(b);
  x[2 * u] = f.entity_overlap;
  x[2 * u + 1] = f.levenshtein_norm;
  x[2 * u + 2] = f.embedding_similarity;
  return x;
}

} // namespace

PairFeatures pair_features(const TokenSequence &q1, const TokenSequence &q2,
                           const EmbeddingTable &table) {
  return features_with_means(q1, q2, mean_vector(q1, table), mean_vector(q2, table));
}

void ClassifierConfig::validate() const {
  if (gru_units == 0 || dense_units == 0 || batch_size == 0)
    throw Error(ErrorKind::InvalidArgument, "classifier sizes must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0))
    throw Error(ErrorKind::InvalidArgument, "dropout must lie in [0, 1)");
}

nlohmann::ordered_json to_json(const ClassifierConfig &c) {
  return {{"gru_units", c.gru_units}, {"dense_units", c.dense_units},
          {"dropout", c.dropout},     {"batch_size", c.batch_size},
          {"epochs", c.epochs},       {"learning_rate", c.learning_rate},
          {"seed", c.seed}};
}

ClassifierConfig classifier_config_from_json(const nlohmann::json &j) {
  ClassifierConfig c;
  c.gru_units = j.value("gru_units", c.gru_units);
  c.dense_units = j.value("dense_units", c.dense_units);
  c.dropout = j.value("dropout", c.dropout);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.seed = j.value("seed", c.seed);
  return c;
}

CandidateClassifier::CandidateClassifier(const ClassifierConfig &config,
                                         std::size_t input_dim)
    : config_(config), input_dim_(input_dim) {
  config_.validate();
  const auto U = static_cast<Index>(config_.gru_units);
  const auto D = static_cast<Index>(config_.dense_units);
  gru_ = nn::Gru("gru", input_dim, config_.gru_units);
  hidden_weight_ = nn::Param("dense.weight", D, 2 * U + 3);
  hidden_bias_ = nn::Param("dense.bias", D, 1);
  out_weight_ = nn::Param("output.weight", 2, D);
  out_bias_ = nn::Param("output.bias", 2, 1);
  Rng rng(mix_seed(config_.seed, 0xc1a5));
  gru_.init(rng);
  hidden_weight_.init_uniform(rng, 1.0 / std::sqrt(static_cast<double>(2 * U + 3)));
  out_weight_.init_uniform(rng, 1.0 / std::sqrt(static_cast<double>(D)));
}

std::vector<nn::Param *> CandidateClassifier::parameters() {
  return {&gru_.gates_weight, &gru_.gates_bias, &gru_.cand_weight, &gru_.cand_bias,
          &hidden_weight_,    &hidden_bias_,    &out_weight_,      &out_bias_};
}

std::vector<const nn::Param *> CandidateClassifier::parameters() const {
  auto ps = const_cast<CandidateClassifier *>(this)->parameters();
  return {ps.begin(), ps.end()};
}

MatrixXd CandidateClassifier::embed(const TokenSequence &question,
                                    const EmbeddingTable &table) const {
  if (table.dim() != input_dim_)
    throw Error(ErrorKind::DimensionMismatch, "embedding dim does not match classifier");
  MatrixXd x(static_cast<Index>(input_dim_), static_cast<Index>(question.size()));
  for (std::size_t s = 0; s < question.size(); ++s)
    x.col(static_cast<Index>(s)) = *table.embed(question.tokens[s], OovPolicy::HashRandom);
  return x;
}

VectorXd CandidateClassifier::encode(const TokenSequence &question,
                                     const EmbeddingTable &table) const {
  const MatrixXd x = embed(question, table);
  VectorXd h = VectorXd::Zero(static_cast<Index>(config_.gru_units));
  nn::GruCache cache;
  for (Index s = 0; s < x.cols(); ++s) {
    gru_.forward(x.col(s), h, cache);
    h = cache.h;
  }
  return h;
}

Eigen::Vector2d CandidateClassifier::predict(const VectorXd &a, const VectorXd &b,
                                             const PairFeatures &features) const {
  const VectorXd x = dense_input(a, b, features);
  const VectorXd hidden =
      (hidden_weight_.value * x + hidden_bias_.value.col(0)).array().tanh();
  const VectorXd p = nn::softmax(out_weight_.value * hidden + out_bias_.value.col(0));
  return Eigen::Vector2d(p[0], p[1]);
}

Eigen::Vector2d CandidateClassifier::predict(const TokenSequence &q1, const TokenSequence &q2,
                                             const EmbeddingTable &table) const {
  return predict(encode(q1, table), encode(q2, table), pair_features(q1, q2, table));
}

Archive CandidateClassifier::to_archive() const {
  Archive a;
  a.kind = "candidate-classifier";
  a.meta["config"] = to_json(config_);
  a.meta["input_dim"] = input_dim_;
  a.meta["loss_history"] = loss_history_;
  for (const nn::Param *p : parameters()) a.tensors.push_back({p->name, p->value});
  return a;
}

CandidateClassifier CandidateClassifier::from_archive(const Archive &archive) {
  if (archive.kind != "candidate-classifier")
    throw Error(ErrorKind::BadArchive,
                "archive holds '" + archive.kind + "', not a candidate classifier");
  try {
    CandidateClassifier c(classifier_config_from_json(archive.meta.at("config")),
                          archive.meta.at("input_dim").get<std::size_t>());
    c.loss_history_ = archive.meta.at("loss_history").get<std::vector<double>>();
    for (nn::Param *p : c.parameters()) {
      const auto &value = archive.tensor(p->name);
      if (value.rows() != p->value.rows() || value.cols() != p->value.cols())
        throw Error(ErrorKind::BadArchive, "tensor '" + p->name + "' has the wrong shape");
      p->value = value;
    }
    return c;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::BadArchive, std::string("bad classifier metadata: ") + e.what());
  }
}

std::string CandidateClassifier::fingerprint() const {
  std::ostringstream ss;
  write_archive(ss, to_archive());
  return sha256_hex(ss.str());
}

std::vector<LabeledPair> sample_training_pairs(const RelevanceMatrix &matrix,
                                               const DatasetSplit &split,
                                               std::uint64_t seed) {
  const auto &ids = split.train_ids;
  std::vector<LabeledPair> pairs;
  std::size_t negatives_available = 0;
  for (std::size_t x = 0; x < ids.size(); ++x)
    for (std::size_t y = x + 1; y < ids.size(); ++y) {
      if (matrix(ids[x], ids[y]))
        pairs.push_back({ids[x], ids[y], true});
      else
        ++negatives_available;
    }
  if (pairs.empty())
    throw Error(ErrorKind::NoPositives, "train split has no relevant question pairs");
  if (negatives_available == 0)
    throw Error(ErrorKind::NoNegatives, "train split has no non-relevant question pairs");

  const std::size_t wanted = std::min(pairs.size(), negatives_available);
  Rng rng(mix_seed(seed, 0x9a17));
  if (wanted * 2 >= negatives_available) {
    std::vector<LabeledPair> all;
    for (std::size_t x = 0; x < ids.size(); ++x)
      for (std::size_t y = x + 1; y < ids.size(); ++y)
        if (!matrix(ids[x], ids[y])) all.push_back({ids[x], ids[y], false});
    rng.shuffle(std::span<LabeledPair>(all));
    pairs.insert(pairs.end(), all.begin(), all.begin() + static_cast<std::ptrdiff_t>(wanted));
    return pairs;
  }
  std::set<std::pair<std::size_t, std::size_t>> chosen;
  while (chosen.size() < wanted) {
    std::size_t x = rng.below(ids.size()), y = rng.below(ids.size());
    if (x == y) continue;
    if (x > y) std::swap(x, y);
    if (matrix(ids[x], ids[y])) continue;
    if (chosen.emplace(ids[x], ids[y]).second) pairs.push_back({ids[x], ids[y], false});
  }
  return pairs;
}

CandidateClassifier train_classifier(const FaqCollection &collection,
                                     const RelevanceMatrix &matrix,
                                     const DatasetSplit &split,
                                     std::span<const TokenSequence> tokens,
                                     const EmbeddingTable &table,
                                     const ClassifierConfig &config) {
  (void)collection;
  auto pairs = sample_training_pairs(matrix, split, config.seed);
  CandidateClassifier model(config, table.dim());

  std::unordered_map<std::size_t, MatrixXd> inputs;
  std::unordered_map<std::size_t, std::optional<VectorXd>> means;
  for (const auto &p : pairs)
    for (std::size_t id : {p.a, p.b})
      if (!inputs.contains(id)) {
        inputs.emplace(id, model.embed(tokens[id], table));
        means.emplace(id, mean_vector(tokens[id], table));
      }
  std::vector<PairFeatures> features;
  for (const auto &p : pairs)
    features.push_back(features_with_means(tokens[p.a], tokens[p.b], means.at(p.a),
                                           means.at(p.b)));

  nn::AdamOptions opts;
  opts.learning_rate = config.learning_rate;
  nn::Adam adam(opts);
  auto params = model.parameters();
  Rng rng(mix_seed(config.seed, 0xd20f));
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto U = static_cast<Index>(config.gru_units);

  struct Encoded {
    std::vector<nn::GruCache> steps;
    VectorXd h;
    VectorXd grad;
  };

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      for (nn::Param *p : params) p->zero_grad();
      const double scale = 1.0 / static_cast<double>(end - begin);

      // Each distinct question in the batch is encoded and back-propagated once.
      std::map<std::size_t, Encoded> encoded;
      for (std::size_t k = begin; k < end; ++k)
        for (std::size_t id : {pairs[order[k]].a, pairs[order[k]].b}) {
          if (encoded.contains(id)) continue;
          Encoded e;
          const MatrixXd &x = inputs.at(id);
          e.steps.resize(static_cast<std::size_t>(x.cols()));
          VectorXd h = VectorXd::Zero(U);
          for (Index s = 0; s < x.cols(); ++s) {
            model.gru_.forward(x.col(s), h, e.steps[static_cast<std::size_t>(s)]);
            h = e.steps[static_cast<std::size_t>(s)].h;
          }
          e.h = h;
          e.grad = VectorXd::Zero(U);
          encoded.emplace(id, std::move(e));
        }

      for (std::size_t k = begin; k < end; ++k) {
        const auto &pair = pairs[order[k]];
        Encoded &ea = encoded.at(pair.a);
        Encoded &eb = encoded.at(pair.b);
        const VectorXd x = dense_input(ea.h, eb.h, features[order[k]]);
        const VectorXd hidden =
            (model.hidden_weight_.value * x + model.hidden_bias_.value.col(0)).array().tanh();
        const VectorXd mask =
            config.dropout > 0.0
                ? nn::dropout_mask(hidden.size(), config.dropout, rng)
                : VectorXd::Ones(hidden.size());
        const VectorXd dropped = hidden.cwiseProduct(mask);
        const VectorXd p = nn::softmax(model.out_weight_.value * dropped +
                                       model.out_bias_.value.col(0));
        const int label = pair.relevant ? 0 : 1;
        total -= std::log(std::max(p[label], 1e-300));

        VectorXd dlogits = p;
        dlogits[label] -= 1.0;
        dlogits *= scale;
        model.out_weight_.grad.noalias() += dlogits * dropped.transpose();
        model.out_bias_.grad.col(0) += dlogits;
        const VectorXd dhidden =
            (model.out_weight_.value.transpose() * dlogits).cwiseProduct(mask);
        const VectorXd dpre =
            dhidden.cwiseProduct((1.0 - hidden.array().square()).matrix());
        model.hidden_weight_.grad.noalias() += dpre * x.transpose();
        model.hidden_bias_.grad.col(0) += dpre;
        const VectorXd dx = model.hidden_weight_.value.transpose() * dpre;
        const VectorXd dabs = dx.head(U);
        const VectorXd dprod = dx.segment(U, U);
        const VectorXd sign = (ea.h - eb.h).unaryExpr(
            [](double d) { return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0); });
        ea.grad += dabs.cwiseProduct(sign) + dprod.cwiseProduct(eb.h);
        eb.grad += -dabs.cwiseProduct(sign) + dprod.cwiseProduct(ea.h);
      }

      VectorXd dx, dh_prev;
      for (auto &[id, e] : encoded) {
        VectorXd dh = e.grad;
        for (std::size_t s = e.steps.size(); s-- > 0;) {
          model.gru_.backward(e.steps[s], dh, dx, dh_prev);
          dh = dh_prev;
        }
      }
      adam.step(params);
    }
    const double mean = total / static_cast<double>(order.size());
    if (!std::isfinite(mean))
      throw Error(ErrorKind::NonFiniteLoss,
                  "classifier training diverged at epoch " + std::to_string(epoch + 1));
    model.loss_history_.push_back(mean);
  }
  for (nn::Param *p : params) p->zero_grad();
  return model;
}

ClassifierScorer::ClassifierScorer(const CandidateClassifier &classifier,
                                   std::vector<TokenSequence> indexed,
                                   const EmbeddingTable &table)
    : classifier_(classifier), table_(table), indexed_(std::move(indexed)) {
  encodings_.reserve(indexed_.size());
  means_.reserve(indexed_.size());
  for (const auto &q : indexed_) {
    encodings_.push_back(classifier_.encode(q, table_));
    means_.push_back(mean_vector(q, table_));
  }
}

std::vector<double> ClassifierScorer::score(const TokenSequence &query) const {
  const VectorXd qe = classifier_.encode(query, table_);
  const auto qm = mean_vector(query, table_);
  std::vector<double> out;
  out.reserve(indexed_.size());
  for (std::size_t i = 0; i < indexed_.size(); ++i) {
    const auto f = features_with_means(query, indexed_[i], qm, means_[i]);
    out.push_back(classifier_.predict(qe, encodings_[i], f)[0]);
  }
  return out;
}

CandidateSet select_candidates(const CandidateScorer &scorer, const Query &query,
                               std::size_t index_size, std::size_t k,
                               double prob_threshold) {
  CandidateSet set;
  set.k = k;
  set.prob_threshold = prob_threshold;
  set.all_probabilities = scorer.score(query.tokens);
  if (set.all_probabilities.size() != index_size)
    throw Error(ErrorKind::DimensionMismatch, "scorer is bound to a different index");
  std::vector<std::size_t> order(index_size);
  for (std::size_t i = 0; i < index_size; ++i) order[i] = i;
  const auto &p = set.all_probabilities;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return p[x] > p[y]; });
  for (std::size_t pos : order) {
    if (set.positions.size() >= k || p[pos] < prob_threshold) break;
    set.positions.push_back(pos);
    set.probabilities.push_back(p[pos]);
  }
  if (set.positions.empty()) {
    set.fallback = true;
    set.positions = order;
    for (std::size_t pos : order) set.probabilities.push_back(p[pos]);
  }
  return set;
}

RankedResult rank_guided(const Query &query, const TranslatedFaq &index,
                         const CandidateScorer &scorer, const EmbeddingTable &table,
                         std::size_t k, double prob_threshold,
                         std::optional<std::size_t> top_k) {
  if (index.tuples.empty()) throw Error(ErrorKind::EmptyIndex, "translated index is empty");
  const auto candidates =
      select_candidates(scorer, query, index.tuples.size(), k, prob_threshold);
  auto result = rank_positions(query, index, candidates.positions, table);

  std::vector<bool> taken(index.tuples.size(), false);
  for (std::size_t pos : candidates.positions) taken[pos] = true;
  std::vector<std::size_t> rest;
  for (std::size_t pos = 0; pos < index.tuples.size(); ++pos)
    if (!taken[pos]) rest.push_back(pos);
  const auto &p = candidates.all_probabilities;
  std::sort(rest.begin(), rest.end(), [&](std::size_t x, std::size_t y) {
    if (p[x] != p[y]) return p[x] > p[y];
    return index.tuples[x].entry_id < index.tuples[y].entry_id;
  });
  const auto keywords = canonicalize(query.predicted_keywords);
  for (std::size_t pos : rest) {
    const auto &t = index.tuples[pos];
    result.entries.push_back(
        RankedEntry{t.entry_id, combined_distance(keywords, t.keywords, table), t.question,
                    t.answer});
  }
  if (top_k && *top_k < result.entries.size()) result.entries.resize(*top_k);
  return result;
}

} // namespace faqforge
