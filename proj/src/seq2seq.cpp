#include "faqforge/seq2seq.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "faqforge/error.hpp"

namespace faqforge {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void Seq2SeqConfig::validate() const {
  if (encoder_units == 0 || decoder_embedding_dim == 0 || batch_size == 0)
    throw Error(ErrorKind::InvalidArgument, "seq2seq sizes must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0))
    throw Error(ErrorKind::InvalidArgument, "dropout must lie in [0, 1)");
  if (!(learning_rate > 0.0))
    throw Error(ErrorKind::InvalidArgument, "learning rate must be positive");
}

nlohmann::ordered_json to_json(const Seq2SeqConfig &c) {
  return {{"encoder_units", c.encoder_units},
          {"decoder_units", c.effective_decoder_units()},
          {"decoder_embedding_dim", c.decoder_embedding_dim},
          {"attention", "concat-luong"},
          {"dropout", c.dropout},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"max_decode_len", c.max_decode_len},
          {"learning_rate", c.learning_rate},
          {"seed", c.seed}};
}

Seq2SeqConfig seq2seq_config_from_json(const nlohmann::json &j) {
  Seq2SeqConfig c;
  c.encoder_units = j.value("encoder_units", c.encoder_units);
  c.decoder_units = j.value("decoder_units", c.decoder_units);
  c.decoder_embedding_dim = j.value("decoder_embedding_dim", c.decoder_embedding_dim);
  c.dropout = j.value("dropout", c.dropout);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.max_decode_len = j.value("max_decode_len", c.max_decode_len);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.seed = j.value("seed", c.seed);
  return c;
}

std::vector<TrainingExample> build_training_set(std::span<const TokenSequence> tokens,
                                                std::span<const QuestionGroup> groups,
                                                std::span<const KeywordSet> keyword_sets,
                                                const DatasetSplit &split) {
  const auto lookup = group_lookup(groups, tokens.size());
  std::vector<TrainingExample> out;
  for (std::size_t id : split.train_ids) {
    const std::size_t g = id < lookup.size() ? lookup[id] : static_cast<std::size_t>(-1);
    const auto it = std::find_if(keyword_sets.begin(), keyword_sets.end(),
                                 [&](const KeywordSet &k) { return k.group_id == g; });
    if (it == keyword_sets.end() || it->keywords.empty())
      throw Error(ErrorKind::MissingKeywordSet,
                  "entry " + std::to_string(id) + " has no intent keywords");
    TrainingExample ex;
    ex.input = tokens[id];
    ex.input.source_entry_id = id;
    ex.target.push_back(kStartToken);
    ex.target.insert(ex.target.end(), it->keywords.begin(), it->keywords.end());
    ex.target.push_back(kEndToken);
    out.push_back(std::move(ex));
  }
  return out;
}

double attention_score(const VectorXd &decoder_state, const VectorXd &encoder_state,
                       const AttentionParams &params) {
  if (params.weight.cols() != decoder_state.size() + encoder_state.size() ||
      params.weight.rows() != params.v.size())
    throw Error(ErrorKind::DimensionMismatch,
                "attention parameters do not match state widths");
  VectorXd joined(decoder_state.size() + encoder_state.size());
  joined << decoder_state, encoder_state;
  const VectorXd u = (params.weight * joined).array().tanh();
  return params.v.dot(u);
}

VectorXd attention_weights(const VectorXd &decoder_state, const MatrixXd &encoder_states,
                           const AttentionParams &params) {
  VectorXd scores(encoder_states.cols());
  for (Index s = 0; s < encoder_states.cols(); ++s)
    scores[s] = attention_score(decoder_state, encoder_states.col(s), params);
  return nn::softmax(scores);
}

struct Seq2SeqModel::Trace {
  MatrixXd source;
  std::vector<int> target;
  std::vector<nn::LstmCache> enc;
  MatrixXd hbar;  // He x S
  MatrixXd keys;  // A x S
  VectorXd enc_h, enc_c;
  VectorXd dec_h0, dec_c0;
  std::vector<nn::LstmCache> dec;
  std::vector<MatrixXd> u;  // A x S per step
  std::vector<VectorXd> weights, context, joined, attn, mask, probs;
  double loss = 0.0;
};

Seq2SeqModel::Seq2SeqModel(const Seq2SeqConfig &config, std::vector<std::string> keywords,
                           std::size_t input_dim)
    : config_(config), input_dim_(input_dim) {
  config_.validate();
  std::sort(keywords.begin(), keywords.end());
  keywords.erase(std::unique(keywords.begin(), keywords.end()), keywords.end());
  vocab_ = {kPadToken, kStartToken, kEndToken};
  for (auto &k : keywords)
    if (k != kPadToken && k != kStartToken && k != kEndToken) vocab_.push_back(k);
  for (std::size_t i = 0; i < vocab_.size(); ++i)
    vocab_index_.emplace(vocab_[i], static_cast<int>(i));
  max_decode_len_ = config_.max_decode_len;

  const std::size_t he = config_.encoder_units;
  const std::size_t hd = config_.effective_decoder_units();
  const std::size_t emb = config_.decoder_embedding_dim;
  const auto V = static_cast<Index>(vocab_.size());
  const auto He = static_cast<Index>(he), Hd = static_cast<Index>(hd);
  bridged_ = he != hd;
  encoder_ = nn::Lstm("encoder", input_dim, he);
  decoder_ = nn::Lstm("decoder", emb, hd);
  target_embedding_ = nn::Param("target_embedding", V, static_cast<Index>(emb));
  if (bridged_) {
    bridge_h_ = nn::Param("bridge_h", Hd, He);
    bridge_c_ = nn::Param("bridge_c", Hd, He);
  }
  att_weight_ = nn::Param("attention.weight", Hd, Hd + He);
  att_v_ = nn::Param("attention.v", Hd, 1);
  combine_weight_ = nn::Param("combine.weight", Hd, He + Hd);
  combine_bias_ = nn::Param("combine.bias", Hd, 1);
  out_weight_ = nn::Param("output.weight", V, Hd);
  out_bias_ = nn::Param("output.bias", V, 1);

  Rng rng(mix_seed(config_.seed, 0x5e92));
  encoder_.init(rng);
  decoder_.init(rng);
  target_embedding_.init_uniform(rng, 1.0 / std::sqrt(static_cast<double>(emb)));
  if (bridged_) {
    bridge_h_.init_uniform(rng, 1.0 / std::sqrt(static_cast<double>(he)));
    bridge_c_.init_uniform(rng, 1.0 / std::sqrt(static_cast<double>(he)));
  }
  att_weight_.init_uniform(rng, 1.0 / std::sqrt(static_cast<double>(hd + he)));
  att_v_.init_uniform(rng, 1.0 / std::sqrt(static_cast<double>(hd)));
  combine_weight_.init_uniform(rng, 1.0 / std::sqrt(static_cast<double>(he + hd)));
  out_weight_.init_uniform(rng, 1.0 / std::sqrt(static_cast<double>(hd)));
}

std::vector<nn::Param *> Seq2SeqModel::parameters() {
  std::vector<nn::Param *> ps{&encoder_.weight, &encoder_.bias, &decoder_.weight,
                              &decoder_.bias, &target_embedding_};
  if (bridged_) {
    ps.push_back(&bridge_h_);
    ps.push_back(&bridge_c_);
  }
  for (nn::Param *p : {&att_weight_, &att_v_, &combine_weight_, &combine_bias_,
                       &out_weight_, &out_bias_})
    ps.push_back(p);
  return ps;
}

std::vector<const nn::Param *> Seq2SeqModel::parameters() const {
  auto ps = const_cast<Seq2SeqModel *>(this)->parameters();
  return {ps.begin(), ps.end()};
}

AttentionParams Seq2SeqModel::attention() const {
  return AttentionParams{att_weight_.value, att_v_.value.col(0)};
}

MatrixXd Seq2SeqModel::embed_input(const TokenSequence &input,
                                   const EmbeddingTable &table) const {
  if (table.dim() != input_dim_)
    throw Error(ErrorKind::DimensionMismatch,
                "embedding dim " + std::to_string(table.dim()) +
                    " does not match model input dim " + std::to_string(input_dim_));
  MatrixXd source(static_cast<Index>(input_dim_), static_cast<Index>(input.size()));
  for (std::size_t s = 0; s < input.size(); ++s)
    source.col(static_cast<Index>(s)) = *table.embed(input.tokens[s], OovPolicy::HashRandom);
  return source;
}

std::vector<int> Seq2SeqModel::encode_target(const std::vector<std::string> &target) const {
  if (target.size() < 2 || target.front() != kStartToken || target.back() != kEndToken)
    throw Error(ErrorKind::InvalidArgument, "target must be wrapped in <start>/<end>");
  std::vector<int> ids;
  for (const auto &t : target) {
    const auto it = vocab_index_.find(t);
    if (it == vocab_index_.end())
      throw Error(ErrorKind::InvalidArgument,
                  "target token '" + t + "' is not in the decoder vocabulary");
    ids.push_back(it->second);
  }
  return ids;
}

Seq2SeqModel::Trace Seq2SeqModel::forward(const MatrixXd &source,
                                          const std::vector<int> &target,
                                          Rng *dropout_rng) const {
  const Index S = source.cols();
  const auto He = static_cast<Index>(config_.encoder_units);
  const auto Hd = static_cast<Index>(config_.effective_decoder_units());
  Trace tr;
  tr.source = source;
  tr.target = target;
  tr.enc.resize(static_cast<std::size_t>(S));
  tr.hbar.resize(He, S);
  VectorXd h = VectorXd::Zero(He), c = VectorXd::Zero(He);
  for (Index s = 0; s < S; ++s) {
    auto &cache = tr.enc[static_cast<std::size_t>(s)];
    encoder_.forward(source.col(s), h, c, cache);
    h = cache.h;
    c = cache.c;
    tr.hbar.col(s) = h;
  }
  tr.enc_h = h;
  tr.enc_c = c;
  if (bridged_) {
    tr.dec_h0 = bridge_h_.value * h;
    tr.dec_c0 = bridge_c_.value * c;
  } else {
    tr.dec_h0 = h;
    tr.dec_c0 = c;
  }
  const auto w_dec = att_weight_.value.leftCols(Hd);
  const auto w_enc = att_weight_.value.rightCols(He);
  tr.keys = w_enc * tr.hbar;
  const VectorXd v = att_v_.value.col(0);

  const std::size_t steps = target.size() - 1;
  tr.dec.resize(steps);
  VectorXd hd = tr.dec_h0, cd = tr.dec_c0;
  for (std::size_t t = 0; t < steps; ++t) {
    auto &cache = tr.dec[t];
    decoder_.forward(target_embedding_.value.row(target[t]).transpose(), hd, cd, cache);
    hd = cache.h;
    cd = cache.c;
    VectorXd context = VectorXd::Zero(He);
    if (S > 0) {
      const VectorXd q = w_dec * hd;
      MatrixXd u = (tr.keys.colwise() + q).array().tanh();
      const VectorXd a = nn::softmax(u.transpose() * v);
      context = tr.hbar * a;
      tr.u.push_back(std::move(u));
      tr.weights.push_back(a);
    } else {
      tr.u.emplace_back();
      tr.weights.emplace_back();
    }
    VectorXd joined(He + Hd);
    joined << context, hd;
    VectorXd attn =
        (combine_weight_.value * joined + combine_bias_.value.col(0)).array().tanh();
    VectorXd mask = dropout_rng && config_.dropout > 0.0
                        ? nn::dropout_mask(Hd, config_.dropout, *dropout_rng)
                        : VectorXd::Ones(Hd);
    const VectorXd probs = nn::softmax(out_weight_.value * attn.cwiseProduct(mask) +
                                       out_bias_.value.col(0));
    tr.loss -= std::log(std::max(probs[target[t + 1]], 1e-300));
    tr.context.push_back(std::move(context));
    tr.joined.push_back(std::move(joined));
    tr.attn.push_back(std::move(attn));
    tr.mask.push_back(std::move(mask));
    tr.probs.push_back(probs);
  }
  tr.loss /= static_cast<double>(steps);
  return tr;
}

void Seq2SeqModel::backward(const Trace &tr, double grad_scale) {
  const Index S = tr.source.cols();
  const auto He = static_cast<Index>(config_.encoder_units);
  const auto Hd = static_cast<Index>(config_.effective_decoder_units());
  const std::size_t steps = tr.target.size() - 1;
  const double scale = grad_scale / static_cast<double>(steps);
  const MatrixXd w_dec = att_weight_.value.leftCols(Hd);
  const MatrixXd w_enc = att_weight_.value.rightCols(He);
  const VectorXd v = att_v_.value.col(0);

  MatrixXd d_keys = MatrixXd::Zero(Hd, S);
  MatrixXd d_hbar = MatrixXd::Zero(He, S);
  VectorXd dh_next = VectorXd::Zero(Hd), dc_next = VectorXd::Zero(Hd);
  VectorXd dx, dh_prev, dc_prev;
  for (std::size_t t = steps; t-- > 0;) {
    VectorXd dlogits = tr.probs[t];
    dlogits[tr.target[t + 1]] -= 1.0;
    dlogits *= scale;
    const VectorXd dropped = tr.attn[t].cwiseProduct(tr.mask[t]);
    out_weight_.grad.noalias() += dlogits * dropped.transpose();
    out_bias_.grad.col(0) += dlogits;
    const VectorXd dattn = (out_weight_.value.transpose() * dlogits).cwiseProduct(tr.mask[t]);
    const VectorXd dpre = dattn.cwiseProduct((1.0 - tr.attn[t].array().square()).matrix());
    combine_weight_.grad.noalias() += dpre * tr.joined[t].transpose();
    combine_bias_.grad.col(0) += dpre;
    const VectorXd djoined = combine_weight_.value.transpose() * dpre;
    const VectorXd dcontext = djoined.head(He);
    VectorXd dh = djoined.tail(Hd) + dh_next;
    const VectorXd &hd = tr.dec[t].h;
    if (S > 0) {
      const VectorXd &a = tr.weights[t];
      const MatrixXd &u = tr.u[t];
      const VectorXd da = tr.hbar.transpose() * dcontext;
      d_hbar.noalias() += dcontext * a.transpose();
      const VectorXd de = a.cwiseProduct((da.array() - a.dot(da)).matrix());
      att_v_.grad.col(0) += u * de;
      const MatrixXd dscore =
          (v * de.transpose()).cwiseProduct((1.0 - u.array().square()).matrix());
      const VectorXd dq = dscore.rowwise().sum();
      d_keys += dscore;
      att_weight_.grad.leftCols(Hd).noalias() += dq * hd.transpose();
      dh.noalias() += w_dec.transpose() * dq;
    }
    decoder_.backward(tr.dec[t], dh, dc_next, dx, dh_prev, dc_prev);
    target_embedding_.grad.row(tr.target[t]) += dx.transpose();
    dh_next = dh_prev;
    dc_next = dc_prev;
  }
  if (S > 0) {
    att_weight_.grad.rightCols(He).noalias() += d_keys * tr.hbar.transpose();
    d_hbar.noalias() += w_enc.transpose() * d_keys;
  }
  VectorXd dh, dc;
  if (bridged_) {
    bridge_h_.grad.noalias() += dh_next * tr.enc_h.transpose();
    bridge_c_.grad.noalias() += dc_next * tr.enc_c.transpose();
    dh = bridge_h_.value.transpose() * dh_next;
    dc = bridge_c_.value.transpose() * dc_next;
  } else {
    dh = dh_next;
    dc = dc_next;
  }
  for (Index s = S; s-- > 0;) {
    dh += d_hbar.col(s);
    encoder_.backward(tr.enc[static_cast<std::size_t>(s)], dh, dc, dx, dh_prev, dc_prev);
    dh = dh_prev;
    dc = dc_prev;
  }
}

double Seq2SeqModel::loss(const TrainingExample &example,
                          const EmbeddingTable &table) const {
  return forward(embed_input(example.input, table), encode_target(example.target), nullptr)
      .loss;
}

double Seq2SeqModel::accumulate_gradients(const TrainingExample &example,
                                          const EmbeddingTable &table,
                                          Rng *dropout_rng, double grad_scale) {
  const auto tr = forward(embed_input(example.input, table),
                          encode_target(example.target), dropout_rng);
  backward(tr, grad_scale);
  return tr.loss;
}

std::vector<std::string> Seq2SeqModel::predict(const TokenSequence &input,
                                               const EmbeddingTable &table) const {
  const MatrixXd source = embed_input(input, table);
  const Index S = source.cols();
  const auto He = static_cast<Index>(config_.encoder_units);
  const auto Hd = static_cast<Index>(config_.effective_decoder_units());
  nn::LstmCache cache;
  VectorXd h = VectorXd::Zero(He), c = VectorXd::Zero(He);
  MatrixXd hbar(He, S);
  for (Index s = 0; s < S; ++s) {
    encoder_.forward(source.col(s), h, c, cache);
    h = cache.h;
    c = cache.c;
    hbar.col(s) = h;
  }
  VectorXd hd = bridged_ ? VectorXd(bridge_h_.value * h) : h;
  VectorXd cd = bridged_ ? VectorXd(bridge_c_.value * c) : c;
  const MatrixXd keys = att_weight_.value.rightCols(He) * hbar;
  const VectorXd v = att_v_.value.col(0);

  const int start = vocab_index_.at(kStartToken);
  const int end = vocab_index_.at(kEndToken);
  const int pad = vocab_index_.at(kPadToken);
  std::vector<std::string> out;
  int prev = start;
  for (std::size_t step = 0; step < max_decode_len_; ++step) {
    decoder_.forward(target_embedding_.value.row(prev).transpose(), hd, cd, cache);
    hd = cache.h;
    cd = cache.c;
    VectorXd context = VectorXd::Zero(He);
    if (S > 0) {
      const VectorXd q = att_weight_.value.leftCols(Hd) * hd;
      const MatrixXd u = (keys.colwise() + q).array().tanh();
      context = hbar * nn::softmax(u.transpose() * v);
    }
    VectorXd joined(He + Hd);
    joined << context, hd;
    const VectorXd attn =
        (combine_weight_.value * joined + combine_bias_.value.col(0)).array().tanh();
    const VectorXd logits = out_weight_.value * attn + out_bias_.value.col(0);
    Index best = 0;
    logits.maxCoeff(&best);
    const int id = static_cast<int>(best);
    if (id == end) break;
    if (id != start && id != pad) out.push_back(vocab_[static_cast<std::size_t>(id)]);
    prev = id;
  }
  return out;
}

Archive Seq2SeqModel::to_archive() const {
  Archive a;
  a.kind = "seq2seq";
  a.meta["config"] = to_json(config_);
  a.meta["vocabulary"] = vocab_;
  a.meta["input_dim"] = input_dim_;
  a.meta["max_decode_len"] = max_decode_len_;
  a.meta["loss_history"] = loss_history_;
  for (const nn::Param *p : parameters()) a.tensors.push_back({p->name, p->value});
  return a;
}

Seq2SeqModel Seq2SeqModel::from_archive(const Archive &archive) {
  if (archive.kind != "seq2seq")
    throw Error(ErrorKind::BadArchive, "archive holds '" + archive.kind + "', not seq2seq");
  try {
    const auto config = seq2seq_config_from_json(archive.meta.at("config"));
    auto vocab = archive.meta.at("vocabulary").get<std::vector<std::string>>();
    Seq2SeqModel model(config, std::vector<std::string>(vocab.begin() + 3, vocab.end()),
                       archive.meta.at("input_dim").get<std::size_t>());
    if (model.vocab_ != vocab)
      throw Error(ErrorKind::BadArchive, "archive vocabulary is not canonical");
    model.max_decode_len_ = archive.meta.at("max_decode_len").get<std::size_t>();
    model.loss_history_ = archive.meta.at("loss_history").get<std::vector<double>>();
    for (nn::Param *p : model.parameters()) {
      const auto &value = archive.tensor(p->name);
      if (value.rows() != p->value.rows() || value.cols() != p->value.cols())
        throw Error(ErrorKind::BadArchive, "tensor '" + p->name + "' has the wrong shape");
      p->value = value;
    }
    return model;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::BadArchive, std::string("bad seq2seq metadata: ") + e.what());
  }
}

std::string Seq2SeqModel::fingerprint() const {
  std::ostringstream ss;
  write_archive(ss, to_archive());
  return sha256_hex(ss.str());
}

Seq2SeqModel train(const Seq2SeqConfig &config, std::span<const TrainingExample> examples,
                   const EmbeddingTable &table) {
  config.validate();
  if (examples.empty())
    throw Error(ErrorKind::EmptyTrainingSet, "no training examples");
  std::set<std::string> keywords;
  std::size_t longest = 0;
  for (const auto &ex : examples) {
    if (ex.target.size() < 3)
      throw Error(ErrorKind::InvalidArgument, "training target has no keywords");
    keywords.insert(ex.target.begin() + 1, ex.target.end() - 1);
    longest = std::max(longest, ex.target.size() - 2);
  }
  Seq2SeqModel model(config, {keywords.begin(), keywords.end()}, table.dim());
  if (model.max_decode_len_ == 0) model.max_decode_len_ = longest + 2;

  std::vector<MatrixXd> sources;
  std::vector<std::vector<int>> targets;
  for (const auto &ex : examples) {
    sources.push_back(model.embed_input(ex.input, table));
    targets.push_back(model.encode_target(ex.target));
  }

  nn::AdamOptions opts;
  opts.learning_rate = config.learning_rate;
  nn::Adam adam(opts);
  auto params = model.parameters();
  Rng rng(mix_seed(config.seed, 0x7a11));
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      for (nn::Param *p : params) p->zero_grad();
      const double scale = 1.0 / static_cast<double>(end - begin);
      for (std::size_t k = begin; k < end; ++k) {
        const auto tr = model.forward(sources[order[k]], targets[order[k]], &rng);
        model.backward(tr, scale);
        total += tr.loss;
      }
      adam.step(params);
    }
    const double mean = total / static_cast<double>(order.size());
    if (!std::isfinite(mean))
      throw Error(ErrorKind::NonFiniteLoss,
                  "training diverged at epoch " + std::to_string(epoch + 1));
    model.loss_history_.push_back(mean);
  }
  for (nn::Param *p : params) p->zero_grad();
  return model;
}

std::vector<std::string> predict_keywords(const Seq2SeqModel &model,
                                          const TokenSequence &input,
                                          const EmbeddingTable &table) {
  return model.predict(input, table);
}

} // namespace faqforge
