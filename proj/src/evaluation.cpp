#include "faqforge/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "faqforge/error.hpp"
#include "faqforge/intent_keywords.hpp"
#include "faqforge/retrieval.hpp"
#include "faqforge/translated_faq.hpp"

namespace faqforge {

double average_precision(std::span<const std::size_t> ranked,
                         const std::set<std::size_t> &relevant) {
  if (relevant.empty())
    throw Error(ErrorKind::EmptyRelevantSet, "average precision needs a relevant item");
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t p = 0; p < ranked.size(); ++p)
    if (relevant.contains(ranked[p])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(p + 1);
    }
  return sum / static_cast<double>(relevant.size());
}

double precision_at_k(std::span<const std::size_t> ranked,
                      const std::set<std::size_t> &relevant, std::size_t k) {
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "precision_at_k needs k >= 1");
  std::size_t hits = 0;
  for (std::size_t p = 0; p < std::min(k, ranked.size()); ++p)
    hits += relevant.contains(ranked[p]) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(k);
}

void ExperimentConfig::validate() const {
  if (tau < 0.0) throw Error(ErrorKind::InvalidArgument, "tau must be non-negative");
  if (candidate_k == 0) throw Error(ErrorKind::InvalidArgument, "candidate k must be >= 1");
  if (folds == 0) throw Error(ErrorKind::InvalidArgument, "at least one fold is required");
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw Error(ErrorKind::InvalidFraction, "train fraction must lie in (0, 1)");
  if (train_per_thread && *train_per_thread == 0)
    throw Error(ErrorKind::InvalidArgument, "train_per_thread must be >= 1");
  for (std::size_t k : p_at)
    if (k == 0) throw Error(ErrorKind::InvalidArgument, "P@k needs k >= 1");
  seq2seq.validate();
  if (run_guided) classifier.validate();
}

nlohmann::ordered_json to_json(const ExperimentConfig &c) {
  nlohmann::ordered_json j;
  j["tau"] = c.tau;
  j["candidate_k"] = c.candidate_k;
  j["prob_threshold"] = c.prob_threshold;
  j["seq2seq"] = to_json(c.seq2seq);
  j["classifier"] = to_json(c.classifier);
  j["folds"] = c.folds;
  j["train_frac"] = c.train_frac;
  j["seed"] = c.seed;
  j["run_guided"] = c.run_guided;
  j["train_per_thread"] =
      c.train_per_thread ? nlohmann::ordered_json(*c.train_per_thread) : nullptr;
  j["p_at"] = c.p_at;
  return j;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json &j) {
  ExperimentConfig c;
  c.tau = j.value("tau", c.tau);
  c.candidate_k = j.value("candidate_k", c.candidate_k);
  c.prob_threshold = j.value("prob_threshold", c.prob_threshold);
  if (j.contains("seq2seq")) c.seq2seq = seq2seq_config_from_json(j.at("seq2seq"));
  if (j.contains("classifier")) c.classifier = classifier_config_from_json(j.at("classifier"));
  c.folds = j.value("folds", c.folds);
  c.train_frac = j.value("train_frac", c.train_frac);
  c.seed = j.value("seed", c.seed);
  c.run_guided = j.value("run_guided", c.run_guided);
  if (j.contains("train_per_thread") && !j.at("train_per_thread").is_null())
    c.train_per_thread = j.at("train_per_thread").get<std::size_t>();
  c.p_at = j.value("p_at", c.p_at);
  return c;
}

namespace {

nlohmann::ordered_json to_json(const SystemMetrics &m) {
  nlohmann::ordered_json j;
  j["map"] = m.map;
  for (const auto &[k, v] : m.p_at_k) j["p_at_" + std::to_string(k)] = v;
  nlohmann::ordered_json per_query = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < m.query_ids.size(); ++i)
    per_query.push_back({{"entry_id", m.query_ids[i]}, {"ap", m.average_precisions[i]}});
  if (!m.query_ids.empty()) j["per_query"] = std::move(per_query);
  return j;
}

class MetricsAccumulator {
public:
  explicit MetricsAccumulator(std::span<const std::size_t> p_at) : p_at_(p_at.begin(), p_at.end()) {}

  void add(std::size_t query_id, const std::vector<std::size_t> &ranked,
           const std::set<std::size_t> &relevant) {
    m_.query_ids.push_back(query_id);
    m_.average_precisions.push_back(average_precision(ranked, relevant));
    for (std::size_t k : p_at_) p_sums_[k] += precision_at_k(ranked, relevant, k);
  }

  SystemMetrics finish() {
    const double n = static_cast<double>(m_.query_ids.size());
    double sum = 0.0;
    for (double ap : m_.average_precisions) sum += ap;
    m_.map = n > 0 ? sum / n : 0.0;
    for (std::size_t k : p_at_) m_.p_at_k[k] = n > 0 ? p_sums_[k] / n : 0.0;
    return m_;
  }

private:
  std::vector<std::size_t> p_at_;
  std::map<std::size_t, double> p_sums_;
  SystemMetrics m_;
};

SystemMetrics mean_over_folds(const std::vector<const SystemMetrics *> &folds) {
  SystemMetrics out;
  if (folds.empty()) return out;
  const double n = static_cast<double>(folds.size());
  for (const SystemMetrics *f : folds) {
    out.map += f->map / n;
    for (const auto &[k, v] : f->p_at_k) out.p_at_k[k] += v / n;
  }
  return out;
}

void report(const ProgressFn &progress, const std::string &message) {
  if (progress) progress(message);
}

FoldReport run_fold(const FaqCollection &collection, const RelevanceMatrix &matrix,
                    std::span<const TokenSequence> tokens, const EmbeddingTable &table,
                    const ExperimentConfig &config, const DatasetSplit &split,
                    const ProgressFn &progress) {
  const std::string tag = "fold " + std::to_string(split.fold_index + 1) + ": ";
  FoldReport fold;
  fold.fold_index = split.fold_index;

  const auto groups = group_questions(matrix, tokens, split.train_ids);
  const auto keywords = extract_keywords(compute_tfidf(groups), config.tau);
  const auto examples = build_training_set(tokens, groups, keywords, split);
  report(progress, tag + "training seq2seq on " + std::to_string(examples.size()) +
                       " examples");
  Seq2SeqConfig s2s = config.seq2seq;
  s2s.seed = mix_seed(config.seed, 0x5200 + split.fold_index);
  const Seq2SeqModel model = train(s2s, examples, table);

  const TranslatedFaq index = translate_faq(model, collection, tokens, table, split.train_ids);
  fold.index_size = index.tuples.size();
  fold.query_count = split.test_ids.size();

  std::optional<CandidateClassifier> classifier;
  std::optional<ClassifierScorer> scorer;
  if (config.run_guided) {
    report(progress, tag + "training candidate classifier");
    ClassifierConfig cc = config.classifier;
    cc.seed = mix_seed(config.seed, 0xc100 + split.fold_index);
    classifier.emplace(train_classifier(collection, matrix, split, tokens, table, cc));
    std::vector<TokenSequence> indexed;
    indexed.reserve(index.tuples.size());
    for (const auto &t : index.tuples) indexed.push_back(tokens[t.entry_id]);
    scorer.emplace(*classifier, std::move(indexed), table);
  }

  report(progress, tag + "ranking " + std::to_string(split.test_ids.size()) + " queries");
  MetricsAccumulator plain(config.p_at), guided(config.p_at);
  for (std::size_t qid : split.test_ids) {
    Query query;
    query.raw_text = collection[qid].question;
    query.tokens = tokens[qid];
    query.predicted_keywords = canonicalize(model.predict(query.tokens, table));

    std::set<std::size_t> relevant;
    for (const auto &t : index.tuples)
      if (collection[t.entry_id].thread_id == collection[qid].thread_id)
        relevant.insert(t.entry_id);

    plain.add(qid, rank(query, index, table).ids(), relevant);
    if (scorer) {
      const auto candidates = select_candidates(*scorer, query, index.tuples.size(),
                                                config.candidate_k, config.prob_threshold);
      fold.candidate_fallbacks += candidates.fallback ? 1 : 0;
      guided.add(qid,
                 rank_guided(query, index, *scorer, table, config.candidate_k,
                             config.prob_threshold)
                     .ids(),
                 relevant);
    }
  }
  fold.tis2s = plain.finish();
  if (scorer) fold.gtis2s = guided.finish();
  std::ostringstream line;
  line << tag << "TI-S2S MAP " << std::fixed << std::setprecision(4) << fold.tis2s.map;
  if (fold.gtis2s) line << ", GTI-S2S MAP " << fold.gtis2s->map;
  report(progress, line.str());
  return fold;
}

} // namespace

MetricsReport run_experiment(const FaqCollection &collection, const TextResources &resources,
                             const EmbeddingTable &table, const ExperimentConfig &config,
                             const ProgressFn &progress) {
  config.validate();
  const RelevanceMatrix matrix = build_relevance_matrix(collection);
  std::vector<TokenSequence> tokens;
  tokens.reserve(collection.size());
  for (const auto &e : collection.entries()) {
    auto t = preprocess(e.question, resources);
    t.source_entry_id = e.entry_id;
    tokens.push_back(std::move(t));
  }

  MetricsReport out;
  out.config = to_json(config);
  out.config["relevant_set"] = "indexed entries of the query's thread";
  out.config["index"] = "originals and train paraphrases; test queries are not indexed";
  out.config["entries"] = collection.size();
  out.config["threads"] = collection.thread_count();

  for (auto split : split_folds(collection, config.train_frac, config.folds, config.seed)) {
    if (config.train_per_thread)
      split = limit_train_per_thread(collection, split, *config.train_per_thread, config.seed);
    out.folds.push_back(run_fold(collection, matrix, tokens, table, config, split, progress));
  }

  std::vector<const SystemMetrics *> plain, guided;
  for (const auto &f : out.folds) {
    plain.push_back(&f.tis2s);
    if (f.gtis2s) guided.push_back(&*f.gtis2s);
  }
  out.tis2s = mean_over_folds(plain);
  if (!guided.empty()) out.gtis2s = mean_over_folds(guided);
  return out;
}

nlohmann::ordered_json to_json(const MetricsReport &r) {
  nlohmann::ordered_json j;
  j["config"] = r.config;
  j["tis2s"] = to_json(r.tis2s);
  if (r.gtis2s) j["gtis2s"] = to_json(*r.gtis2s);
  // Headline fields for the guided system when it ran, else the plain one.
  const SystemMetrics &head = r.gtis2s ? *r.gtis2s : r.tis2s;
  j["map"] = head.map;
  for (const auto &[k, v] : head.p_at_k) j["p_at_" + std::to_string(k)] = v;
  nlohmann::ordered_json folds = nlohmann::ordered_json::array();
  for (const auto &f : r.folds) {
    nlohmann::ordered_json fj;
    fj["fold"] = f.fold_index;
    fj["index_size"] = f.index_size;
    fj["queries"] = f.query_count;
    fj["candidate_fallbacks"] = f.candidate_fallbacks;
    fj["tis2s"] = to_json(f.tis2s);
    if (f.gtis2s) fj["gtis2s"] = to_json(*f.gtis2s);
    folds.push_back(std::move(fj));
  }
  j["folds"] = std::move(folds);
  return j;
}

void write_report_table(std::ostream &out, const MetricsReport &r) {
  struct Row {
    std::string name;
    double map;
    std::optional<double> p5;
  };
  const std::vector<Row> published = {
      {"CNN-Rank (published)", 0.74, 0.62},  {"TSU-BERT (published)", 0.897, 0.776},
      {"BERT (published)", 0.614, 0.583},    {"RoBERTa (published)", 0.712, 0.796},
      {"SBERT (published)", 0.686, 0.774},   {"TI-S2S (published)", 0.929, 0.92},
      {"GTI-S2S (published)", 0.934, 0.924},
  };
  auto p5 = [](const SystemMetrics &m) -> std::optional<double> {
    const auto it = m.p_at_k.find(5);
    return it == m.p_at_k.end() ? std::nullopt : std::optional<double>(it->second);
  };
  std::vector<Row> rows = published;
  rows.push_back({"TI-S2S (this run)", r.tis2s.map, p5(r.tis2s)});
  if (r.gtis2s) rows.push_back({"GTI-S2S (this run)", r.gtis2s->map, p5(*r.gtis2s)});

  out << std::left << std::setw(24) << "Algorithm" << std::right << std::setw(8) << "MAP"
      << std::setw(8) << "P@5" << '\n';
  out << std::string(40, '-') << '\n';
  out << std::fixed << std::setprecision(3);
  for (const auto &row : rows) {
    out << std::left << std::setw(24) << row.name << std::right << std::setw(8) << row.map;
    if (row.p5)
      out << std::setw(8) << *row.p5;
    else
      out << std::setw(8) << "-";
    out << '\n';
  }
  out << std::defaultfloat;
}

std::vector<SweepPoint> sweep_tau(const FaqCollection &collection,
                                  const TextResources &resources,
                                  const EmbeddingTable &table, const ExperimentConfig &base,
                                  std::span<const double> taus, const ProgressFn &progress) {
  std::vector<SweepPoint> out;
  for (double tau : taus) {
    ExperimentConfig c = base;
    c.tau = tau;
    std::ostringstream msg;
    msg << "tau " << tau;
    report(progress, msg.str());
    out.push_back({tau, run_experiment(collection, resources, table, c, progress)});
  }
  return out;
}

std::vector<RobustnessPoint> robustness(const FaqCollection &collection,
                                        const TextResources &resources,
                                        const EmbeddingTable &table,
                                        const ExperimentConfig &base,
                                        std::span<const std::size_t> per_thread,
                                        const ProgressFn &progress) {
  std::vector<RobustnessPoint> out;
  for (std::size_t v : per_thread) {
    ExperimentConfig c = base;
    c.train_per_thread = v;
    if (std::find(c.p_at.begin(), c.p_at.end(), 2) == c.p_at.end()) c.p_at.push_back(2);
    report(progress, "training questions per thread: " + std::to_string(v));
    out.push_back({v, run_experiment(collection, resources, table, c, progress)});
  }
  return out;
}

nlohmann::ordered_json sweep_summary(std::span<const SweepPoint> points) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto &p : points) {
    nlohmann::ordered_json row{{"tau", p.tau}, {"tis2s_map", p.report.tis2s.map}};
    if (p.report.gtis2s) row["gtis2s_map"] = p.report.gtis2s->map;
    rows.push_back(std::move(row));
  }
  return {{"sweep", "tau"}, {"points", std::move(rows)}};
}

nlohmann::ordered_json robustness_summary(std::span<const RobustnessPoint> points) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  auto p2 = [](const SystemMetrics &m) {
    const auto it = m.p_at_k.find(2);
    return it == m.p_at_k.end() ? 0.0 : it->second;
  };
  for (const auto &p : points) {
    nlohmann::ordered_json row{{"per_thread", p.per_thread},
                               {"tis2s_p_at_2", p2(p.report.tis2s)}};
    if (p.report.gtis2s) row["gtis2s_p_at_2"] = p2(*p.report.gtis2s);
    rows.push_back(std::move(row));
  }
  return {{"study", "training size"}, {"points", std::move(rows)}};
}

} // namespace faqforge
