#include "faqforge/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "faqforge/archive.hpp"
#include "faqforge/error.hpp"
#include "faqforge/intent_keywords.hpp"

namespace faqforge {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

const char *kIngestManifest = "ingest.manifest.json";
const char *kTrainManifest = "train.manifest.json";
const char *kTranslateManifest = "translate.manifest.json";

fs::path require(const fs::path &dir, const char *name, const char *producer) {
  const fs::path p = dir / name;
  if (!fs::exists(p))
    throw Error(ErrorKind::MissingArtifact, p.string() + " not found; run '" +
                                                std::string(producer) + "' first");
  return p;
}

std::ofstream open_out(const fs::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  return in;
}

void write_json(const fs::path &path, const ordered_json &j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path &path) {
  auto in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::MalformedRecord, path.string() + ": " + e.what());
  }
}

// Digest of a file, or of every regular file below a directory.
std::string digest_path(const fs::path &path) {
  if (!fs::is_directory(path)) return sha256_file(path);
  std::vector<fs::path> files;
  for (const auto &e : fs::recursive_directory_iterator(path))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const auto &f : files)
    acc += fs::relative(f, path).generic_string() + '\0' + sha256_file(f) + '\n';
  return sha256_hex(acc);
}

ordered_json outputs_json(const fs::path &dir, std::initializer_list<const char *> names) {
  ordered_json j = ordered_json::object();
  for (const char *n : names) j[n] = sha256_file(dir / n);
  return j;
}

void write_manifest(const fs::path &dir, const char *name, const std::string &command,
                    const ordered_json &config, const ordered_json &inputs,
                    const ordered_json &outputs) {
  ordered_json m;
  m["command"] = command;
  m["config"] = config;
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  write_json(dir / name, m);
}

FaqCollection load_ingested(const fs::path &dir) {
  auto in = open_in(require(dir, artifact::kCorpus, "ingest"));
  return load_faq(in, CorpusFormat::Jsonl);
}

EmbeddingTable load_ingested_embeddings(const fs::path &dir) {
  auto in = open_in(require(dir, artifact::kEmbeddings, "ingest"));
  return load_word2vec_binary(in);
}

std::vector<TokenSequence> preprocess_all(const FaqCollection &collection,
                                          const TextResources &resources) {
  std::vector<TokenSequence> tokens;
  tokens.reserve(collection.size());
  for (const auto &e : collection.entries()) {
    auto t = preprocess(e.question, resources);
    t.source_entry_id = e.entry_id;
    tokens.push_back(std::move(t));
  }
  return tokens;
}

// The corpus recorded by ingest must be the one on disk, and the one named
// on the command line when there is one.
void check_ingested_corpus(const PipelineConfig &config) {
  const fs::path dir = config.artifacts_dir;
  const auto manifest = read_json(require(dir, kIngestManifest, "ingest"));
  const std::string recorded = manifest.at("outputs").at(artifact::kCorpus).get<std::string>();
  if (sha256_file(require(dir, artifact::kCorpus, "ingest")) != recorded)
    throw Error(ErrorKind::ConfigMismatch,
                std::string(artifact::kCorpus) + " changed since ingest; re-run 'ingest'");
  if (!config.corpus.empty()) {
    if (!fs::exists(config.corpus))
      throw Error(ErrorKind::InvalidArgument, "corpus " + config.corpus.string() + " not found");
    if (digest_path(config.corpus) != manifest.at("inputs").at("corpus").get<std::string>())
      throw Error(ErrorKind::ConfigMismatch,
                  config.corpus.string() + " is not the corpus these artifacts were built from");
  }
}

std::string format_tau(double tau) {
  std::ostringstream s;
  s << tau;
  return s.str();
}

} // namespace

void PipelineConfig::validate() const {
  experiment().validate();
  if (artifacts_dir.empty())
    throw Error(ErrorKind::InvalidArgument, "artifact directory must not be empty");
}

ExperimentConfig PipelineConfig::experiment() const {
  ExperimentConfig e;
  e.tau = tau;
  e.candidate_k = candidate_k;
  e.prob_threshold = prob_threshold;
  e.seq2seq = seq2seq;
  e.classifier = classifier;
  e.folds = folds;
  e.train_frac = train_frac;
  e.seed = seed;
  return e;
}

ordered_json training_config_json(const PipelineConfig &c) {
  ordered_json j;
  j["tau"] = c.tau;
  j["seq2seq"] = to_json(c.seq2seq);
  j["classifier"] = to_json(c.classifier);
  j["seed"] = c.seed;
  return j;
}

std::string training_digest(const PipelineConfig &config) {
  return sha256_hex(training_config_json(config).dump());
}

fs::path resolve_artifacts_dir(const std::optional<fs::path> &flag) {
  if (flag) return *flag;
  if (const char *env = std::getenv("FAQFORGE_ARTIFACTS"); env && *env) return env;
  return "artifacts";
}

CorpusFormat corpus_format_for(const fs::path &path) {
  return path.extension() == ".jsonl" ? CorpusFormat::Jsonl : CorpusFormat::StackFaqAdapter;
}

void cmd_ingest(const PipelineConfig &config) {
  config.validate();
  if (config.corpus.empty() || !fs::exists(config.corpus))
    throw Error(ErrorKind::InvalidArgument, "ingest needs an existing --corpus");
  if (config.embeddings.empty() || !fs::exists(config.embeddings))
    throw Error(ErrorKind::InvalidArgument, "ingest needs an existing --embeddings");

  FaqCollection collection = [&] {
    if (corpus_format_for(config.corpus) == CorpusFormat::Jsonl) {
      auto in = open_in(config.corpus);
      return load_faq(in, CorpusFormat::Jsonl);
    }
    return load_faq_file(config.corpus, CorpusFormat::StackFaqAdapter);
  }();

  const auto resources = TextResources::load_default();
  VocabularyFilter vocab;
  for (const auto &t : preprocess_all(collection, resources))
    vocab.insert(t.tokens.begin(), t.tokens.end());
  const EmbeddingTable table = load_embeddings_file(config.embeddings, &vocab);
  if (table.size() == 0)
    throw Error(ErrorKind::InvalidArgument, "no corpus token has a vector in " +
                                                config.embeddings.string());

  const fs::path dir = config.artifacts_dir;
  fs::create_directories(dir);
  {
    auto out = open_out(dir / artifact::kCorpus);
    write_jsonl(out, collection);
  }
  {
    auto out = open_out(dir / artifact::kEmbeddings);
    write_word2vec_binary(out, table);
  }
  ordered_json inputs;
  inputs["corpus"] = digest_path(config.corpus);
  inputs["embeddings"] = digest_path(config.embeddings);
  ordered_json cfg;
  cfg["entries"] = collection.size();
  cfg["threads"] = collection.thread_count();
  cfg["vocabulary"] = vocab.size();
  cfg["vectors"] = table.size();
  write_manifest(dir, kIngestManifest, "ingest", cfg, inputs,
                 outputs_json(dir, {artifact::kCorpus, artifact::kEmbeddings}));
}

void cmd_train(const PipelineConfig &config) {
  config.validate();
  const fs::path dir = config.artifacts_dir;
  check_ingested_corpus(config);
  const FaqCollection collection = load_ingested(dir);
  const EmbeddingTable table = load_ingested_embeddings(dir);
  const auto resources = TextResources::load_default();
  const auto tokens = preprocess_all(collection, resources);
  const RelevanceMatrix matrix = build_relevance_matrix(collection);

  DatasetSplit all;
  all.train_ids.resize(collection.size());
  std::iota(all.train_ids.begin(), all.train_ids.end(), std::size_t{0});

  const auto groups = group_questions(matrix, tokens, all.train_ids);
  const auto keywords = extract_keywords(compute_tfidf(groups), config.tau);
  {
    auto out = open_out(dir / artifact::kKeywords);
    write_keywords_jsonl(out, keywords);
  }

  Seq2SeqConfig s2s = config.seq2seq;
  s2s.seed = mix_seed(config.seed, 0x5200);
  const auto examples = build_training_set(tokens, groups, keywords, all);
  save_archive(dir / artifact::kSeq2Seq, train(s2s, examples, table).to_archive());

  ClassifierConfig cc = config.classifier;
  cc.seed = mix_seed(config.seed, 0xc100);
  save_archive(dir / artifact::kClassifier,
               train_classifier(collection, matrix, all, tokens, table, cc).to_archive());

  ordered_json inputs;
  inputs[artifact::kCorpus] = sha256_file(dir / artifact::kCorpus);
  inputs[artifact::kEmbeddings] = sha256_file(dir / artifact::kEmbeddings);
  ordered_json cfg = training_config_json(config);
  cfg["digest"] = training_digest(config);
  write_manifest(dir, kTrainManifest, "train", cfg, inputs,
                 outputs_json(dir, {artifact::kKeywords, artifact::kSeq2Seq,
                                    artifact::kClassifier}));
}

void cmd_translate(const PipelineConfig &config) {
  config.validate();
  const fs::path dir = config.artifacts_dir;
  const auto manifest = read_json(require(dir, kTrainManifest, "train"));
  const std::string digest = training_digest(config);
  if (manifest.at("config").at("digest").get<std::string>() != digest)
    throw Error(ErrorKind::ConfigMismatch,
                "trained artifacts were built with a different configuration");
  const FaqCollection collection = load_ingested(dir);
  const EmbeddingTable table = load_ingested_embeddings(dir);
  const auto model =
      Seq2SeqModel::from_archive(load_archive(require(dir, artifact::kSeq2Seq, "train")));
  const auto resources = TextResources::load_default();
  const auto tokens = preprocess_all(collection, resources);

  TranslatedFaq index = translate_faq(model, collection, tokens, table);
  index.config_digest = digest;
  {
    auto out = open_out(dir / artifact::kIndex);
    write_index_jsonl(out, index);
  }
  ordered_json inputs;
  inputs[artifact::kCorpus] = sha256_file(dir / artifact::kCorpus);
  inputs[artifact::kSeq2Seq] = sha256_file(dir / artifact::kSeq2Seq);
  ordered_json cfg = training_config_json(config);
  cfg["digest"] = digest;
  write_manifest(dir, kTranslateManifest, "translate", cfg, inputs,
                 outputs_json(dir, {artifact::kIndex}));
}

MetricsReport cmd_evaluate(const PipelineConfig &config, const ProgressFn &progress) {
  config.validate();
  const fs::path dir = config.artifacts_dir;
  check_ingested_corpus(config);
  const FaqCollection collection = load_ingested(dir);
  const EmbeddingTable table = load_ingested_embeddings(dir);
  const auto resources = TextResources::load_default();

  MetricsReport report = run_experiment(collection, resources, table, config.experiment(),
                                        progress);
  write_json(dir / artifact::kReportJson, to_json(report));
  {
    auto out = open_out(dir / artifact::kReportText);
    write_report_table(out, report);
  }
  ordered_json inputs;
  inputs[artifact::kCorpus] = sha256_file(dir / artifact::kCorpus);
  inputs[artifact::kEmbeddings] = sha256_file(dir / artifact::kEmbeddings);
  write_manifest(dir, "evaluate.manifest.json", "evaluate", to_json(config.experiment()),
                 inputs, outputs_json(dir, {artifact::kReportJson, artifact::kReportText}));
  return report;
}

std::vector<SweepPoint> cmd_sweep_tau(const PipelineConfig &config,
                                      const std::vector<double> &taus,
                                      const ProgressFn &progress) {
  config.validate();
  const fs::path dir = config.artifacts_dir;
  check_ingested_corpus(config);
  const FaqCollection collection = load_ingested(dir);
  const EmbeddingTable table = load_ingested_embeddings(dir);
  const auto resources = TextResources::load_default();

  auto points = sweep_tau(collection, resources, table, config.experiment(), taus, progress);
  ordered_json outputs = ordered_json::object();
  for (const auto &p : points) {
    const std::string name = "report_tau_" + format_tau(p.tau) + ".json";
    write_json(dir / name, to_json(p.report));
    outputs[name] = sha256_file(dir / name);
  }
  write_json(dir / "sweep_tau_summary.json", sweep_summary(points));
  outputs["sweep_tau_summary.json"] = sha256_file(dir / "sweep_tau_summary.json");
  ordered_json inputs;
  inputs[artifact::kCorpus] = sha256_file(dir / artifact::kCorpus);
  inputs[artifact::kEmbeddings] = sha256_file(dir / artifact::kEmbeddings);
  write_manifest(dir, "sweep_tau.manifest.json", "sweep-tau", to_json(config.experiment()),
                 inputs, outputs);
  return points;
}

std::vector<RobustnessPoint> cmd_robustness(const PipelineConfig &config,
                                            const std::vector<std::size_t> &per_thread,
                                            const ProgressFn &progress) {
  config.validate();
  const fs::path dir = config.artifacts_dir;
  check_ingested_corpus(config);
  const FaqCollection collection = load_ingested(dir);
  const EmbeddingTable table = load_ingested_embeddings(dir);
  const auto resources = TextResources::load_default();

  auto points =
      robustness(collection, resources, table, config.experiment(), per_thread, progress);
  ordered_json outputs = ordered_json::object();
  for (const auto &p : points) {
    const std::string name = "report_v" + std::to_string(p.per_thread) + ".json";
    write_json(dir / name, to_json(p.report));
    outputs[name] = sha256_file(dir / name);
  }
  write_json(dir / "robustness_summary.json", robustness_summary(points));
  outputs["robustness_summary.json"] = sha256_file(dir / "robustness_summary.json");
  ordered_json inputs;
  inputs[artifact::kCorpus] = sha256_file(dir / artifact::kCorpus);
  inputs[artifact::kEmbeddings] = sha256_file(dir / artifact::kEmbeddings);
  write_manifest(dir, "robustness.manifest.json", "robustness", to_json(config.experiment()),
                 inputs, outputs);
  return points;
}

QueryMode parse_query_mode(const std::string &text) {
  if (text == "tis2s") return QueryMode::TiS2S;
  if (text == "gtis2s") return QueryMode::GtiS2S;
  throw Error(ErrorKind::InvalidArgument, "mode must be 'tis2s' or 'gtis2s', got '" + text + "'");
}

QueryService::QueryService(TextResources resources, EmbeddingTable table, Seq2SeqModel model,
                           std::optional<CandidateClassifier> classifier, TranslatedFaq index,
                           std::size_t candidate_k, double prob_threshold)
    : resources_(std::move(resources)), table_(std::move(table)), model_(std::move(model)),
      classifier_(std::move(classifier)), index_(std::move(index)),
      candidate_k_(candidate_k), prob_threshold_(prob_threshold) {
  if (classifier_) {
    std::vector<TokenSequence> indexed;
    indexed.reserve(index_.tuples.size());
    for (const auto &t : index_.tuples) indexed.push_back(preprocess(t.question, resources_));
    scorer_ = std::make_unique<ClassifierScorer>(*classifier_, std::move(indexed), table_);
  }
}

std::unique_ptr<QueryService> QueryService::open(const fs::path &dir, std::size_t candidate_k,
                                                 double prob_threshold) {
  auto model =
      Seq2SeqModel::from_archive(load_archive(require(dir, artifact::kSeq2Seq, "train")));
  TranslatedFaq index = [&] {
    auto in = open_in(require(dir, artifact::kIndex, "translate"));
    return read_index_jsonl(in);
  }();
  if (index.model_fingerprint != model.fingerprint())
    throw Error(ErrorKind::ConfigMismatch,
                "index.jsonl was translated by a different model; re-run 'translate'");
  std::optional<CandidateClassifier> classifier;
  if (fs::exists(dir / artifact::kClassifier))
    classifier.emplace(CandidateClassifier::from_archive(load_archive(dir / artifact::kClassifier)));
  return std::unique_ptr<QueryService>(new QueryService(
      TextResources::load_default(), load_ingested_embeddings(dir), std::move(model),
      std::move(classifier), std::move(index), candidate_k, prob_threshold));
}

RankedResult QueryService::query(const std::string &question, QueryMode mode,
                                 std::size_t top_k) const {
  if (mode == QueryMode::GtiS2S) {
    if (!scorer_)
      throw Error(ErrorKind::MissingArtifact,
                  std::string(artifact::kClassifier) + " is required for gtis2s mode");
    return query(question, *scorer_, top_k);
  }
  if (question.find_first_not_of(" \t\r\n") == std::string::npos)
    throw Error(ErrorKind::InvalidArgument, "question must not be empty");
  return rank(make_query(question, resources_, model_, table_), index_, table_, top_k);
}

RankedResult QueryService::query(const std::string &question, const CandidateScorer &scorer,
                                 std::size_t top_k) const {
  if (question.find_first_not_of(" \t\r\n") == std::string::npos)
    throw Error(ErrorKind::InvalidArgument, "question must not be empty");
  return rank_guided(make_query(question, resources_, model_, table_), index_, scorer, table_,
                     candidate_k_, prob_threshold_, top_k);
}

ordered_json error_json(const std::exception &e) {
  if (const auto *err = dynamic_cast<const Error *>(&e))
    return {{"error", to_string(err->kind())}, {"message", err->what()}};
  return {{"error", "Internal"}, {"message", e.what()}};
}

} // namespace faqforge
