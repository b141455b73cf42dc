#include <csignal>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "faqforge/error.hpp"
#include "faqforge/pipeline.hpp"
#include "faqforge/service.hpp"

using namespace faqforge;

namespace {

HttpService *g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

void print_result(bool json, const nlohmann::ordered_json &payload, const std::string &text) {
  if (json)
    std::cout << payload.dump(2) << '\n';
  else
    std::cout << text;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"FAQ retrieval through learned intent keywords"};
  app.require_subcommand(1);
  app.fallthrough();

  PipelineConfig cfg;
  std::optional<std::string> artifacts;
  std::string corpus, embeddings, mode = "tis2s";
  std::size_t top_k = 5;
  bool json = false;
  std::vector<double> taus = {0.05, 0.15, 0.25, 0.4};
  std::vector<std::size_t> per_thread = {2, 4, 6, 8, 10};
  std::string host = "127.0.0.1";
  int port = 8080;

  app.add_option("--corpus", corpus, "FAQ corpus: .jsonl, or StackFAQ XML file/directory");
  app.add_option("--embeddings", embeddings, "word2vec vectors (.bin, or .txt/.vec text)");
  app.add_option("--tau", cfg.tau, "TF-IDF keyword threshold")->capture_default_str();
  app.add_option("--k", cfg.candidate_k, "prime candidates for gtis2s")->capture_default_str();
  app.add_option("--threshold", cfg.prob_threshold, "candidate probability threshold")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  app.add_option("--artifacts-dir", artifacts,
                 "artifact directory (default: $FAQFORGE_ARTIFACTS, else ./artifacts)");
  app.add_option("--mode", mode, "tis2s or gtis2s")->capture_default_str();
  app.add_option("--top-k", top_k, "results returned by query")->capture_default_str();
  app.add_flag("--json", json, "machine-readable output on stdout");
  app.add_option("--folds", cfg.folds, "cross-validation folds")->capture_default_str();
  app.add_option("--train-frac", cfg.train_frac, "train share of each thread")
      ->capture_default_str();
  app.add_option("--encoder-units", cfg.seq2seq.encoder_units)->capture_default_str();
  app.add_option("--decoder-units", cfg.seq2seq.decoder_units, "0 follows --encoder-units")
      ->capture_default_str();
  app.add_option("--decoder-embedding-dim", cfg.seq2seq.decoder_embedding_dim)
      ->capture_default_str();
  app.add_option("--seq2seq-epochs", cfg.seq2seq.epochs)->capture_default_str();
  app.add_option("--seq2seq-dropout", cfg.seq2seq.dropout)->capture_default_str();
  app.add_option("--gru-units", cfg.classifier.gru_units)->capture_default_str();
  app.add_option("--dense-units", cfg.classifier.dense_units)->capture_default_str();
  app.add_option("--classifier-epochs", cfg.classifier.epochs)->capture_default_str();
  app.add_option("--classifier-dropout", cfg.classifier.dropout)->capture_default_str();
  app.add_option("--batch-size", cfg.seq2seq.batch_size, "minibatch size for both models")
      ->capture_default_str();

  app.add_subcommand("ingest", "validate the corpus and filter embeddings to its vocabulary");
  app.add_subcommand("train", "extract keywords, train seq2seq and the candidate classifier");
  app.add_subcommand("translate", "build the translated FAQ index");
  app.add_subcommand("evaluate", "cross-validated MAP and P@k");
  auto *sweep = app.add_subcommand("sweep-tau", "evaluate over several tau values");
  sweep->add_option("--taus", taus)->capture_default_str();
  auto *robust = app.add_subcommand("robustness", "evaluate with fewer training questions");
  robust->add_option("--per-thread", per_thread, "training questions kept per thread")
      ->capture_default_str();
  auto *query = app.add_subcommand("query", "rank the index against one question");
  std::string question;
  query->add_option("question", question)->required();
  auto *serve = app.add_subcommand("serve", "JSON-over-HTTP query endpoint");
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << nlohmann::ordered_json{{"error", "InvalidArgument"}, {"message", e.what()}}.dump()
              << '\n';
    return 2;
  }

  cfg.classifier.batch_size = cfg.seq2seq.batch_size;
  cfg.classifier.learning_rate = cfg.seq2seq.learning_rate;
  cfg.corpus = corpus;
  cfg.embeddings = embeddings;
  cfg.artifacts_dir = resolve_artifacts_dir(artifacts);
  const std::string command = app.get_subcommands().front()->get_name();
  const ProgressFn progress = [](std::string_view msg) { std::cerr << msg << '\n'; };

  try {
    if (command == "ingest") {
      cmd_ingest(cfg);
      print_result(json, {{"status", "ok"}, {"artifacts_dir", cfg.artifacts_dir.string()}},
                   "ingested into " + cfg.artifacts_dir.string() + "\n");
    } else if (command == "train") {
      cmd_train(cfg);
      print_result(json, {{"status", "ok"}, {"digest", training_digest(cfg)}},
                   "trained models in " + cfg.artifacts_dir.string() + "\n");
    } else if (command == "translate") {
      cmd_translate(cfg);
      print_result(json, {{"status", "ok"}}, "translated index written\n");
    } else if (command == "evaluate") {
      const auto report = cmd_evaluate(cfg, progress);
      std::ostringstream table;
      write_report_table(table, report);
      print_result(json, to_json(report), table.str());
    } else if (command == "sweep-tau") {
      const auto points = cmd_sweep_tau(cfg, taus, progress);
      const auto summary = sweep_summary(points);
      print_result(json, summary, summary.dump(2) + "\n");
    } else if (command == "robustness") {
      const auto points = cmd_robustness(cfg, per_thread, progress);
      const auto summary = robustness_summary(points);
      print_result(json, summary, summary.dump(2) + "\n");
    } else if (command == "query") {
      const auto service = QueryService::open(cfg.artifacts_dir, cfg.candidate_k,
                                              cfg.prob_threshold);
      const auto result = service->query(question, parse_query_mode(mode), top_k);
      std::cout << to_json(result).dump(2) << '\n';
    } else if (command == "serve") {
      std::unique_ptr<QueryService> service;
      try {
        service = QueryService::open(cfg.artifacts_dir, cfg.candidate_k, cfg.prob_threshold);
      } catch (const Error &e) {
        if (e.kind() != ErrorKind::MissingArtifact) throw;
        std::cerr << error_json(e).dump() << '\n';
      }
      HttpService server(service.get());
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on " << host << ":" << bound << '\n';
      server.listen();
      g_server = nullptr;
    }
  } catch (const std::exception &e) {
    std::cerr << error_json(e).dump() << '\n';
    return 2;
  }
  return 0;
}
