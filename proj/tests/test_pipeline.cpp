#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "checks.hpp"
#include "faqforge/error.hpp"
#include "faqforge/pipeline.hpp"
#include "faqforge/service.hpp"

// After Eigen: <resolv.h> defines a _res macro that breaks its headers.
#include <httplib.h>

namespace fs = std::filesystem;
using namespace faqforge;

namespace {

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / ("faqforge_test_" + name);
  fs::remove_all(dir);
  return dir;
}

PipelineConfig toy_config(const fs::path &dir) {
  PipelineConfig c;
  c.corpus = checks::fixture("toy.jsonl");
  c.embeddings = checks::fixture("vectors.txt");
  c.artifacts_dir = dir;
  c.seq2seq.encoder_units = 24;
  c.seq2seq.decoder_embedding_dim = 8;
  c.seq2seq.dropout = 0.0;
  c.seq2seq.epochs = 150;
  c.seq2seq.batch_size = 2;
  c.seq2seq.learning_rate = 1e-2;
  c.classifier.gru_units = 8;
  c.classifier.dense_units = 8;
  c.classifier.epochs = 40;
  c.classifier.dropout = 0.0;
  c.classifier.learning_rate = 1e-2;
  c.classifier.batch_size = 4;
  c.seed = 5;
  return c;
}

ErrorKind kind_of(const std::function<void()> &f) {
  try {
    f();
  } catch (const Error &e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::Io;
}

// Builds the toy artifacts once for the whole suite.
const fs::path &built_toy() {
  static const fs::path dir = [] {
    const fs::path d = fresh_dir("toy_built");
    const auto c = toy_config(d);
    cmd_ingest(c);
    cmd_train(c);
    cmd_translate(c);
    return d;
  }();
  return dir;
}

int run_cli(const std::string &args, std::string *out = nullptr, std::string *err = nullptr) {
  const fs::path o = fs::temp_directory_path() / "faqforge_cli_out";
  const fs::path e = fs::temp_directory_path() / "faqforge_cli_err";
  const std::string cmd = std::string(FAQFORGE_CLI) + " " + args + " >" + o.string() + " 2>" + e.string();
  const int status = std::system(cmd.c_str());
  if (out) *out = slurp(o);
  if (err) *err = slurp(e);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Pipeline, TrainWithoutIngestIsMissingArtifact) {
  const auto dir = fresh_dir("no_ingest");
  EXPECT_EQ(kind_of([&] { cmd_train(toy_config(dir)); }), ErrorKind::MissingArtifact);
  EXPECT_EQ(kind_of([&] { cmd_translate(toy_config(dir)); }), ErrorKind::MissingArtifact);
  EXPECT_EQ(kind_of([&] { QueryService::open(dir); }), ErrorKind::MissingArtifact);
}

TEST(Pipeline, StagesWriteArtifactsAndManifests) {
  const auto &dir = built_toy();
  for (const char *name : {"corpus.jsonl", "embeddings.bin", "keywords.jsonl", "seq2seq.faqa",
                           "classifier.faqa", "index.jsonl", "ingest.manifest.json",
                           "train.manifest.json", "translate.manifest.json"})
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  const auto manifest = nlohmann::json::parse(slurp(dir / "train.manifest.json"));
  EXPECT_EQ(manifest["config"]["digest"], training_digest(toy_config(dir)));
  EXPECT_EQ(manifest["outputs"]["seq2seq.faqa"], sha256_file(dir / "seq2seq.faqa"));
}

TEST(Pipeline, RerunsAreByteIdentical) {
  const auto &first = built_toy();
  const auto dir = fresh_dir("toy_rerun");
  const auto c = toy_config(dir);
  cmd_ingest(c);
  cmd_train(c);
  cmd_translate(c);
  for (const char *name : {"corpus.jsonl", "embeddings.bin", "keywords.jsonl", "seq2seq.faqa",
                           "classifier.faqa", "index.jsonl", "train.manifest.json"})
    EXPECT_EQ(slurp(first / name), slurp(dir / name)) << name;
}

TEST(Pipeline, TranslateRefusesDifferentConfig) {
  auto c = toy_config(built_toy());
  c.tau = 0.4;
  EXPECT_EQ(kind_of([&] { cmd_translate(c); }), ErrorKind::ConfigMismatch);
}

TEST(Pipeline, EvaluateRefusesForeignCorpus) {
  auto c = toy_config(built_toy());
  c.corpus = checks::fixture("webapps.jsonl");
  EXPECT_EQ(kind_of([&] { cmd_evaluate(c); }), ErrorKind::ConfigMismatch);
}

TEST(Pipeline, ArtifactDirectoryPrecedence) {
  ::setenv("FAQFORGE_ARTIFACTS", "/from/env", 1);
  EXPECT_EQ(resolve_artifacts_dir(fs::path("/from/flag")), fs::path("/from/flag"));
  EXPECT_EQ(resolve_artifacts_dir(std::nullopt), fs::path("/from/env"));
  ::unsetenv("FAQFORGE_ARTIFACTS");
  EXPECT_EQ(resolve_artifacts_dir(std::nullopt), fs::path("artifacts"));
}

TEST(QueryServiceTest, IndexedQuestionRanksFirst) {
  const auto service = QueryService::open(built_toy());
  for (const auto &t : service->index().tuples) {
    const auto r = service->query(t.question, QueryMode::TiS2S, 3);
    ASSERT_EQ(r.entries.size(), 3u);
    EXPECT_DOUBLE_EQ(r.entries[0].distance, 0.0) << t.question;
    // Every question shares its thread's keywords, so the top hit is in the thread.
    EXPECT_EQ(r.entries[0].entry_id / 3, t.entry_id / 3) << t.question;
  }
}

TEST(QueryServiceTest, EmptyQuestionIsRejected) {
  const auto service = QueryService::open(built_toy());
  EXPECT_EQ(kind_of([&] { service->query("  ", QueryMode::TiS2S, 3); }),
            ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([&] { service->query("", QueryMode::GtiS2S, 3); }),
            ErrorKind::InvalidArgument);
}

TEST(QueryServiceTest, AlwaysAcceptGuidedEqualsUnguided) {
  const auto service = QueryService::open(built_toy(), 100, 0.5);
  const ConstantScorer accept(service->index().tuples.size(), 1.0);
  for (const char *q : {"is dropbox secure", "split gmail conversation", "unrelated words"})
    EXPECT_EQ(service->query(q, accept, 6), service->query(q, QueryMode::TiS2S, 6)) << q;
}

TEST(QueryServiceTest, GuidedModeUsesClassifier) {
  const auto service = QueryService::open(built_toy());
  ASSERT_TRUE(service->has_classifier());
  const auto r = service->query("Is sensitive data on dropbox secure", QueryMode::GtiS2S, 6);
  ASSERT_EQ(r.entries.size(), 6u);
  EXPECT_LT(r.entries[0].entry_id, 3u);
}

TEST(QueryServiceTest, MismatchedIndexIsRefused) {
  const auto dir = fresh_dir("toy_mismatch");
  fs::copy(built_toy(), dir);
  std::string index = slurp(dir / "index.jsonl");
  const auto at = index.find("\"model_fingerprint\":\"") + 21;
  index[at] = index[at] == 'a' ? 'b' : 'a';
  std::ofstream(dir / "index.jsonl", std::ios::binary) << index;
  EXPECT_EQ(kind_of([&] { QueryService::open(dir); }), ErrorKind::ConfigMismatch);
}

TEST(Http, QueryAndHealthEndpoints) {
  const auto service = QueryService::open(built_toy());
  HttpService server(service.get());
  const int port = server.bind("127.0.0.1", 0);
  std::thread worker([&] { server.listen(); });
  httplib::Client client("127.0.0.1", port);
  for (int i = 0; i < 100 && !client.Get("/health"); ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(10));

  const auto health = client.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(nlohmann::json::parse(health->body)["status"], "ok");

  const auto ok = client.Post("/query", R"({"question":"Splitting conversations in gmail","top_k":2,"mode":"tis2s"})",
                              "application/json");
  ASSERT_TRUE(ok);
  EXPECT_EQ(ok->status, 200);
  const auto body = nlohmann::json::parse(ok->body);
  ASSERT_EQ(body.size(), 2u);
  // Every gmail entry translates to the same keywords, so ties go to the lowest id.
  EXPECT_EQ(body[0]["entry_id"], 3);
  EXPECT_EQ(body[0]["answer"], "Turn off conversation view.");

  const auto empty = client.Post("/query", R"({"question":"","top_k":2})", "application/json");
  ASSERT_TRUE(empty);
  EXPECT_EQ(empty->status, 400);
  EXPECT_EQ(nlohmann::json::parse(empty->body)["error"], "InvalidArgument");

  const auto bad_mode = client.Post("/query", R"({"question":"gmail","mode":"bm25"})", "application/json");
  ASSERT_TRUE(bad_mode);
  EXPECT_EQ(bad_mode->status, 400);
  const auto junk = client.Post("/query", "not json", "application/json");
  ASSERT_TRUE(junk);
  EXPECT_EQ(junk->status, 400);

  server.stop();
  worker.join();
}

TEST(Http, MissingArtifactsGive503) {
  HttpService server(nullptr);
  const int port = server.bind("127.0.0.1", 0);
  std::thread worker([&] { server.listen(); });
  httplib::Client client("127.0.0.1", port);
  httplib::Result res;
  for (int i = 0; i < 100 && !(res = client.Post("/query", R"({"question":"x"})", "application/json")); ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 503);
  server.stop();
  worker.join();
}

TEST(Cli, ErrorsAreJsonWithNonzeroExit) {
  const auto dir = fresh_dir("cli_errors");
  std::string err;
  EXPECT_EQ(run_cli("train --artifacts-dir " + dir.string(), nullptr, &err), 2);
  EXPECT_EQ(nlohmann::json::parse(err)["error"], "MissingArtifact");
  EXPECT_EQ(run_cli("query '' --artifacts-dir " + built_toy().string(), nullptr, &err), 2);
  EXPECT_EQ(nlohmann::json::parse(err)["error"], "InvalidArgument");
  EXPECT_EQ(run_cli("bogus-command", nullptr, &err), 2);
}

TEST(Cli, QueryPrintsJson) {
  std::string out;
  ASSERT_EQ(run_cli("query 'Can i split a conversation in gmail' --top-k 2 --artifacts-dir " +
                        built_toy().string(),
                    &out),
            0);
  const auto j = nlohmann::json::parse(out);
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["question"], "Can i split a conversation in gmail");
}

TEST(Cli, EnvironmentSelectsArtifactDirectory) {
  std::string out;
  const std::string env = "FAQFORGE_ARTIFACTS=" + built_toy().string() + " ";
  const fs::path o = fs::temp_directory_path() / "faqforge_cli_env_out";
  const std::string cmd = env + FAQFORGE_CLI + " query 'dropbox security' --json >" + o.string() + " 2>/dev/null";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(nlohmann::json::parse(slurp(o)).is_array());
}

TEST(Cli, EvaluateJsonReport) {
  const auto dir = fresh_dir("cli_eval");
  ASSERT_EQ(run_cli("ingest --corpus " + checks::fixture("webapps.jsonl").string() + " --embeddings " +
                    checks::fixture("vectors.txt").string() + " --artifacts-dir " + dir.string() + " --json"),
            0);
  std::string out;
  ASSERT_EQ(run_cli("evaluate --json --folds 2 --encoder-units 16 --decoder-embedding-dim 8"
                    " --gru-units 8 --dense-units 8 --seq2seq-epochs 3 --classifier-epochs 2"
                    " --artifacts-dir " + dir.string(),
                    &out),
            0);
  const auto j = nlohmann::ordered_json::parse(out);
  EXPECT_TRUE(j.contains("map"));
  EXPECT_TRUE(j.contains("p_at_5"));
  EXPECT_EQ(slurp(dir / "report.json"), j.dump(2) + "\n");
  EXPECT_TRUE(fs::exists(dir / "report.txt"));
}
