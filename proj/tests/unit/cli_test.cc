#include <initializer_list>
#include <string>
#include <vector>

#include "cwp/cli.h"
#include "cwp/io.h"
#include "cwp/stub_server.h"
#include "doctest.h"
#include "json.hpp"
#include "test_util.h"

using namespace cwp;
namespace fs = std::filesystem;

namespace {

int run_cli(std::initializer_list<std::string> args) {
  std::vector<std::string> owned{"cwp"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

const std::string kTrain =
    "Sentence_id\tText\tclass_label\n"
    "1\tObama said we built 40 schools in Texas last year.\tYes\n"
    "2\tThank you.\tNo\n"
    "3\tI think so.\tNo\n"
    "4\tWe will discuss the budget with Congress tomorrow morning.\tNo\n"
    "5\tTaxes went up 12 percent.\tYes\n"
    "6\tWell.\tNo\n"
    "7\tThe people of Ohio deserve better schools and safer streets everywhere.\tNo\n"
    "8\tGood evening.\tNo\n";

const std::string kTest =
    "Sentence_id\tText\tclass_label\n"
    "t1\tUnemployment fell 2 percent.\tYes\n"
    "t2\tI love this country.\tNo\n"
    "t3\tWe passed the law in 2010.\tYes\n";

struct Workspace {
  fs::path dir;
  fs::path config;
  fs::path out;
};

Workspace workspace(const std::string& name, const std::string& base_url,
                    nlohmann::json extra = nlohmann::json::object()) {
  Workspace w;
  w.dir = testing::scratch_dir(name);
  w.out = w.dir / "out";
  io::write_file(w.dir / "train.tsv", kTrain);
  io::write_file(w.dir / "test.tsv", kTest);
  nlohmann::json cfg = {
      {"seed", 3},
      {"paths", {{"partitions", {{"train", "train.tsv"}, {"test", "test.tsv"}}}}},
      {"llm",
       {{"base_url", base_url},
        {"model", "stub"},
        {"retry", {{"max_attempts", 2}, {"initial_backoff_ms", 1}, {"max_backoff_ms", 2}}}}},
      {"prune", {{"embed_dim", 16}}},
  };
  cfg.merge_patch(extra);
  w.config = w.dir / "config.json";
  io::write_file(w.config, cfg.dump(2));
  return w;
}

std::string read(const fs::path& p) { return io::read_file(p); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 1") {
  CHECK(run_cli({}) == cli::kExitUsage);
  CHECK(run_cli({"frobnicate"}) == cli::kExitUsage);
  CHECK(run_cli({"prune", "--fast"}) == cli::kExitUsage);
  CHECK(run_cli({"--help"}) == cli::kExitOk);
  CHECK(run_cli({"--config", "/nonexistent/config.json", "stats"}) == cli::kExitUsage);

  const auto w = workspace("usage", "http://127.0.0.1:9");
  const std::string cfg = w.config.string(), out = w.out.string();
  CHECK(run_cli({"--config", cfg, "--out", out, "prune", "--step1-only", "--step2-only"}) ==
        cli::kExitUsage);
  CHECK(run_cli({"--config", cfg, "--out", out, "stats", "--partition", "dev"}) ==
        cli::kExitUsage);
  CHECK(run_cli({"--config", cfg, "--out", out, "predict", "--variant", "p9"}) ==
        cli::kExitUsage);
  // prune needs a verb catalog, which classify-verbs produces.
  CHECK(run_cli({"--config", cfg, "--out", out, "prune"}) == cli::kExitUsage);

  const auto missing = workspace("usage_missing", "http://127.0.0.1:9",
                                 {{"paths", {{"annotations", "nope.tsv"}}}});
  CHECK(run_cli({"--config", missing.config.string(), "stats"}) == cli::kExitUsage);
  const auto bad_key = workspace("usage_key", "http://127.0.0.1:9", {{"colour", 1}});
  CHECK(run_cli({"--config", bad_key.config.string(), "stats"}) == cli::kExitUsage);
}

TEST_CASE("data errors exit 2") {
  const auto w = workspace("data", "http://127.0.0.1:9");
  io::write_file(w.dir / "train.tsv", "Sentence_id\tText\tclass_label\n1\ta\tMaybe\n");
  CHECK(run_cli({"--config", w.config.string(), "--out", w.out.string(), "stats"}) ==
        cli::kExitData);
}

TEST_CASE("stats and finetune-config") {
  const auto w = workspace("stats", "http://127.0.0.1:9");
  const std::string cfg = w.config.string(), out = w.out.string();
  REQUIRE(run_cli({"--config", cfg, "--out", out, "stats"}) == cli::kExitOk);
  const auto stats = nlohmann::json::parse(read(w.out / "stats.json"));
  CHECK(stats["train"]["n_yes"] == 2);
  CHECK(stats["train"]["n_no"] == 6);
  CHECK(stats["test"]["n_total"] == 3);
  CHECK(read(w.out / "length_histogram.csv").starts_with("partition,length,raw_count,content_count\n"));
  CHECK(fs::exists(w.out / "run_config.json"));
  CHECK(read(w.out / "run_config.json").find(out) == std::string::npos);

  REQUIRE(run_cli({"--out", out, "finetune-config", "--model", "mixtral-8x7b"}) == cli::kExitOk);
  const auto ft = nlohmann::json::parse(read(w.out / "finetune_config.json"));
  CHECK(ft["train_batch_size"] == 1);
  CHECK(run_cli({"--out", out, "finetune-config"}) == cli::kExitUsage);
}

TEST_CASE("verbs, pruning, prediction and evaluation against the stub") {
  stub::StubChatServer server(stub::default_responder(1));
  server.start();
  const auto w = workspace("pipeline", server.base_url());
  const std::string cfg = w.config.string(), out = w.out.string();

  REQUIRE(run_cli({"--config", cfg, "--out", out, "annotate"}) == cli::kExitOk);
  CHECK(read(w.out / "annotations.tsv").starts_with("sentence_id\tentities\tverbs\n1\t"));

  REQUIRE(run_cli({"--config", cfg, "--out", out, "classify-verbs"}) == cli::kExitOk);
  const std::size_t first = server.request_count();
  CHECK(first > 0);
  CHECK(read(w.out / "verb_catalog.tsv").find("discuss\t5\n") != std::string::npos);
  REQUIRE(run_cli({"--config", cfg, "--out", out, "classify-verbs"}) == cli::kExitOk);
  CHECK(server.request_count() == first);  // all cached

  REQUIRE(run_cli({"--config", cfg, "--out", out, "prune", "--both"}) == cli::kExitOk);
  const auto report = nlohmann::json::parse(read(w.out / "prune_report.json"));
  CHECK(report["input_size"] == 8);
  CHECK(report["mode"] == "both");
  REQUIRE(run_cli({"--config", cfg, "--out", out, "prune", "--step1-only", "--min-length", "1"}) ==
          cli::kExitOk);
  REQUIRE(run_cli({"--config", cfg, "--out", out, "sweep"}) == cli::kExitOk);
  const std::string sweep = read(w.out / "sweep.csv");
  CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 9);
  REQUIRE(run_cli({"--config", cfg, "--out", out, "sweep", "--lengths", "8"}) == cli::kExitOk);
  const std::string single = read(w.out / "sweep.csv");
  CHECK(std::count(single.begin(), single.end(), '\n') == 2);

  REQUIRE(run_cli({"--config", cfg, "--out", out, "predict", "--k", "3"}) == cli::kExitOk);
  CHECK(read(w.out / "votes.tsv").starts_with("sentence_id\tlabel\nt1\t"));
  REQUIRE(run_cli({"--config", cfg, "--out", out, "eval", "--k", "3"}) == cli::kExitOk);
  const auto metrics = nlohmann::json::parse(read(w.out / "metrics.json"));
  CHECK(metrics["aggregate"]["n_trials"] == 1);
  CHECK(read(w.out / "table.csv").starts_with("Partition,Setting,Accuracy"));

  REQUIRE(run_cli({"--config", cfg, "--out", out, "project2d"}) == cli::kExitOk);
  const std::string proj = read(w.out / "projection.csv");
  CHECK(proj.starts_with("id,x,y,label,stage\n"));
  CHECK(std::count(proj.begin(), proj.end(), '\n') == 9);
}

TEST_CASE("perfect predictions evaluate to F1 1") {
  const auto w = workspace("perfect", "http://127.0.0.1:9");
  io::write_file(w.dir / "pred.tsv",
                 "sentence_id\trun_index\tlabel\n"
                 "t1\t1\tYes\nt2\t1\tNo\nt3\t1\tYes\n"
                 "t1\t2\tYes\nt2\t2\tNo\nt3\t2\tYes\n");
  REQUIRE(run_cli({"--config", w.config.string(), "--out", w.out.string(), "eval",
                   "--predictions", (w.dir / "pred.tsv").string(), "--k", "2"}) ==
          cli::kExitOk);
  const auto metrics = nlohmann::json::parse(read(w.out / "metrics.json"));
  CHECK(metrics["aggregate"]["f1"]["mean"] == 1.0);
  CHECK(metrics["aggregate"]["consistency"]["mean"] == 1.0);
}

TEST_CASE("tied votes exit 2 after writing the runs") {
  stub::StubChatServer server([](const stub::StubRequest& r) {
    return stub::Reply{200, r.occurrence % 2 ? "Yes" : "No"};
  });
  server.start();
  const auto w = workspace("tie", server.base_url());
  CHECK(run_cli({"--config", w.config.string(), "--out", w.out.string(), "predict", "--k", "2"}) ==
        cli::kExitData);
  CHECK(fs::exists(w.out / "predictions.tsv"));
  CHECK_FALSE(fs::exists(w.out / "votes.tsv"));
}

TEST_CASE("unreachable endpoint exits 3") {
  int port;
  {
    stub::StubChatServer probe([](const stub::StubRequest&) { return stub::Reply{}; });
    probe.start();
    port = probe.port();
  }
  const auto w = workspace("endpoint", "http://127.0.0.1:" + std::to_string(port));
  CHECK(run_cli({"--config", w.config.string(), "--out", w.out.string(), "predict", "--k", "1"}) ==
        cli::kExitEndpoint);
  stub::StubChatServer failing([](const stub::StubRequest&) { return stub::Reply{500, ""}; });
  failing.start();
  const auto w2 = workspace("endpoint500", failing.base_url());
  CHECK(run_cli({"--config", w2.config.string(), "--out", w2.out.string(), "classify-verbs"}) ==
        cli::kExitOk);  // verbs that cannot be classified are recorded as None
  CHECK(run_cli({"--config", w2.config.string(), "--out", w2.out.string(), "predict"}) ==
        cli::kExitEndpoint);
}

}  // TEST_SUITE
