#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "confls/calibration.hpp"
#include "confls/confidence.hpp"
#include "confls/dataset.hpp"
#include "confls/text_io.hpp"
#include "manifest.hpp"
#include "test_support.hpp"

using namespace confls;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliFixture {
 public:
  CliFixture() : dir_("cli") { ::unsetenv(cli::kOutDirEnv); }
  std::string file(const std::string& name) const { return dir_.file(name); }

  void gen(const std::string& name, const std::string& noise = "0.2") {
    const auto r = run({"gen-data", "--classes", "3", "--per-class", "40", "--dim", "2", "--raters", "10", "--noise",
                        noise, "--seed", "7", "--out", file(name)});
    REQUIRE_MESSAGE(r.code == 0, r.err);
  }

 private:
  testing::TempDir dir_;
};

}  // namespace

TEST_CASE_FIXTURE(CliFixture, "gen-data writes the requested sample count deterministically") {
  const auto r = run({"gen-data", "--classes", "3", "--per-class", "200", "--dim", "2", "--raters", "10", "--noise",
                      "0.2", "--seed", "7", "--out", file("d.jsonl")});
  REQUIRE(r.code == 0);
  CHECK(load_dataset(file("d.jsonl")).size() == 600);
  const auto first = read_file(file("d.jsonl"));
  REQUIRE(run({"gen-data", "--classes", "3", "--per-class", "200", "--dim", "2", "--raters", "10", "--noise", "0.2",
               "--seed", "7", "--out", file("d.jsonl")})
              .code == 0);
  CHECK(read_file(file("d.jsonl")) == first);
}

TEST_CASE_FIXTURE(CliFixture, "usage errors exit with 1") {
  auto r = run({"gen-data", "--classes", "3", "--dim", "2", "--raters", "10", "--noise", "0.2", "--out",
                file("d.jsonl")});
  CHECK(r.code == cli::kUsage);
  CHECK(r.err.find("per-class") != std::string::npos);

  r = run({"gen-data", "--classes", "3", "--per-class", "5", "--dim", "2", "--raters", "10", "--noise", "1.5",
           "--out", file("d.jsonl")});
  CHECK(r.code == cli::kUsage);
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"frobnicate"}).code == cli::kUsage);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE_FIXTURE(CliFixture, "precompute-confidence") {
  gen("d.jsonl", "0.0");
  SUBCASE("human sidecar scalars equal sigma; zero noise gives the one-hot maximum") {
    const auto r = run({"precompute-confidence", "--data", file("d.jsonl"), "--kind", "human", "--out",
                        file("h.jsonl")});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto table = load_table(file("h.jsonl"));
    CHECK(table.kind() == ConfidenceKind::human);
    CHECK(table.size() == 120);
    for (const auto& [id, e] : table.entries()) {
      CHECK(std::abs(e.scalar - std::sqrt(2.0) / 3.0) <= 1e-12);
      CHECK(e.scalar == human_confidence_scalar(e.vector));
    }
  }
  SUBCASE("model sidecar is deterministic per seed") {
    const std::vector<std::string> args{"precompute-confidence", "--data", file("d.jsonl"), "--kind", "model",
                                        "--epochs", "5", "--seed", "1", "--out", file("m.jsonl")};
    REQUIRE(run(args).code == 0);
    const auto first = read_file(file("m.jsonl"));
    REQUIRE(run(args).code == 0);
    CHECK(read_file(file("m.jsonl")) == first);
    CHECK(load_table(file("m.jsonl")).kind() == ConfidenceKind::model);
  }
  SUBCASE("missing dataset is a data error") {
    CHECK(run({"precompute-confidence", "--data", file("nope.jsonl"), "--kind", "human", "--out", file("h.jsonl")})
              .code == cli::kDataError);
  }
}

TEST_CASE_FIXTURE(CliFixture, "train and evaluate") {
  gen("d.jsonl");
  REQUIRE(run({"split", "--data", file("d.jsonl"), "--train-out", file("train.jsonl"), "--test-out",
               file("test.jsonl"), "--seed", "1"})
              .code == 0);
  CHECK(load_dataset(file("train.jsonl")).size() == 96);
  CHECK(load_dataset(file("test.jsonl")).size() == 24);

  SUBCASE("curriculum without its sidecar names the missing file") {
    auto r = run({"train", "--data", file("train.jsonl"), "--strategy", "mccl", "--model-out", file("m.txt"),
                  "--history-out", file("h.jsonl")});
    CHECK(r.code == cli::kDataError);
    CHECK(r.err.find("--model-confidence") != std::string::npos);
    r = run({"train", "--data", file("train.jsonl"), "--strategy", "mccl", "--model-confidence",
             file("absent.jsonl"), "--model-out", file("m.txt"), "--history-out", file("h.jsonl")});
    CHECK(r.code == cli::kDataError);
    CHECK(r.err.find("absent.jsonl") != std::string::npos);
  }

  SUBCASE("best cell: hccl + hcls") {
    REQUIRE(run({"precompute-confidence", "--data", file("train.jsonl"), "--kind", "human", "--out",
                 file("human.jsonl")})
                .code == 0);
    auto r = run({"train", "--data", file("train.jsonl"), "--strategy", "hccl", "--loss", "hcls", "--alpha", "0.1",
                  "--gamma", "0.1", "--r", "0.5", "--end-epoch", "5", "--epochs", "10", "--human-confidence",
                  file("human.jsonl"), "--model-out", file("m.txt"), "--history-out", file("hist.jsonl")});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto lines = split_lines(read_file(file("hist.jsonl")));
    REQUIRE(lines.size() == 10);
    const auto first = nlohmann::json::parse(lines[0]);
    CHECK(first.at("included_fraction").get<double>() < 1.0);
    CHECK(nlohmann::json::parse(lines[5]).at("mu").get<double>() == 0.0);

    r = run({"evaluate", "--model", file("m.txt"), "--data", file("test.jsonl"), "--out", file("eval.json")});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto record = nlohmann::json::parse(read_file(file("eval.json")));
    CHECK(record.at("num_bins").get<int>() == 15);
    CHECK(record.at("n").get<int>() == 24);
    const auto bins = parse_reliability_csv(read_file(file("eval.json.reliability.csv")));
    CHECK(bins.size() == 15);
    CHECK(std::abs(ece_from_bins(bins) - record.at("ece").get<double>()) <= 1e-12);

    r = run({"evaluate", "--model", file("m.txt"), "--data", file("test.jsonl"), "--bins", "1", "--out",
             file("eval1.json"), "--reliability-out", file("rel1.csv")});
    REQUIRE(r.code == 0);
    CHECK(parse_reliability_csv(read_file(file("rel1.csv"))).size() == 1);
  }

  SUBCASE("dimension mismatch is a data error") {
    REQUIRE(run({"train", "--data", file("train.jsonl"), "--epochs", "1", "--model-out", file("m.txt"),
                 "--history-out", file("h.jsonl")})
                .code == 0);
    REQUIRE(run({"gen-data", "--classes", "3", "--per-class", "5", "--dim", "4", "--raters", "3", "--noise", "0",
                 "--out", file("wide.jsonl")})
                .code == 0);
    CHECK(run({"evaluate", "--model", file("m.txt"), "--data", file("wide.jsonl"), "--out", file("e.json")}).code ==
          cli::kDataError);
  }

  SUBCASE("divergence exits with 3") {
    CHECK(run({"train", "--data", file("train.jsonl"), "--lr", "1e200", "--momentum", "0", "--model-out",
               file("m.txt"), "--history-out", file("h.jsonl")})
              .code == cli::kNumericalAbort);
  }
}

TEST_CASE_FIXTURE(CliFixture, "overfit training set: high accuracy, positive ECE") {
  REQUIRE(run({"gen-data", "--classes", "3", "--per-class", "20", "--dim", "2", "--raters", "10", "--noise", "0.3",
               "--seed", "3", "--cluster-stddev", "0.6", "--out", file("d.jsonl")})
              .code == 0);
  REQUIRE(run({"train", "--data", file("d.jsonl"), "--epochs", "200", "--hidden", "64", "--lr", "0.1",
               "--lr-decay", "1", "--batch-size", "8", "--model-out", file("m.txt"), "--history-out",
               file("h.jsonl")})
              .code == 0);
  REQUIRE(run({"evaluate", "--model", file("m.txt"), "--data", file("d.jsonl"), "--out", file("e.json")}).code == 0);
  const auto record = nlohmann::json::parse(read_file(file("e.json")));
  const double accuracy = record.at("accuracy").get<double>();
  const double ece_value = record.at("ece").get<double>();
  CHECK(accuracy >= 0.95);
  CHECK(ece_value > 0.0);

  // Oracle: recompute from the saved model and data outside the CLI.
  const auto model = load_model(file("m.txt"));
  const auto data = load_dataset(file("d.jsonl"));
  std::vector<ProbVector> probs;
  for (const auto& p : predict_all(model, data)) probs.push_back(p.probs);
  const auto labels = modal_labels(data);
  CHECK(std::abs(ece(probs, labels, 15) - ece_value) <= 1e-12);
  double conf = 0.0;
  for (const auto& p : probs) conf += p.max();
  conf /= static_cast<double>(probs.size());
  CHECK(conf - accuracy != 0.0);
}

TEST_CASE_FIXTURE(CliFixture, "rerun from a manifest reproduces outputs byte for byte") {
  gen("d.jsonl");
  REQUIRE(run({"precompute-confidence", "--data", file("d.jsonl"), "--kind", "model", "--epochs", "3", "--out",
               file("mc.jsonl")})
              .code == 0);
  REQUIRE(run({"train", "--data", file("d.jsonl"), "--strategy", "mccl", "--loss", "mcls", "--epochs", "4",
               "--model-confidence", file("mc.jsonl"), "--model-out", file("m.txt"), "--history-out",
               file("h.jsonl")})
              .code == 0);
  const auto manifest = cli::load_manifest(file("m.txt.manifest.json"));
  CHECK(manifest.command == "train");
  CHECK(manifest.inputs.size() == 2);
  const auto model = read_file(file("m.txt"));
  const auto history = read_file(file("h.jsonl"));

  std::filesystem::remove(file("m.txt"));
  std::filesystem::remove(file("h.jsonl"));
  const auto r = run({"rerun", "--manifest", file("m.txt.manifest.json")});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(read_file(file("m.txt")) == model);
  CHECK(read_file(file("h.jsonl")) == history);

  // A changed input is detected.
  write_file(file("mc.jsonl"), read_file(file("mc.jsonl")) + "\n");
  CHECK(run({"rerun", "--manifest", file("m.txt.manifest.json")}).code == cli::kDataError);
}

TEST_CASE_FIXTURE(CliFixture, "relative outputs resolve under the output-directory override") {
  testing::TempDir out("cli_out");
  ::setenv(cli::kOutDirEnv, out.path().c_str(), 1);
  const auto r = run({"gen-data", "--classes", "2", "--per-class", "3", "--dim", "1", "--raters", "2", "--noise",
                      "0", "--out", "rel.jsonl"});
  ::unsetenv(cli::kOutDirEnv);
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(out.path() / "rel.jsonl"));
  CHECK(std::filesystem::exists(out.path() / "rel.jsonl.manifest.json"));
}
