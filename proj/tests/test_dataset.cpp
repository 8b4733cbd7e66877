#include <doctest.h>

#include <algorithm>
#include <set>

#include "confls/confidence.hpp"
#include "confls/dataset.hpp"
#include "confls/errors.hpp"
#include "confls/text_io.hpp"
#include "test_support.hpp"

using namespace confls;

namespace {

AnnotatedSample sample(std::string id, std::vector<double> f, std::vector<std::uint32_t> counts) {
  return {std::move(id), std::move(f), std::move(counts)};
}

}  // namespace

TEST_CASE("load_dataset parses header and records in file order") {
  const auto d = parse_dataset(
      "{\"num_classes\": 3, \"feature_dim\": 2}\n"
      "{\"id\": \"b\", \"features\": [0.5, -1], \"annotation_counts\": [1, 0, 2]}\n"
      "{\"id\": \"a\", \"features\": [2, 3.25], \"annotation_counts\": [0, 4, 0]}\n");
  CHECK(d.size() == 2);
  CHECK(d.num_classes() == 3);
  CHECK(d.feature_dim() == 2);
  CHECK(d[0].id == "b");
  CHECK(d[1].features == std::vector<double>{2.0, 3.25});
}

TEST_CASE("load_dataset error paths") {
  const std::string header = "{\"num_classes\": 3, \"feature_dim\": 2}\n";

  SUBCASE("all-zero annotations") {
    CHECK_THROWS_WITH_AS(
        parse_dataset(header + "{\"id\": \"z\", \"features\": [0, 0], \"annotation_counts\": [0, 0, 0]}\n"),
        doctest::Contains("sample has no annotations"), DataError);
  }
  SUBCASE("too many features names the id") {
    CHECK_THROWS_WITH_AS(
        parse_dataset(header + "{\"id\": \"wide\", \"features\": [1, 2, 3], \"annotation_counts\": [1, 0, 0]}\n"),
        doctest::Contains("wide"), DataError);
  }
  SUBCASE("malformed record reports the line number") {
    CHECK_THROWS_WITH_AS(parse_dataset(header + "{\"id\": \"ok\", \"features\": [1, 2], \"annotation_counts\": [1, 0, 0]}\n"
                                                "{\"id\": \"bad\", \"features\": [1, 2\n",
                                       "d.jsonl"),
                         doctest::Contains("d.jsonl:3"), DataError);
  }
  SUBCASE("empty file") { CHECK_THROWS_AS(parse_dataset(""), DataError); }
  SUBCASE("duplicate ids") {
    const std::string rec = "{\"id\": \"x\", \"features\": [1, 2], \"annotation_counts\": [1, 0, 0]}\n";
    CHECK_THROWS_WITH_AS(parse_dataset(header + rec + rec), doctest::Contains("duplicate"), DataError);
  }
  SUBCASE("negative count") {
    CHECK_THROWS_AS(parse_dataset(header + "{\"id\": \"n\", \"features\": [1, 2], \"annotation_counts\": [-1, 2, 0]}\n"),
                    DataError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_dataset("/nonexistent/confls.jsonl"), DataError); }
}

TEST_CASE("annotation_distribution") {
  std::vector<std::uint32_t> bird(10, 0);
  bird[0] = 8;
  bird[1] = 2;
  const auto d = annotation_distribution(sample("s", {0}, bird));
  CHECK(d[0] == 0.8);
  CHECK(d[1] == 0.2);
  for (std::size_t i = 2; i < 10; ++i) CHECK(d[i] == 0.0);

  std::vector<std::uint32_t> split_vote(10, 0);
  split_vote[0] = split_vote[1] = 5;
  const auto e = annotation_distribution(sample("s", {0}, split_vote));
  CHECK(e[0] == 0.5);
  CHECK(e[1] == 0.5);

  CHECK(annotation_distribution(sample("s", {0}, {7})).values()[0] == 1.0);
}

TEST_CASE("modal_label uses lowest-index tie-break") {
  CHECK(modal_label(sample("s", {0}, {8, 2})) == 0);
  CHECK(modal_label(sample("s", {0}, {5, 5})) == 0);
  CHECK(modal_label(sample("s", {0}, {0, 3, 3, 4})) == 3);
  CHECK(modal_label(sample("s", {0}, {0, 3, 3, 1})) == 1);
}

TEST_CASE("annotation_distribution stays on the simplex for random counts") {
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.index(12);
    std::vector<std::uint32_t> counts(n);
    for (auto& c : counts) c = static_cast<std::uint32_t>(rng.index(60));
    counts[rng.index(n)] += 1;
    const auto d = annotation_distribution(sample("s", {0}, counts));
    double sum = 0.0;
    for (double v : d) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("generate_synthetic") {
  SyntheticConfig cfg;
  cfg.num_classes = 3;
  cfg.samples_per_class = 100;
  cfg.feature_dim = 4;
  cfg.rater_count = 10;
  cfg.noise = 0.0;
  cfg.seed = 42;

  SUBCASE("zero noise gives unanimous votes and 100 per modal class") {
    const auto d = generate_synthetic(cfg);
    REQUIRE(d.size() == 300);
    std::vector<int> per_class(3, 0);
    for (const auto& s : d.samples()) {
      const auto label = modal_label(s);
      ++per_class[label];
      CHECK(s.annotation_counts[label] == 10);
      CHECK(std::count(s.annotation_counts.begin(), s.annotation_counts.end(), 0u) == 2);
      CHECK(s.features.size() == 4);
      // Zero noise means sigma hits its one-hot maximum.
      CHECK(std::abs(human_confidence_scalar(annotation_distribution(s)) - std::sqrt(2.0) / 3.0) <= 1e-12);
    }
    CHECK(per_class == std::vector<int>{100, 100, 100});
  }

  SUBCASE("same seed gives byte-identical datasets") {
    cfg.noise = 0.3;
    CHECK(serialize_dataset(generate_synthetic(cfg)) == serialize_dataset(generate_synthetic(cfg)));
    auto other = cfg;
    other.seed = 43;
    CHECK(serialize_dataset(generate_synthetic(cfg)) != serialize_dataset(generate_synthetic(other)));
  }

  SUBCASE("noise produces disagreement") {
    cfg.noise = 0.4;
    const auto d = generate_synthetic(cfg);
    std::size_t split_votes = 0;
    for (const auto& s : d.samples()) {
      std::uint32_t total = 0;
      for (auto c : s.annotation_counts) total += c;
      CHECK(total == 10);
      if (s.annotation_counts[modal_label(s)] < 10) ++split_votes;
    }
    CHECK(split_votes > 250);
  }

  SUBCASE("invalid arguments") {
    cfg.noise = 1.5;
    CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
    cfg.noise = -0.1;
    CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
    cfg.noise = 0.1;
    cfg.num_classes = 1;
    CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
    cfg.num_classes = 3;
    cfg.rater_count = 0;
    CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
  }
}

namespace {

Dataset ten_samples() {
  std::vector<AnnotatedSample> s;
  for (int i = 0; i < 10; ++i) s.push_back(sample("id" + std::to_string(i), {double(i)}, {1, 0}));
  return Dataset(2, 1, std::move(s));
}

std::set<std::string> ids(const Dataset& d) {
  std::set<std::string> out;
  for (const auto& s : d.samples()) out.insert(s.id);
  return out;
}

}  // namespace

TEST_CASE("split partitions deterministically") {
  const auto d = ten_samples();
  const auto [train, test] = split(d, 0.8, 3);
  CHECK(train.size() == 8);
  CHECK(test.size() == 2);
  auto all = ids(train);
  for (const auto& id : ids(test)) CHECK(all.insert(id).second);
  CHECK(all == ids(d));

  const auto [train2, test2] = split(d, 0.8, 3);
  CHECK(train2 == train);
  CHECK(test2 == test);

  const auto [big, small] = split(d, 0.99, 3);
  CHECK(big.size() == 9);
  CHECK(small.size() == 1);

  CHECK_THROWS_AS(split(d, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split(d, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split(Dataset(2, 1, {sample("only", {0}, {1, 0})}), 0.5, 1), std::invalid_argument);
}

TEST_CASE("split is a partition for random sizes and fractions") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(60);
    std::vector<AnnotatedSample> s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(sample("s" + std::to_string(i), {0.0}, {1, 1}));
    const Dataset d(2, 1, std::move(s));
    const double fraction = 0.05 + 0.9 * rng.uniform();
    const auto expected_test = std::max<std::size_t>(
        static_cast<std::size_t>(std::floor((1.0 - fraction) * static_cast<double>(n) + 1e-9)), 1);
    if (expected_test >= n) continue;
    const auto [train, test] = split(d, fraction, trial);
    CHECK(test.size() == expected_test);
    CHECK(train.size() + test.size() == n);
    auto all = ids(train);
    for (const auto& id : ids(test)) CHECK(all.insert(id).second);
    CHECK(all.size() == n);
  }
}

TEST_CASE("save then load round-trips bit-exactly") {
  testing::TempDir dir("dataset");
  SyntheticConfig cfg;
  cfg.noise = 0.25;
  cfg.seed = 9;
  cfg.feature_dim = 5;
  const auto d = generate_synthetic(cfg);
  save_dataset(d, dir.file("d.jsonl"));
  const auto back = load_dataset(dir.file("d.jsonl"));
  CHECK(back == d);
  CHECK(serialize_dataset(back) == read_file(dir.file("d.jsonl")));
}
