#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "confls/confidence.hpp"
#include "confls/errors.hpp"
#include "confls/text_io.hpp"
#include "test_support.hpp"

using namespace confls;
using doctest::Approx;

namespace {

ProbVector pv(std::vector<double> v) { return ProbVector(std::move(v)); }

// Independent two-pass population standard deviation via std::accumulate.
double population_stddev(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  const double ss = std::accumulate(v.begin(), v.end(), 0.0,
                                    [&](double acc, double x) { return acc + (x - mean) * (x - mean); });
  return std::sqrt(ss / static_cast<double>(v.size()));
}

/// A one-layer model whose logits equal log(probs) for every input.
ModelParams constant_model(std::vector<double> probs, std::size_t feature_dim) {
  Layer layer;
  layer.inputs = feature_dim;
  layer.outputs = probs.size();
  layer.weights.assign(feature_dim * probs.size(), 0.0);
  for (double p : probs) layer.biases.push_back(std::log(p));
  return ModelParams{{layer}};
}

}  // namespace

TEST_CASE("human_confidence_scalar") {
  CHECK(std::abs(human_confidence_scalar(ProbVector::uniform(10))) <= 1e-12);
  CHECK(std::abs(human_confidence_scalar(pv({1, 0, 0, 0, 0, 0, 0, 0, 0, 0})) - 0.3) <= 1e-12);
  CHECK(std::abs(human_confidence_scalar(pv({0.8, 0.2})) - 0.3) <= 1e-12);
}

TEST_CASE("sigma extremes and permutation invariance") {
  Rng rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.index(12);
    const auto d = testing::random_simplex(rng, n);
    const double sigma = human_confidence_scalar(d);
    const double top = std::sqrt(static_cast<double>(n) - 1.0) / static_cast<double>(n);
    CHECK(sigma >= 0.0);
    CHECK(sigma <= top + 1e-12);
    CHECK(sigma == Approx(population_stddev({d.begin(), d.end()})).epsilon(1e-12));

    std::vector<double> reversed(d.begin(), d.end());
    std::reverse(reversed.begin(), reversed.end());
    CHECK(human_confidence_scalar(pv(reversed)) == Approx(sigma).epsilon(1e-12));
  }
  for (std::size_t n = 2; n <= 12; ++n) {
    const double top = std::sqrt(static_cast<double>(n) - 1.0) / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<double> v(n, 0.0);
      v[k] = 1.0;
      CHECK(std::abs(human_confidence_scalar(pv(v)) - top) <= 1e-12);
    }
    CHECK(std::abs(human_confidence_scalar(ProbVector::uniform(n))) <= 1e-12);
  }
}

TEST_CASE("human_confidence_vector equals the rater distribution") {
  CHECK(human_confidence_vector({"a", {0.0}, {8, 2}}) == pv({0.8, 0.2}));
  CHECK(human_confidence_vector({"a", {0.0}, {10, 0}}) == pv({1.0, 0.0}));
  CHECK(human_confidence_vector({"a", {0.0}, {1, 1, 1, 1}}) == ProbVector::uniform(4));
}

TEST_CASE("precompute_model_confidence reads the modal-label probability") {
  const Dataset d(2, 1, {{"zero", {1.0}, {3, 1}}, {"one", {2.0}, {1, 3}}});
  const auto table = precompute_model_confidence(constant_model({0.7, 0.3}, 1), d);
  REQUIRE(table.size() == 2);
  CHECK(table.kind() == ConfidenceKind::model);
  CHECK(table.at("zero").scalar == Approx(0.7).epsilon(1e-12));
  CHECK(table.at("zero").vector[0] == Approx(0.7).epsilon(1e-12));
  CHECK(table.at("one").scalar == Approx(0.3).epsilon(1e-12));
  for (const auto& [id, e] : table.entries()) {
    CHECK(e.scalar == e.vector[modal_label(d[id == "zero" ? 0 : 1])]);
  }

  SUBCASE("untrained zero model gives 1/N everywhere") {
    const Dataset four(4, 2, {{"a", {1, 2}, {1, 0, 0, 0}}, {"b", {-1, 0}, {0, 0, 2, 1}}});
    Layer layer{2, 4, std::vector<double>(8, 0.0), std::vector<double>(4, 0.0)};
    const auto t = precompute_model_confidence(ModelParams{{layer}}, four);
    for (const auto& [id, e] : t.entries()) CHECK(e.scalar == Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("feature mismatch") {
    CHECK_THROWS_AS(precompute_model_confidence(constant_model({0.5, 0.5}, 3), d), DataError);
  }
}

TEST_CASE("tables: join, save, load") {
  testing::TempDir dir("confidence");
  SyntheticConfig cfg;
  cfg.samples_per_class = 20;
  cfg.noise = 0.3;
  const auto d = generate_synthetic(cfg);
  const auto table = human_confidence_table(d);

  save_table(table, dir.file("h.jsonl"));
  const auto back = load_table(dir.file("h.jsonl"));
  CHECK(back == table);
  CHECK(serialize_table(back) == read_file(dir.file("h.jsonl")));

  const auto joined = join(back, d);
  REQUIRE(joined.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(joined[i]->scalar == human_confidence_scalar(annotation_distribution(d[i])));
  }

  SUBCASE("missing id names the id") {
    ConfidenceTable partial(ConfidenceKind::human, d.num_classes());
    for (std::size_t i = 1; i < d.size(); ++i) partial.insert(d[i].id, table.at(d[i].id));
    CHECK_THROWS_WITH_AS(join(partial, d), doctest::Contains(d[0].id.c_str()), DataError);
  }
  SUBCASE("truncated file reports a line number") {
    const auto text = read_file(dir.file("h.jsonl"));
    const auto cut = text.substr(0, text.size() / 2);
    CHECK_THROWS_WITH_AS(parse_table(cut, "h.jsonl"), doctest::Contains("h.jsonl:"), DataError);
  }
  SUBCASE("duplicate and out-of-range entries are rejected") {
    ConfidenceTable t(ConfidenceKind::human, 2);
    t.insert("a", {pv({0.5, 0.5}), 0.0});
    CHECK_THROWS_AS(t.insert("a", {pv({0.5, 0.5}), 0.0}), DataError);
    CHECK_THROWS_AS(t.insert("b", {pv({1.0, 0.0}), 0.6}), DataError);
    CHECK_THROWS_AS(t.insert("c", {ProbVector::uniform(3), 0.0}), DataError);
  }
}
