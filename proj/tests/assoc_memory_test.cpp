#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "gmrbm/assoc_memory.hpp"
#include "gmrbm/errors.hpp"
#include "test_support.hpp"

using namespace gmrbm;
using gmrbm::testing::random_model;
using gmrbm::testing::TestRng;

namespace {

// One slot with a template per stored pair equal to its normalized training
// row times `scale`.
ModelParams constructed_memory(const PairDataset& ds, double scale) {
  ModelParams p(ds.visible_count(), 1, ds.size());
  for (std::size_t k = 0; k < ds.size(); ++k) {
    auto w = p.weight_template(k, 0);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = scale * ds.training[k][i];
  }
  return p;
}

double cosine(const Vector& a, const Vector& b) {
  const double dot = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  const double na = std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0));
  const double nb = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
  return dot / (na * nb);
}

double distance(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("normalization") {
  TestRng rng(1);
  std::vector<Vector> rows;
  for (int r = 0; r < 30; ++r) {
    Vector v = rng.vector(4, 2.0);
    v[2] = 100.0 + 5.0 * v[2];
    rows.push_back(v);
  }
  const Normalization norm = fit_normalization(rows);
  std::vector<Vector> z;
  for (const Vector& r : rows) {
    z.push_back(norm.apply(r));
    CHECK(gmrbm::testing::max_abs_diff(norm.invert(z.back()), r) < 1e-9);
  }
  const Normalization again = fit_normalization(z);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(again.mean[i]) < 1e-9);
    CHECK(std::abs(again.stddev[i] - 1.0) < 1e-9);
  }
  for (const Vector& r : z) CHECK(gmrbm::testing::max_abs_diff(again.apply(r), r) < 1e-9);
}

TEST_CASE("build_pair_dataset") {
  SUBCASE("orthogonal unit vectors") {
    const std::vector<RawPair> raw{{{1.0, 0.0}, {0.0, 1.0}}, {{0.0, 1.0}, {1.0, 0.0}}};
    const PairDataset ds = build_pair_dataset(raw);
    CHECK(ds.dim == 2);
    CHECK(ds.visible_count() == 4);
    CHECK(ds.vocab == ds.responses);
    for (const Vector& row : ds.training) {
      for (double x : row) CHECK(std::abs(std::abs(x) - 1.0) < 1e-12);
    }
  }
  SUBCASE("constant dimension names the dimension") {
    const std::vector<RawPair> raw{{{1.0, 5.0}, {0.0, 1.0}}, {{0.0, 5.0}, {1.0, 0.0}}};
    try {
      build_pair_dataset(raw);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("dimension 1") != std::string::npos);
    }
  }
  SUBCASE("mismatched or too few pairs") {
    CHECK_THROWS_AS(build_pair_dataset(std::vector<RawPair>{{{1.0}, {2.0}}}), DataError);
    CHECK_THROWS_AS(
        build_pair_dataset(std::vector<RawPair>{{{1.0}, {2.0}}, {{1.0, 2.0}, {3.0, 4.0}}}),
        DataError);
  }
  SUBCASE("split and join are inverse") {
    TestRng rng(2);
    std::vector<Vector> rows;
    for (int r = 0; r < 5; ++r) rows.push_back(rng.vector(6));
    CHECK(join_pairs(split_pairs(rows)) == rows);
    CHECK_THROWS_AS(split_pairs(std::vector<Vector>{{1.0, 2.0, 3.0}}), DataError);
  }
}

TEST_CASE("synth_pairs") {
  SUBCASE("deterministic in seed") {
    CHECK(synth_pairs(10, 4, 3, PairStructure::kClustered) ==
          synth_pairs(10, 4, 3, PairStructure::kClustered));
    CHECK(synth_pairs(10, 4, 3, PairStructure::kRandom) !=
          synth_pairs(10, 4, 4, PairStructure::kRandom));
  }
  SUBCASE("random stimuli are nearly orthogonal in high dimension") {
    const auto pairs = synth_pairs(60, 200, 5, PairStructure::kRandom);
    double sum = 0.0;
    int count = 0;
    for (std::size_t a = 0; a < pairs.size(); ++a) {
      for (std::size_t b = a + 1; b < pairs.size(); ++b) {
        sum += cosine(pairs[a].first, pairs[b].first);
        ++count;
      }
    }
    CHECK(std::abs(sum / count) < 0.05);
  }
  SUBCASE("clustered responses are closer within a cluster") {
    // Pairwise response distances fall into two well-separated groups.
    const auto pairs = synth_pairs(49, 50, 6, PairStructure::kClustered);
    std::vector<double> dists;
    for (std::size_t a = 0; a < pairs.size(); ++a) {
      for (std::size_t b = a + 1; b < pairs.size(); ++b) {
        dists.push_back(distance(pairs[a].second, pairs[b].second));
      }
    }
    // Within-cluster: |noise_a - noise_b| ~ 0.5 sqrt(2 d) = 5;
    // between: sqrt(2 d (1 + 0.25)) ~ 11.2.
    double within = 0.0, between = 0.0;
    int nw = 0, nb = 0;
    for (double d : dists) {
      if (d < 8.0) {
        within += d;
        ++nw;
      } else {
        between += d;
        ++nb;
      }
    }
    REQUIRE(nw > 0);
    REQUIRE(nb > 0);
    CHECK(within / nw < between / nb);
    CHECK(within / nw == doctest::Approx(5.0).epsilon(0.15));
  }
  SUBCASE("argument checks") {
    CHECK_THROWS_AS(synth_pairs(1, 4, 1, PairStructure::kRandom), UsageError);
    CHECK_THROWS_AS(synth_pairs(4, 1, 1, PairStructure::kRandom), UsageError);
    CHECK(parse_pair_structure("random") == PairStructure::kRandom);
    CHECK_THROWS_AS(parse_pair_structure("semantic"), UsageError);
  }
}

TEST_CASE("nearest_neighbor") {
  const std::vector<Vector> cands{{1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}};
  CHECK(nearest_neighbor(cands, Vector{0.9, 0.1}) == 0);
  CHECK(nearest_neighbor(cands, Vector{0.1, 0.9}) == 1);
  CHECK(nearest_neighbor(cands, Vector{5.0, 0.1}, DistanceMetric::kCosine) == 0);
  CHECK(nearest_neighbor(std::vector<Vector>{{3.0, 3.0}}, Vector{-9.0, 1.0}) == 0);
  CHECK_THROWS_AS(nearest_neighbor(std::vector<Vector>{}, Vector{1.0}), UsageError);
}

TEST_CASE("recall") {
  RecallOptions options;
  SUBCASE("a single candidate is always retrieved") {
    TestRng rng(7);
    PairDataset ds = build_pair_dataset(synth_pairs(5, 3, 7, PairStructure::kRandom));
    ds.vocab.resize(1);
    const ModelParams p = random_model(rng, 6, 2, 3);
    RandomStream stream(7, 0);
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(recall_one(p, ds, i, options, stream) == 0);
  }
  SUBCASE("constructed two-pair memory") {
    const PairDataset ds = build_pair_dataset(synth_pairs(2, 4, 8, PairStructure::kRandom));
    const ModelParams p = constructed_memory(ds, 1.0);
    RandomStream stream(8, 0);
    for (std::size_t pair = 0; pair < 2; ++pair) {
      int correct = 0;
      for (int t = 0; t < 100; ++t) correct += recall_one(p, ds, pair, options, stream) == pair;
      CHECK(correct >= 95);
    }
  }
  SUBCASE("constructed memory over many pairs is perfect") {
    const PairDataset ds = build_pair_dataset(synth_pairs(10, 20, 9, PairStructure::kRandom));
    const ModelParams p = constructed_memory(ds, 1.0);
    const RecallResult r = evaluate_recall(p, ds, options, 9);
    CHECK(r.accuracy == 1.0);
    REQUIRE(r.per_pair.size() == 10);
    for (const RecallOutcome& o : r.per_pair) CHECK(o.retrieved == o.pair);
  }
  SUBCASE("sampled readout with cosine distance") {
    // Readout noise has norm ~ sqrt(d), pairs are ~ sqrt(2 d) apart.
    const PairDataset ds = build_pair_dataset(synth_pairs(6, 40, 10, PairStructure::kRandom));
    const ModelParams p = constructed_memory(ds, 1.0);
    options.readout = Readout::kSample;
    options.metric = DistanceMetric::kCosine;
    CHECK(evaluate_recall(p, ds, options, 10).accuracy == 1.0);
  }
  SUBCASE("untrained models score at chance") {
    const std::size_t n_pairs = 100;
    const int trials = 50;
    TestRng rng(11);
    double correct = 0.0;
    for (int t = 0; t < trials; ++t) {
      const PairDataset ds =
          build_pair_dataset(synth_pairs(n_pairs, 8, 100 + t, PairStructure::kRandom));
      const ModelParams p = random_model(rng, 16, 4, 4, 0.5);
      const RecallResult r = evaluate_recall(p, ds, options, t);
      const double sum = std::accumulate(
          r.per_pair.begin(), r.per_pair.end(), 0.0,
          [](double s, const RecallOutcome& o) { return s + (o.correct ? 1.0 : 0.0); });
      CHECK(r.accuracy == sum / n_pairs);
      correct += sum;
    }
    const double total = double(n_pairs) * trials;
    const double p0 = 1.0 / n_pairs;
    const double sigma = std::sqrt(total * p0 * (1.0 - p0));
    MESSAGE("correct " << correct << " expected " << total * p0 << " sigma " << sigma);
    CHECK(std::abs(correct - total * p0) < 3.0 * sigma);
  }
  SUBCASE("vocab order does not change accuracy") {
    TestRng rng(12);
    const PairDataset ds = build_pair_dataset(synth_pairs(30, 6, 12, PairStructure::kClustered));
    const ModelParams p = random_model(rng, 12, 3, 4, 0.5);
    PairDataset permuted = ds;
    std::vector<std::size_t> perm(ds.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    for (std::size_t i = 0; i < perm.size(); ++i) permuted.vocab[perm[i]] = ds.vocab[i];
    for (std::size_t i = 0; i < perm.size(); ++i) permuted.answer[i] = perm[ds.answer[i]];
    const RecallResult a = evaluate_recall(p, ds, options, 12);
    const RecallResult b = evaluate_recall(p, permuted, options, 12);
    CHECK(a.accuracy == b.accuracy);
    for (std::size_t i = 0; i < a.per_pair.size(); ++i) {
      CHECK(perm[a.per_pair[i].retrieved] == b.per_pair[i].retrieved);
    }
  }
  SUBCASE("subset evaluation and determinism") {
    TestRng rng(13);
    const PairDataset ds = build_pair_dataset(synth_pairs(12, 4, 13, PairStructure::kRandom));
    const ModelParams p = random_model(rng, 8, 3, 3, 0.8);
    const RecallResult all = evaluate_recall(p, ds, options, 5);
    const std::vector<std::size_t> subset{3, 7};
    const RecallResult some = evaluate_recall(p, ds, options, 5, subset);
    REQUIRE(some.per_pair.size() == 2);
    CHECK(some.per_pair[0].retrieved == all.per_pair[3].retrieved);
    CHECK(some.per_pair[1].retrieved == all.per_pair[7].retrieved);
  }
  SUBCASE("dimension mismatch") {
    const PairDataset ds = build_pair_dataset(synth_pairs(4, 3, 14, PairStructure::kRandom));
    RandomStream stream(14, 0);
    CHECK_THROWS_AS(recall_one(ModelParams(4, 1, 2), ds, 0, options, stream), UsageError);
  }
}

TEST_CASE("sweeps") {
  SweepSettings settings;
  settings.train.learning_rate = 0.01;
  settings.train.max_epochs = 20;
  settings.train.checkpoint_every = 5;
  settings.seeds = {1, 2};
  const std::vector<std::size_t> sizes{20};

  SUBCASE("q sweep smoke") {
    const std::vector<std::size_t> qs{2, 4};
    const auto rows = run_q_sweep(64, 8, qs, sizes, settings);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].m == 4);
    CHECK(rows[2].m == 2);
    for (const SweepRow& r : rows) {
      CHECK(r.accuracy >= 0.0);
      CHECK(r.accuracy <= 1.0);
      CHECK(r.epochs >= 5);
      CHECK(r.stop_reason.find("error") == std::string::npos);
    }
    const std::string table = format_sweep_table(rows);
    CHECK(table.rfind("q,m,N,seed,accuracy,stop_reason,epochs\n", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 5);
  }
  SUBCASE("hidden sweep smoke, threaded cells match serial") {
    const std::vector<std::size_t> hidden{8, 16};
    const auto serial = run_hidden_sweep(8, 4, hidden, sizes, settings);
    settings.threads = 3;
    const auto threaded = run_hidden_sweep(8, 4, hidden, sizes, settings);
    REQUIRE(serial.size() == 4);
    for (std::size_t i = 0; i < serial.size(); ++i) {
      CHECK(serial[i].m == threaded[i].m);
      CHECK(serial[i].accuracy == threaded[i].accuracy);
      CHECK(serial[i].epochs == threaded[i].epochs);
    }
  }
  SUBCASE("cell errors are recorded, not thrown") {
    const SweepRow r = run_recall_cell(7, 2, 2, 20, 1, settings);
    CHECK(std::isnan(r.accuracy));
    CHECK(r.stop_reason.rfind("error: ", 0) == 0);
  }
}

TEST_CASE("50 stored pairs reach the recall target") {
  SweepSettings settings;
  settings.train.learning_rate = 0.01;
  settings.train.max_epochs = 2000;
  settings.train.checkpoint_every = 25;
  const SweepRow r = run_recall_cell(100, 4, 32, 50, 1, settings);
  MESSAGE("stop " << r.stop_reason << " after " << r.epochs << " epochs, final accuracy "
                  << r.accuracy);
  CHECK(r.stop_reason == "target");
  CHECK(r.epochs < 2000);
}
