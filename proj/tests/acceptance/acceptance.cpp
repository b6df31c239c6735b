// Acceptance suite. One PASS/FAIL line per criterion; exit status 1 if any
// criterion fails. An optional argument list restricts the run, e.g.
// `gmrbm_acceptance 4 7`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gmrbm/adam.hpp"
#include "gmrbm/assoc_memory.hpp"
#include "gmrbm/exact.hpp"
#include "gmrbm/gb_model.hpp"
#include "gmrbm/io.hpp"
#include "gmrbm/matching.hpp"
#include "gmrbm/sampler.hpp"
#include "gmrbm/trainer.hpp"
#include "test_support.hpp"

namespace {

using namespace gmrbm;
using gmrbm::testing::max_abs_diff;
using gmrbm::testing::random_code;
using gmrbm::testing::random_model;
using gmrbm::testing::TestRng;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

template <typename... Args>
std::string fmt(const char* format, Args... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, static_cast<double>(args)...);
  return buf;
}

std::vector<double> flatten(const GradientRecord& g) {
  std::vector<double> out(g.db);
  out.insert(out.end(), g.dc.begin(), g.dc.end());
  out.insert(out.end(), g.dw.begin(), g.dw.end());
  return out;
}

// 1
Outcome conditional_correctness() {
  Stopwatch clock;
  TestRng rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const ModelParams p = random_model(rng, rng.integer(1, 3), rng.integer(1, 2),
                                       rng.integer(1, 3), 1.0, trial % 4 == 0);
    for (int r = 0; r < 5; ++r) {
      const Vector v = rng.vector(p.visible_count(), 2.0);
      const Vector fast = hidden_posterior(p, v);
      const Vector exact = slot_marginals(p, exact_posterior(p, v));
      worst = std::max(worst, max_abs_diff(fast, exact));
    }
  }
  const double t = clock.seconds();
  return {worst < 1e-10 && t < 10.0, fmt("max abs error %.2e, %.2f s", worst, t)};
}

// 2
Outcome completing_the_square() {
  TestRng rng(102);
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const ModelParams p = random_model(rng, rng.integer(1, 6), rng.integer(1, 4),
                                       rng.integer(1, 5), 1.0);
    const Vector v = rng.vector(p.visible_count(), 3.0);
    const HiddenCode h = random_code(rng, p);
    const Vector mu = conditional_mean(p, h);
    double sq = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) sq += (v[i] - mu[i]) * (v[i] - mu[i]);
    worst = std::max(worst, std::abs(energy(p, v, h) - 0.5 * sq - offset_constant(p, h)));
  }
  return {worst < 1e-10, fmt("max residual %.2e over 10000 triples", worst)};
}

// 3
Outcome gradient_correctness() {
  TestRng rng(103);
  const double step = 1e-5;
  double worst_fd = 0.0;
  double worst_pos = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    ModelParams p = random_model(rng, rng.integer(1, 3), rng.integer(1, 3),
                                 rng.integer(1, 3), 0.6, trial % 3 == 0);
    std::vector<Vector> data;
    for (int r = 0; r < 5; ++r) data.push_back(rng.vector(p.visible_count(), 1.5));

    const ExactGradient exact = exact_gradient(p, data);
    const std::vector<double> analytic = flatten(exact.total());
    std::vector<double> numeric;
    auto perturb = [&](std::span<double> block) {
      for (double& x : block) {
        const double saved = x;
        x = saved + step;
        const double up = exact_mean_log_likelihood(p, data);
        x = saved - step;
        const double down = exact_mean_log_likelihood(p, data);
        x = saved;
        numeric.push_back((up - down) / (2.0 * step));
      }
    };
    perturb(p.visible_bias());
    perturb(p.hidden_bias());
    perturb(p.weights());
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      // Components near zero are judged against a 1e-3 floor.
      const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-3});
      worst_fd = std::max(worst_fd, std::abs(analytic[i] - numeric[i]) / scale);
    }
    worst_pos = std::max(worst_pos, max_abs_diff(flatten(positive_statistics(p, data)),
                                                 flatten(exact.positive)));
  }
  return {worst_fd < 1e-6 && worst_pos < 1e-10,
          fmt("fd relative error %.2e, positive phase %.2e", worst_fd, worst_pos)};
}

ModelParams tiny_model() {
  ModelParams p(2, 1, 3);
  p.visible_bias()[0] = 0.2;
  p.visible_bias()[1] = -0.1;
  p.weight_template(0, 0)[0] = 1.0;
  p.weight_template(1, 0)[0] = -1.0;
  p.weight_template(1, 0)[1] = 0.5;
  p.weight_template(2, 0)[1] = -1.0;
  p.hidden_bias(0, 1) = 0.3;
  p.hidden_bias(0, 2) = -0.2;
  return p;
}

// 4
Outcome sampler_stationarity() {
  Stopwatch clock;
  const ModelParams p = tiny_model();
  const std::vector<double> exact = exact_summary(p).hidden_marginal;
  ChainState chain = start_chain(p, Vector{0.0, 0.0}, RandomStream(104, 0));
  const SamplerConfig config;
  std::vector<double> counts(3, 0.0);
  const int sweeps = 1000000;
  for (int t = 0; t < sweeps; ++t) {
    gibbs_sweep(p, chain, config);
    counts[chain.h.index(0)] += 1.0;
  }
  double tv = 0.0;
  for (std::size_t k = 0; k < 3; ++k) tv += 0.5 * std::abs(counts[k] / sweeps - exact[k]);
  const double t = clock.seconds();
  return {tv < 0.01 && t < 60.0, fmt("total variation %.2e, %.2f s", tv, t)};
}

// 5
Outcome langevin_consistency() {
  // n independent coordinates at fixed h, each with conditional mean 3.
  const std::size_t n = 1000;
  const double eps = 0.1;
  ModelParams p(n, 1, 2);
  for (double& b : p.visible_bias()) b = 2.0;
  for (double& w : p.weight_template(1, 0)) w = 1.0;
  HiddenCode h(1);
  h.set_state(0, 2);
  const Vector mu = conditional_mean(p, h);

  RandomStream rng(105, 0);
  Vector v = sample_visible(p, h, rng);
  for (int t = 0; t < 2000; ++t) v = langevin_visible_step(p, h, v, eps, rng);
  const int steps = 1500000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int t = 0; t < steps; ++t) {
    v = langevin_visible_step(p, h, v, eps, rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = v[i] - mu[i];
      sum += d;
      sum_sq += d * d;
    }
  }
  const double count = double(steps) * double(n);
  const double mean = 3.0 + sum / count;
  const double var = sum_sq / count - (sum / count) * (sum / count);
  const double predicted = 1.0 / (1.0 - eps * eps / 4.0);
  const bool mean_ok = std::abs(mean - 3.0) < 0.02 * 3.0;
  const bool bias_ok = var > 1.0;

  const Vector start{-4.0, 7.5};
  ModelParams small(2, 1, 2);
  small.visible_bias()[0] = 0.5;
  small.visible_bias()[1] = -1.25;
  small.weight_template(1, 0)[0] = 2.0;
  const Vector landed = langevin_visible_step(small, h, start, std::sqrt(2.0), rng,
                                              LangevinNoise::kSuppressed);
  const double land_err = max_abs_diff(landed, conditional_mean(small, h));
  return {mean_ok && bias_ok && land_err < 1e-12,
          fmt("mean %.5f, variance %.5f (predicted %.5f), sqrt2 step error %.1e", mean,
              var, predicted, land_err)};
}

// 6
Outcome q2_reduction() {
  TestRng rng(106);
  double worst_post = 0.0;
  double worst_spread = 0.0;
  for (int model = 0; model < 5; ++model) {
    ModelParams p = random_model(rng, rng.integer(1, 5), rng.integer(1, 4), 2, 1.0,
                                 model % 2 == 1);
    const GbParams gb = reduce_q2(p);
    double lo = INFINITY;
    double hi = -INFINITY;
    for (int r = 0; r < 100; ++r) {
      const Vector v = rng.vector(p.visible_count(), 2.0);
      const Vector post = hidden_posterior(p, v);
      const Vector on = gb_hidden_probabilities(gb, v);
      for (std::size_t j = 0; j < on.size(); ++j) {
        worst_post = std::max(worst_post, std::abs(post[j * 2] - on[j]));
        worst_post = std::max(worst_post, std::abs(post[j * 2 + 1] - (1.0 - on[j])));
      }
      const HiddenCode h = random_code(rng, p);
      const double diff = energy(p, v, h) - gb_energy(gb, v, code_to_bits(h));
      lo = std::min(lo, diff);
      hi = std::max(hi, diff);
    }
    worst_spread = std::max(worst_spread, hi - lo);
  }
  return {worst_post < 1e-12 && worst_spread < 1e-10,
          fmt("posterior error %.2e, energy offset spread %.2e", worst_post, worst_spread)};
}

// 7
Outcome matching_tables() {
  const std::vector<std::uint64_t> qs{2, 4, 6, 8, 10};
  const std::vector<std::uint64_t> table{1000, 500, 333, 250, 200};
  std::string got;
  bool ok = true;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const std::uint64_t m = budget_hidden_units(800000, 400, qs[i], BudgetRounding::kTable);
    ok = ok && m == table[i];
    got += (i ? "," : "") + std::to_string(m);
  }
  const std::uint64_t mp = capacity_matched_mprime(500, 4);
  ok = ok && mp == 1000;
  return {ok, "budget m = " + got + ", m' = " + std::to_string(mp)};
}

std::vector<Vector> two_cluster_data(std::size_t rows, std::uint64_t seed) {
  TestRng rng(seed);
  std::vector<Vector> data;
  for (std::size_t r = 0; r < rows; ++r) {
    const double sign = r % 2 == 0 ? 1.0 : -1.0;
    data.push_back({sign * 2.0 + rng.normal(0.5), -sign * 1.0 + rng.normal(0.5)});
  }
  return data;
}

// 8
Outcome likelihood_ascent() {
  const std::vector<Vector> data = two_cluster_data(10, 108);

  ModelParams p = init_params(2, 2, 3, data, 108);
  const double start = exact_mean_log_likelihood(p, data);
  AdamState adam(p);
  const AdamConfig config{5e-3, 0.9, 0.999, 1e-8};
  double prev = start;
  int drops = 0;
  for (int t = 0; t < 500; ++t) {
    adam.ascend(p, exact_gradient(p, data).total(), config);
    const double now = exact_mean_log_likelihood(p, data);
    if (now < prev) ++drops;
    prev = now;
  }
  const bool exact_ok = prev > start && drops <= 25;

  ModelParams cd = init_params(2, 2, 3, data, 108);
  TrainConfig train;
  train.learning_rate = 1e-2;
  train.cd_k = 1;
  train.seed = 108;
  CdTrainer trainer(cd, train);
  for (int t = 0; t < 100; ++t) trainer.cd_update(cd, data);
  const double cd_end = exact_mean_log_likelihood(cd, data);
  return {exact_ok && cd_end > start,
          fmt("exact %.4f -> %.4f with %.0f drops; cd-1 %.4f -> %.4f", start, prev, drops,
              start, cd_end)};
}

// 9
Outcome desk_recall() {
  Stopwatch clock;
  const std::size_t n_v = 100;
  const std::uint64_t budget = 50000;
  const std::vector<std::size_t> qs{2, 4};
  const std::vector<std::size_t> sizes{50, 100, 200};
  SweepSettings s;
  s.train.learning_rate = 1e-2;
  s.train.max_epochs = 1000;
  s.train.checkpoint_every = 25;
  // Train to the target or the epoch cap.
  s.early_stop.std_threshold = 0.0;
  s.early_stop.patience = 1000000;
  s.seeds = {1, 2, 3};
  const std::vector<SweepRow> rows = run_q_sweep(budget, n_v, qs, sizes, s);

  auto mean_acc = [&](std::size_t q, std::size_t pairs) {
    double sum = 0.0;
    int count = 0;
    for (const SweepRow& r : rows) {
      if (r.q == q && r.pairs == pairs) {
        sum += r.accuracy;
        ++count;
      }
    }
    return sum / count;
  };
  std::string table;
  for (std::size_t pairs : sizes) {
    table += fmt(" N=%.0f q2=%.3f q4=%.3f;", double(pairs), mean_acc(2, pairs),
                 mean_acc(4, pairs));
  }

  const bool a = mean_acc(4, 50) >= 0.90;
  std::size_t largest = 0;
  for (std::size_t pairs : sizes) {
    if (mean_acc(2, pairs) < 0.5) largest = pairs;
  }
  const bool b = largest > 0 && mean_acc(4, largest) > mean_acc(2, largest);

  // Untrained models, pooled over seeds.
  bool c = true;
  std::string chance;
  for (std::size_t pairs : sizes) {
    for (std::size_t q : qs) {
      const std::size_t m = budget_hidden_units(budget, n_v, q);
      double correct = 0.0;
      for (std::uint64_t seed : s.seeds) {
        const PairDataset ds =
            build_pair_dataset(synth_pairs(pairs, n_v / 2, seed, PairStructure::kClustered));
        const ModelParams p = init_params(n_v, m, q, ds.training, seed);
        correct += evaluate_recall(p, ds, s.recall, seed).accuracy * double(pairs);
      }
      const double trials = double(pairs) * double(s.seeds.size());
      const double chance_p = 1.0 / double(pairs);
      const double sigma = std::sqrt(chance_p * (1.0 - chance_p) / trials);
      const double acc = correct / trials;
      c = c && std::abs(acc - chance_p) <= 3.0 * sigma;
      chance += fmt(" %.3f", acc);
    }
  }
  const double t = clock.seconds();
  return {a && b && c && t < 1800.0,
          "mean recall" + table + " (a)" + (a ? "ok" : "no") + " (b) at N=" +
              std::to_string(largest) + (b ? " ok" : " no") + " (c) untrained" + chance +
              (c ? " ok" : " no") + fmt(", %.0f s", t)};
}

// 10
Outcome persistence() {
  TestRng rng(110);
  bool ok = true;
  for (int trial = 0; trial < 10; ++trial) {
    ModelParams p = random_model(rng, rng.integer(1, 6), rng.integer(1, 4),
                                 rng.integer(1, 5), 3.0, trial % 2 == 0);
    p.visible_bias()[0] = trial % 3 == 0 ? 1e-310 : -1.0 / 3.0;
    std::stringstream buf;
    write_checkpoint(buf, p);
    ok = ok && parse_checkpoint(buf) == p;
  }
  std::vector<Vector> rows;
  for (int r = 0; r < 20; ++r) rows.push_back(rng.vector(7, 1e3));
  rows[0][0] = 1e308;
  rows[1][1] = -4.9e-324;
  rows[2][2] = 0.1;
  std::stringstream vbuf;
  write_vectors(vbuf, rows);
  ok = ok && parse_vectors(vbuf).rows == rows;

  const std::vector<Vector> data = two_cluster_data(40, 111);
  TrainConfig train;
  train.learning_rate = 1e-2;
  train.batch_size = 8;
  train.max_epochs = 15;
  train.seed = 111;
  EarlyStopRule stop;
  stop.patience = 1000;
  ModelParams first = init_params(2, 3, 4, data, 111);
  ModelParams second = first;
  fit(first, data, train, stop);
  fit(second, data, train, stop);
  const bool same = first == second;
  return {ok && same, std::string("round-trips ") + (ok ? "exact" : "differ") +
                          ", repeated training " + (same ? "bitwise identical" : "differs")};
}

// 11
Outcome mode_coverage() {
  GmmSpec spec{{{0.5, {3.0, 3.0}, {1.0, 1.0}}, {0.5, {-3.0, -3.0}, {1.0, 1.0}}}};
  const std::vector<Vector> data = sample_gmm(spec, 1000, 11);
  ModelParams p = init_params(2, 2, 4, data, 11);
  TrainConfig train;
  train.learning_rate = 1e-2;
  train.batch_size = 50;
  train.max_epochs = 100;
  train.seed = 11;
  EarlyStopRule stop;
  stop.patience = 1000;
  stop.std_threshold = 0.0;
  fit(p, data, train, stop);

  RandomStream root(12, 0);
  const SamplerConfig config;
  const int samples = 500;
  int upper = 0;
  int lower = 0;
  for (int i = 0; i < samples; ++i) {
    Vector noise{root.normal(), root.normal()};
    ChainState chain = start_chain(p, noise, root.child(i));
    for (int t = 0; t < 1000; ++t) gibbs_sweep(p, chain, config);
    const double d_up = std::hypot(chain.v[0] - 3.0, chain.v[1] - 3.0);
    const double d_down = std::hypot(chain.v[0] + 3.0, chain.v[1] + 3.0);
    (d_up < d_down ? upper : lower) += 1;
  }
  const double fu = double(upper) / samples;
  const double fl = double(lower) / samples;
  return {fu >= 0.2 && fl >= 0.2, fmt("mode shares %.3f / %.3f", fu, fl)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "conditional correctness", conditional_correctness},
      {2, "completing-the-square identity", completing_the_square},
      {3, "gradient correctness", gradient_correctness},
      {4, "sampler stationarity", sampler_stationarity},
      {5, "langevin consistency", langevin_consistency},
      {6, "q=2 reduction", q2_reduction},
      {7, "matching tables", matching_tables},
      {8, "likelihood ascent", likelihood_ascent},
      {9, "desk-scale recall", desk_recall},
      {10, "persistence", persistence},
      {11, "mode coverage", mode_coverage},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
