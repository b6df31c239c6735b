#include "gmrbm/assoc_memory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <thread>

#include "gmrbm/errors.hpp"
#include "gmrbm/matching.hpp"

namespace gmrbm {

Vector Normalization::apply(std::span<const double> x) const {
  if (x.size() != mean.size()) throw UsageError("normalization width mismatch");
  Vector z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - mean[i]) / stddev[i];
  return z;
}

Vector Normalization::invert(std::span<const double> z) const {
  if (z.size() != mean.size()) throw UsageError("normalization width mismatch");
  Vector x(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) x[i] = z[i] * stddev[i] + mean[i];
  return x;
}

Normalization fit_normalization(std::span<const Vector> rows) {
  if (rows.empty()) throw DataError("cannot normalize an empty set of rows");
  const std::size_t width = rows.front().size();
  Normalization norm{Vector(width, 0.0), Vector(width, 0.0)};
  for (const Vector& r : rows) {
    if (r.size() != width) throw DataError("rows have inconsistent widths");
    for (std::size_t i = 0; i < width; ++i) norm.mean[i] += r[i];
  }
  const double count = static_cast<double>(rows.size());
  for (double& m : norm.mean) m /= count;
  for (const Vector& r : rows) {
    for (std::size_t i = 0; i < width; ++i) {
      const double d = r[i] - norm.mean[i];
      norm.stddev[i] += d * d;
    }
  }
  for (std::size_t i = 0; i < width; ++i) {
    norm.stddev[i] = std::sqrt(norm.stddev[i] / count);
    if (!(norm.stddev[i] > 0.0)) {
      throw DataError("dimension " + std::to_string(i) +
                      " has zero variance and cannot be normalized");
    }
  }
  return norm;
}

PairDataset build_pair_dataset(std::span<const RawPair> pairs) {
  if (pairs.size() < 2) throw DataError("a pair dataset needs at least 2 pairs");
  PairDataset ds;
  ds.dim = pairs.front().first.size();
  if (ds.dim == 0) throw DataError("pair vectors must be non-empty");
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (pairs[p].first.size() != ds.dim || pairs[p].second.size() != ds.dim) {
      throw DataError("pair " + std::to_string(p) +
                      " does not match the stimulus dimension " +
                      std::to_string(ds.dim));
    }
    ds.stimuli.push_back(pairs[p].first);
    ds.responses.push_back(pairs[p].second);
  }
  const std::vector<Vector> joined = join_pairs(pairs);
  ds.normalization = fit_normalization(joined);
  ds.training.reserve(joined.size());
  for (const Vector& row : joined) ds.training.push_back(ds.normalization.apply(row));
  ds.vocab = ds.responses;
  ds.answer.resize(ds.size());
  for (std::size_t i = 0; i < ds.answer.size(); ++i) ds.answer[i] = i;
  return ds;
}

std::vector<RawPair> split_pairs(std::span<const Vector> rows) {
  std::vector<RawPair> pairs;
  for (const Vector& row : rows) {
    if (row.size() % 2 != 0 || row.empty()) {
      throw DataError("pair rows must have an even, nonzero width");
    }
    const auto half = static_cast<std::ptrdiff_t>(row.size() / 2);
    pairs.emplace_back(Vector(row.begin(), row.begin() + half),
                       Vector(row.begin() + half, row.end()));
  }
  return pairs;
}

std::vector<Vector> join_pairs(std::span<const RawPair> pairs) {
  std::vector<Vector> rows;
  rows.reserve(pairs.size());
  for (const auto& [s, r] : pairs) {
    Vector row(s);
    row.insert(row.end(), r.begin(), r.end());
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string_view to_string(PairStructure structure) {
  return structure == PairStructure::kRandom ? "random" : "clustered";
}

PairStructure parse_pair_structure(std::string_view text) {
  if (text == "random") return PairStructure::kRandom;
  if (text == "clustered") return PairStructure::kClustered;
  throw UsageError("unknown pair structure '" + std::string(text) +
                   "' (expected random or clustered)");
}

std::vector<RawPair> synth_pairs(std::size_t count, std::size_t dim,
                                 std::uint64_t seed, PairStructure structure) {
  if (count < 2 || dim < 2) throw UsageError("synth_pairs needs N >= 2, d >= 2");
  RandomStream rng(derive_seed(seed, "synth"), 0);
  auto gaussian = [&](double scale) {
    Vector x(dim);
    for (double& v : x) v = scale * rng.normal();
    return x;
  };

  std::vector<Vector> centroids;
  if (structure == PairStructure::kClustered) {
    const auto k = static_cast<std::size_t>(
        std::ceil(std::sqrt(static_cast<double>(count))));
    for (std::size_t c = 0; c < k; ++c) centroids.push_back(gaussian(1.0));
  }
  std::vector<RawPair> pairs;
  pairs.reserve(count);
  for (std::size_t p = 0; p < count; ++p) {
    Vector stimulus = gaussian(1.0);
    Vector response;
    if (structure == PairStructure::kRandom) {
      response = gaussian(1.0);
    } else {
      const std::size_t c = rng.next_u64() % centroids.size();
      response = gaussian(0.5);
      for (std::size_t i = 0; i < dim; ++i) response[i] += centroids[c][i];
    }
    pairs.emplace_back(std::move(stimulus), std::move(response));
  }
  return pairs;
}

std::string_view to_string(DistanceMetric metric) {
  return metric == DistanceMetric::kEuclidean ? "euclidean" : "cosine";
}

DistanceMetric parse_distance_metric(std::string_view text) {
  if (text == "euclidean") return DistanceMetric::kEuclidean;
  if (text == "cosine") return DistanceMetric::kCosine;
  throw UsageError("unknown distance metric '" + std::string(text) +
                   "' (expected euclidean or cosine)");
}

std::size_t nearest_neighbor(std::span<const Vector> candidates,
                             std::span<const double> query,
                             DistanceMetric metric) {
  if (candidates.empty()) throw UsageError("no retrieval candidates");
  double query_norm = 0.0;
  for (double x : query) query_norm += x * x;
  query_norm = std::sqrt(query_norm);

  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const Vector& cand = candidates[c];
    if (cand.size() != query.size()) {
      throw UsageError("candidate width does not match the query");
    }
    double score = 0.0;
    if (metric == DistanceMetric::kEuclidean) {
      for (std::size_t i = 0; i < query.size(); ++i) {
        const double d = cand[i] - query[i];
        score += d * d;
      }
    } else {
      double dot = 0.0;
      double norm = 0.0;
      for (std::size_t i = 0; i < query.size(); ++i) {
        dot += cand[i] * query[i];
        norm += cand[i] * cand[i];
      }
      const double denom = std::sqrt(norm) * query_norm;
      score = denom > 0.0 ? 1.0 - dot / denom : 1.0;
    }
    if (score < best_score) {
      best_score = score;
      best = c;
    }
  }
  return best;
}

std::size_t recall_one(const ModelParams& params, const PairDataset& dataset,
                       std::size_t pair_index, const RecallOptions& options,
                       RandomStream& rng) {
  if (params.visible_count() != dataset.visible_count()) {
    throw UsageError("model has " + std::to_string(params.visible_count()) +
                     " visibles but the pairs need " +
                     std::to_string(dataset.visible_count()));
  }
  if (pair_index >= dataset.size()) throw UsageError("pair index out of range");
  const std::size_t d = dataset.dim;
  const Vector& z = dataset.training[pair_index];
  std::vector<bool> clamp(2 * d, false);
  for (std::size_t i = 0; i < d; ++i) clamp[i] = true;

  const Vector completed = clamped_completion(params, z, clamp, options.steps,
                                              options.sampler, options.readout, rng);
  const Vector raw = dataset.normalization.invert(completed);
  const std::span<const double> response(raw.data() + d, d);
  return nearest_neighbor(dataset.vocab, response, options.metric);
}

RecallResult evaluate_recall(const ModelParams& params,
                             const PairDataset& dataset,
                             const RecallOptions& options, std::uint64_t seed,
                             std::span<const std::size_t> pairs) {
  std::vector<std::size_t> all;
  if (pairs.empty()) {
    all.resize(dataset.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    pairs = all;
  }
  const std::uint64_t root = derive_seed(seed, "recall");
  RecallResult result;
  std::size_t correct = 0;
  for (std::size_t p : pairs) {
    RandomStream rng(root, p);
    RecallOutcome o;
    o.pair = p;
    o.retrieved = recall_one(params, dataset, p, options, rng);
    o.correct = o.retrieved == dataset.answer[p];
    correct += o.correct ? 1 : 0;
    result.per_pair.push_back(o);
  }
  result.accuracy =
      static_cast<double>(correct) / static_cast<double>(result.per_pair.size());
  return result;
}

SweepRow run_recall_cell(std::size_t n_v, std::size_t q, std::size_t m,
                         std::size_t pairs, std::uint64_t seed,
                         const SweepSettings& settings) {
  SweepRow row;
  row.q = q;
  row.m = m;
  row.pairs = pairs;
  row.seed = seed;
  try {
    if (n_v % 2 != 0) throw UsageError("n_v must be even (stimulus + response)");
    const auto raw = synth_pairs(pairs, n_v / 2,
                                 mix64(seed ^ mix64(pairs)), settings.structure);
    const PairDataset ds = build_pair_dataset(raw);

    const std::uint64_t cell_seed =
        mix64(seed ^ mix64(q ^ mix64(m ^ mix64(pairs))));
    TrainConfig train = settings.train;
    train.seed = cell_seed;
    ModelParams params = init_params(n_v, m, q, ds.training, cell_seed);

    std::vector<std::size_t> subset;
    if (settings.validation_pairs > 0 && settings.validation_pairs < ds.size()) {
      RandomStream pick(derive_seed(cell_seed, "validation"), 0);
      std::vector<std::size_t> order(ds.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::shuffle(order.begin(), order.end(), pick.engine());
      subset.assign(order.begin(),
                    order.begin() + static_cast<std::ptrdiff_t>(settings.validation_pairs));
      std::sort(subset.begin(), subset.end());
    }
    const std::uint64_t recall_seed = derive_seed(cell_seed, "recall");
    auto hook = [&](const ModelParams& p, std::size_t) {
      return evaluate_recall(p, ds, settings.recall, recall_seed, subset).accuracy;
    };
    const FitResult fitted = fit(params, ds.training, train, settings.early_stop, hook);
    row.epochs = fitted.epochs;
    row.stop_reason = std::string(to_string(fitted.reason));
    row.accuracy = evaluate_recall(params, ds, settings.recall,
                                   derive_seed(cell_seed, "final"))
                       .accuracy;
  } catch (const std::exception& e) {
    row.accuracy = std::numeric_limits<double>::quiet_NaN();
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    row.stop_reason = "error: " + msg;
  }
  return row;
}

namespace {

struct CellSpec {
  std::size_t q;
  std::size_t m;
  std::size_t pairs;
  std::uint64_t seed;
};

std::vector<SweepRow> run_cells(std::size_t n_v, const std::vector<CellSpec>& cells,
                                const SweepSettings& settings) {
  std::vector<SweepRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const CellSpec& c = cells[i];
      rows[i] = run_recall_cell(n_v, c.q, c.m, c.pairs, c.seed, settings);
    }
  };
  const std::size_t threads =
      std::max<std::size_t>(1, std::min(settings.threads, cells.size()));
  if (threads == 1) {
    worker();
    return rows;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return rows;
}

}  // namespace

std::vector<SweepRow> run_q_sweep(std::uint64_t n_w, std::size_t n_v,
                                  std::span<const std::size_t> q_list,
                                  std::span<const std::size_t> dataset_sizes,
                                  const SweepSettings& settings) {
  std::vector<CellSpec> cells;
  for (std::size_t q : q_list) {
    const auto m = static_cast<std::size_t>(budget_hidden_units(n_w, n_v, q));
    for (std::size_t pairs : dataset_sizes) {
      for (std::uint64_t seed : settings.seeds) cells.push_back({q, m, pairs, seed});
    }
  }
  return run_cells(n_v, cells, settings);
}

std::vector<SweepRow> run_hidden_sweep(std::size_t n_v, std::size_t q,
                                       std::span<const std::size_t> hidden_list,
                                       std::span<const std::size_t> dataset_sizes,
                                       const SweepSettings& settings) {
  std::vector<CellSpec> cells;
  for (std::size_t m : hidden_list) {
    for (std::size_t pairs : dataset_sizes) {
      for (std::uint64_t seed : settings.seeds) cells.push_back({q, m, pairs, seed});
    }
  }
  return run_cells(n_v, cells, settings);
}

std::string format_sweep_table(std::span<const SweepRow> rows) {
  std::string out = "q,m,N,seed,accuracy,stop_reason,epochs\n";
  char buf[96];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%llu,%.6f,", r.q, r.m, r.pairs,
                  static_cast<unsigned long long>(r.seed), r.accuracy);
    out += buf;
    out += r.stop_reason;
    out += ',' + std::to_string(r.epochs) + '\n';
  }
  return out;
}

}  // namespace gmrbm
