#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gmrbm/model.hpp"
#include "gmrbm/random.hpp"
#include "gmrbm/sampler.hpp"
#include "gmrbm/trainer.hpp"

namespace gmrbm {

// Per-dimension z-scoring.
struct Normalization {
  Vector mean;
  Vector stddev;

  Vector apply(std::span<const double> x) const;
  Vector invert(std::span<const double> z) const;
};

// Population mean/std per column. Throws DataError naming the first
// zero-variance dimension.
Normalization fit_normalization(std::span<const Vector> rows);

using RawPair = std::pair<Vector, Vector>;

// Hetero-associative pairs. The visible layer sees [stimulus ; response]
// (n = 2d), z-scored per dimension over the N concatenated vectors.
struct PairDataset {
  std::size_t dim = 0;
  std::vector<Vector> stimuli;
  std::vector<Vector> responses;
  // Closed-set retrieval candidates in raw space; answer[i] is the vocab
  // index of pair i's response.
  std::vector<Vector> vocab;
  std::vector<std::size_t> answer;
  Normalization normalization;
  // Normalized concatenated training vectors, N x 2d.
  std::vector<Vector> training;

  std::size_t size() const { return stimuli.size(); }
  std::size_t visible_count() const { return 2 * dim; }
};

// Requires N >= 2 pairs of equal dimension.
PairDataset build_pair_dataset(std::span<const RawPair> pairs);

// Splits rows of width 2d into (first half, second half) pairs.
std::vector<RawPair> split_pairs(std::span<const Vector> rows);
std::vector<Vector> join_pairs(std::span<const RawPair> pairs);

enum class PairStructure { kRandom, kClustered };

std::string_view to_string(PairStructure structure);
PairStructure parse_pair_structure(std::string_view text);

// Synthetic embedding pairs. random: i.i.d. N(0, I) stimuli and responses.
// clustered: i.i.d. stimuli; responses = one of ceil(sqrt(N)) N(0, I)
// centroids plus N(0, 0.5^2 I) noise. Deterministic in seed.
std::vector<RawPair> synth_pairs(std::size_t count, std::size_t dim,
                                 std::uint64_t seed, PairStructure structure);

enum class DistanceMetric { kEuclidean, kCosine };

std::string_view to_string(DistanceMetric metric);
DistanceMetric parse_distance_metric(std::string_view text);

// Index of the candidate nearest to `query`; ties go to the lowest index.
std::size_t nearest_neighbor(std::span<const Vector> candidates,
                             std::span<const double> query,
                             DistanceMetric metric = DistanceMetric::kEuclidean);

struct RecallOptions {
  std::size_t steps = 10;
  SamplerConfig sampler;
  Readout readout = Readout::kMean;
  DistanceMetric metric = DistanceMetric::kEuclidean;
};

// Clamps the normalized stimulus half, completes the response half, maps it
// back to raw space and returns the nearest vocab index.
std::size_t recall_one(const ModelParams& params, const PairDataset& dataset,
                       std::size_t pair_index, const RecallOptions& options,
                       RandomStream& rng);

struct RecallOutcome {
  std::size_t pair = 0;
  std::size_t retrieved = 0;
  bool correct = false;
};

struct RecallResult {
  double accuracy = 0.0;
  std::vector<RecallOutcome> per_pair;
};

// recall_one over `pairs` (all pairs when empty). Pair i always uses stream
// i under the seed, so results do not depend on evaluation order.
RecallResult evaluate_recall(const ModelParams& params,
                             const PairDataset& dataset,
                             const RecallOptions& options, std::uint64_t seed,
                             std::span<const std::size_t> pairs = {});

// Shared settings for every cell of a recall sweep.
struct SweepSettings {
  TrainConfig train;
  EarlyStopRule early_stop;
  RecallOptions recall;
  PairStructure structure = PairStructure::kClustered;
  std::vector<std::uint64_t> seeds = {1};
  // Pairs used for checkpoint validation; 0 means every training pair.
  std::size_t validation_pairs = 0;
  // Independent cells trained concurrently.
  std::size_t threads = 1;
};

struct SweepRow {
  std::size_t q = 0;
  std::size_t m = 0;
  std::size_t pairs = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  std::string stop_reason;
  std::size_t epochs = 0;
};

// Trains one model on synthetic pairs and reports its final recall. The
// dataset depends only on (seed, pairs), so cells that differ in q or m see
// identical data. Errors are caught and reported in stop_reason.
SweepRow run_recall_cell(std::size_t n_v, std::size_t q, std::size_t m,
                         std::size_t pairs, std::uint64_t seed,
                         const SweepSettings& settings);

// Parameter-matched sweep: m = budget_hidden_units(n_w, n_v, q) per q.
std::vector<SweepRow> run_q_sweep(std::uint64_t n_w, std::size_t n_v,
                                  std::span<const std::size_t> q_list,
                                  std::span<const std::size_t> dataset_sizes,
                                  const SweepSettings& settings);

// Fixed q, varying slot count.
std::vector<SweepRow> run_hidden_sweep(std::size_t n_v, std::size_t q,
                                       std::span<const std::size_t> hidden_list,
                                       std::span<const std::size_t> dataset_sizes,
                                       const SweepSettings& settings);

// `q,m,N,seed,accuracy,stop_reason,epochs` header plus one row per cell.
std::string format_sweep_table(std::span<const SweepRow> rows);

}  // namespace gmrbm
