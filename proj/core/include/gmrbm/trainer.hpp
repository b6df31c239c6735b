#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gmrbm/adam.hpp"
#include "gmrbm/model.hpp"
#include "gmrbm/random.hpp"
#include "gmrbm/sampler.hpp"

namespace gmrbm {

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 64;
  std::size_t cd_k = 1;
  SamplerConfig sampler;
  // Sweeps run on freshly started chains before the cd_k counted sweeps.
  std::size_t burn_in = 2;
  std::size_t max_epochs = 1000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 1;
  // Persistent chain pool size; 0 means batch_size.
  std::size_t chain_pool = 0;
  // Worker threads for the negative phase. Results do not depend on it.
  std::size_t threads = 1;

  AdamConfig adam() const {
    return {learning_rate, adam_beta1, adam_beta2, adam_epsilon};
  }
  void validate() const;
};

enum class StopReason { kNone, kTarget, kPlateau, kNoImprovement, kMaxEpochs };

std::string_view to_string(StopReason reason);

struct EarlyStopRule {
  double target_accuracy = 0.98;
  std::size_t window = 20;
  double std_threshold = 0.01;
  std::size_t patience = 10;
  // Minimum gain over the best-so-far metric that counts as improvement.
  double improvement_tolerance = 1e-6;

  void validate() const;
};

// Applies the three stopping rules to a stream of checkpoint metrics:
// target reached, population std over the last `window` checkpoints below
// the threshold, or `patience` checkpoints without improvement.
class EarlyStopper {
 public:
  explicit EarlyStopper(EarlyStopRule rule);

  StopReason observe(double metric);
  double best() const { return best_; }
  const std::vector<double>& history() const { return history_; }

 private:
  EarlyStopRule rule_;
  std::vector<double> history_;
  double best_ = 0.0;
  std::size_t since_best_ = 0;
};

// b = column means of `data_sample` (zeros when empty), c = 0,
// W ~ N(0, 0.01^2) i.i.d.; deterministic under `seed`.
ModelParams init_params(std::size_t n, std::size_t m, std::size_t q,
                        std::span<const Vector> data_sample,
                        std::uint64_t seed);

// Batch mean of E_{p(h|v)}[-dE/dtheta] with the closed-form posterior:
//   db += (v - b) / sigma2,  dc_{j,k} += p(h_j=k|v),
//   dW^{(k)}_{:,j} += p(h_j=k|v) v / sigma2.
GradientRecord positive_statistics(const ModelParams& params,
                                   std::span<const Vector> batch);

// The same statistics evaluated at the chains' current visible states.
GradientRecord chain_statistics(const ModelParams& params,
                                std::span<const ChainState> chains);

enum class ChainStart { kFresh, kCarried };

// Advances every chain (burn_in + cd_k sweeps when kFresh, cd_k when
// kCarried), then returns chain_statistics at the final states.
GradientRecord negative_statistics(const ModelParams& params,
                                   std::span<ChainState> chains,
                                   const TrainConfig& config, ChainStart start);

// Throws NumericalError naming the first block with a non-finite entry.
void check_finite(const GradientRecord& grad, std::string_view what);

// Contrastive-divergence trainer: owns the Adam state, the chain streams and
// (for persistent CD) the chain pool.
class CdTrainer {
 public:
  CdTrainer(const ModelParams& params, TrainConfig config);

  // positive - negative, then one Adam ascent step. Returns the gradient.
  GradientRecord cd_update(ModelParams& params, std::span<const Vector> batch);

  // Adam ascent with an externally computed gradient.
  void apply_gradient(ModelParams& params, const GradientRecord& grad);

  const TrainConfig& config() const { return config_; }
  const std::vector<ChainState>& chains() const { return pool_; }
  std::size_t update_count() const { return updates_; }

 private:
  TrainConfig config_;
  AdamState adam_;
  RandomStream chain_root_;
  std::vector<ChainState> pool_;
  std::size_t updates_ = 0;
};

// Mean squared per-coordinate error between each row and its posterior-mean
// reconstruction.
double reconstruction_error(const ModelParams& params,
                            std::span<const Vector> data);

struct TrainLogEntry {
  std::size_t epoch = 0;
  double recon = 0.0;
  double val = 0.0;
  StopReason stop = StopReason::kNone;
};

// `epoch <int> recon <float> val <float> stop <reason|->`
std::string format_log_entry(const TrainLogEntry& entry);

struct FitResult {
  std::vector<TrainLogEntry> log;
  StopReason reason = StopReason::kNone;
  std::size_t epochs = 0;
  double final_metric = 0.0;
};

// Validation metric (higher is better) for a checkpoint after `epoch`.
using ValidationHook =
    std::function<double(const ModelParams& params, std::size_t epoch)>;

// Epochs of shuffled mini-batches. Every checkpoint_every epochs (and at
// max_epochs) the hook is evaluated, a log entry recorded and the stop rules
// consulted. Without a hook the metric is minus the reconstruction error.
FitResult fit(ModelParams& params, std::span<const Vector> dataset,
              const TrainConfig& config, const EarlyStopRule& early_stop,
              const ValidationHook& validation_hook = {});

}  // namespace gmrbm
