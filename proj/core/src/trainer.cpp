#include "gmrbm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>

#include "gmrbm/errors.hpp"

namespace gmrbm {

namespace {

// Adds weight * (statistics of one visible vector) into `acc`.
void accumulate_statistics(const ModelParams& params, std::span<const double> v,
                           double weight, GradientRecord& acc) {
  const std::size_t n = params.visible_count();
  const std::size_t m = params.slot_count();
  const std::size_t q = params.state_count();
  const auto b = params.visible_bias();
  const auto sigma2 = params.variance();

  Vector scaled(v.begin(), v.end());
  if (!sigma2.empty()) {
    for (std::size_t i = 0; i < n; ++i) scaled[i] /= sigma2[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    acc.db[i] += weight * (scaled[i] - (sigma2.empty() ? b[i] : b[i] / sigma2[i]));
  }
  const Vector post = hidden_posterior(params, v);
  for (std::size_t k = 0; k < q; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      const double p = post[j * q + k];
      acc.dc[j * q + k] += weight * p;
      const double wp = weight * p;
      if (wp == 0.0) continue;
      double* row = acc.dw.data() + (k * m + j) * n;
      for (std::size_t i = 0; i < n; ++i) row[i] += wp * scaled[i];
    }
  }
}

bool all_finite(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(),
                     [](double x) { return std::isfinite(x); });
}

void advance_chains(const ModelParams& params, std::span<ChainState> chains,
                    const SamplerConfig& sampler, std::size_t sweeps,
                    std::size_t threads) {
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      for (std::size_t s = 0; s < sweeps; ++s) {
        gibbs_sweep(params, chains[c], sampler);
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, chains.size()));
  if (threads == 1) {
    run(0, chains.size());
    return;
  }
  std::vector<std::thread> workers;
  const std::size_t chunk = (chains.size() + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(chains.size(), begin + chunk);
    if (begin >= end) break;
    workers.emplace_back(run, begin, end);
  }
  for (auto& w : workers) w.join();
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw UsageError("learning_rate must be > 0");
  if (batch_size == 0) throw UsageError("batch_size must be >= 1");
  if (max_epochs == 0) throw UsageError("max_epochs must be >= 1");
  if (checkpoint_every == 0) throw UsageError("checkpoint_every must be >= 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) || !(adam_epsilon > 0.0)) {
    throw UsageError("Adam constants must satisfy 0 <= beta < 1, epsilon > 0");
  }
  sampler.validate();
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kNone:
      return "-";
    case StopReason::kTarget:
      return "target";
    case StopReason::kPlateau:
      return "plateau";
    case StopReason::kNoImprovement:
      return "no-improvement";
    case StopReason::kMaxEpochs:
      return "max-epochs";
  }
  return "-";
}

void EarlyStopRule::validate() const {
  // 0 is accepted and means "stop at the first checkpoint".
  if (!(target_accuracy >= 0.0 && target_accuracy <= 1.0)) {
    throw UsageError("target_accuracy must lie in [0, 1]");
  }
  if (window < 2) throw UsageError("early-stop window must be >= 2");
  if (patience == 0) throw UsageError("early-stop patience must be >= 1");
}

EarlyStopper::EarlyStopper(EarlyStopRule rule) : rule_(rule) {}

StopReason EarlyStopper::observe(double metric) {
  if (history_.empty() || metric > best_ + rule_.improvement_tolerance) {
    best_ = history_.empty() ? metric : std::max(best_, metric);
    since_best_ = 0;
  } else {
    ++since_best_;
  }
  history_.push_back(metric);

  if (metric >= rule_.target_accuracy) return StopReason::kTarget;
  if (history_.size() >= rule_.window) {
    const auto tail = std::span(history_).last(rule_.window);
    const double mean =
        std::accumulate(tail.begin(), tail.end(), 0.0) / tail.size();
    double ss = 0.0;
    for (double x : tail) ss += (x - mean) * (x - mean);
    if (std::sqrt(ss / tail.size()) < rule_.std_threshold) {
      return StopReason::kPlateau;
    }
  }
  if (since_best_ >= rule_.patience) return StopReason::kNoImprovement;
  return StopReason::kNone;
}

ModelParams init_params(std::size_t n, std::size_t m, std::size_t q,
                        std::span<const Vector> data_sample,
                        std::uint64_t seed) {
  ModelParams params(n, m, q);
  if (!data_sample.empty()) {
    auto b = params.visible_bias();
    for (const Vector& row : data_sample) {
      if (row.size() != n) throw UsageError("data sample row has wrong length");
      for (std::size_t i = 0; i < n; ++i) b[i] += row[i];
    }
    for (double& x : b) x /= static_cast<double>(data_sample.size());
  }
  RandomStream rng(derive_seed(seed, "init"), 0);
  for (double& w : params.weights()) w = 0.01 * rng.normal();
  return params;
}

GradientRecord positive_statistics(const ModelParams& params,
                                   std::span<const Vector> batch) {
  if (batch.empty()) throw UsageError("positive phase needs a nonempty batch");
  GradientRecord acc(params);
  const double weight = 1.0 / static_cast<double>(batch.size());
  for (const Vector& v : batch) {
    if (v.size() != params.visible_count()) {
      throw UsageError("batch row has wrong length");
    }
    accumulate_statistics(params, v, weight, acc);
  }
  return acc;
}

GradientRecord chain_statistics(const ModelParams& params,
                                std::span<const ChainState> chains) {
  if (chains.empty()) throw UsageError("negative phase needs at least one chain");
  GradientRecord acc(params);
  const double weight = 1.0 / static_cast<double>(chains.size());
  for (const ChainState& chain : chains) {
    accumulate_statistics(params, chain.v, weight, acc);
  }
  return acc;
}

GradientRecord negative_statistics(const ModelParams& params,
                                   std::span<ChainState> chains,
                                   const TrainConfig& config, ChainStart start) {
  const std::size_t sweeps =
      config.cd_k + (start == ChainStart::kFresh ? config.burn_in : 0);
  advance_chains(params, chains, config.sampler, sweeps, config.threads);
  return chain_statistics(params, chains);
}

void check_finite(const GradientRecord& grad, std::string_view what) {
  const char* block = nullptr;
  if (!all_finite(grad.db)) {
    block = "visible bias (b)";
  } else if (!all_finite(grad.dc)) {
    block = "hidden bias (c)";
  } else if (!all_finite(grad.dw)) {
    block = "weights (W)";
  }
  if (block != nullptr) {
    throw NumericalError("non-finite " + std::string(what) + " in block " +
                         block);
  }
}

CdTrainer::CdTrainer(const ModelParams& params, TrainConfig config)
    : config_(std::move(config)),
      adam_(params),
      chain_root_(derive_seed(config_.seed, "chains"), 0) {
  config_.validate();
}

GradientRecord CdTrainer::cd_update(ModelParams& params,
                                    std::span<const Vector> batch) {
  GradientRecord grad = positive_statistics(params, batch);
  const RandomStream step_root = chain_root_.child(updates_);

  if (config_.sampler.persistent) {
    ChainStart start = ChainStart::kCarried;
    if (pool_.empty()) {
      const std::size_t size =
          config_.chain_pool == 0 ? config_.batch_size : config_.chain_pool;
      pool_.reserve(size);
      for (std::size_t c = 0; c < size; ++c) {
        pool_.push_back(start_chain(params, batch[c % batch.size()],
                                    chain_root_.child(~std::uint64_t{0} - c)));
      }
      start = ChainStart::kFresh;
    }
    grad -= negative_statistics(params, pool_, config_, start);
  } else {
    std::vector<ChainState> chains;
    chains.reserve(batch.size());
    for (std::size_t r = 0; r < batch.size(); ++r) {
      chains.push_back(start_chain(params, batch[r], step_root.child(r)));
    }
    grad -= negative_statistics(params, chains, config_, ChainStart::kFresh);
  }
  apply_gradient(params, grad);
  return grad;
}

void CdTrainer::apply_gradient(ModelParams& params, const GradientRecord& grad) {
  check_finite(grad, "gradient");
  adam_.ascend(params, grad, config_.adam());
  ++updates_;
  if (!all_finite(params.visible_bias()) || !all_finite(params.hidden_bias()) ||
      !all_finite(params.weights())) {
    throw NumericalError("parameters became non-finite after update " +
                         std::to_string(updates_));
  }
}

double reconstruction_error(const ModelParams& params,
                            std::span<const Vector> data) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const Vector& v : data) {
    const Vector recon =
        posterior_mean_reconstruction(params, hidden_posterior(params, v));
    for (std::size_t i = 0; i < v.size(); ++i) {
      total += (v[i] - recon[i]) * (v[i] - recon[i]);
    }
  }
  return total / static_cast<double>(data.size() * params.visible_count());
}

std::string format_log_entry(const TrainLogEntry& entry) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "epoch %zu recon %.9g val %.9g stop %s",
                entry.epoch, entry.recon, entry.val,
                std::string(to_string(entry.stop)).c_str());
  return buf;
}

FitResult fit(ModelParams& params, std::span<const Vector> dataset,
              const TrainConfig& config, const EarlyStopRule& early_stop,
              const ValidationHook& validation_hook) {
  if (dataset.empty()) throw UsageError("cannot fit an empty dataset");
  config.validate();
  early_stop.validate();
  for (const Vector& row : dataset) {
    if (row.size() != params.visible_count()) {
      throw UsageError("dataset row width does not match the model");
    }
  }

  CdTrainer trainer(params, config);
  EarlyStopper stopper(early_stop);
  RandomStream shuffle_rng(derive_seed(config.seed, "shuffle"), 0);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Vector> batch;

  FitResult result;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t r = start; r < end; ++r) batch.push_back(dataset[order[r]]);
      trainer.cd_update(params, batch);
    }
    result.epochs = epoch;

    const bool last = epoch == config.max_epochs;
    if (epoch % config.checkpoint_every != 0 && !last) continue;

    TrainLogEntry entry;
    entry.epoch = epoch;
    entry.recon = reconstruction_error(params, dataset);
    entry.val = validation_hook ? validation_hook(params, epoch) : -entry.recon;
    entry.stop = stopper.observe(entry.val);
    if (entry.stop == StopReason::kNone && last) entry.stop = StopReason::kMaxEpochs;
    result.log.push_back(entry);
    result.final_metric = entry.val;
    if (entry.stop != StopReason::kNone) {
      result.reason = entry.stop;
      break;
    }
  }
  return result;
}

}  // namespace gmrbm
