#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gmrbm/model.hpp"
#include "gmrbm/random.hpp"

namespace gmrbm {

enum class SamplerKind { kGibbs, kGibbsLangevin };

std::string_view to_string(SamplerKind kind);
// Accepts "gibbs" and "gibbs-langevin"; throws UsageError otherwise.
SamplerKind parse_sampler_kind(std::string_view text);

struct SamplerConfig {
  SamplerKind kind = SamplerKind::kGibbs;
  // Required (and > 0) for gibbs-langevin, must be absent for gibbs.
  std::optional<double> langevin_eps;
  std::size_t langevin_steps = 1;
  bool persistent = false;

  void validate() const;
};

// One Markov chain: visible state, hidden state, and its own random stream.
struct ChainState {
  Vector v;
  HiddenCode h;
  RandomStream rng;
};

// Inverse-CDF draw of a 0-based category from a normalized probability row.
std::size_t sample_categorical(std::span<const double> probs, RandomStream& rng);

// Each slot drawn independently from its softmax posterior row.
HiddenCode sample_hidden(const ModelParams& params, std::span<const double> v,
                         RandomStream& rng);

// Exact draw from N(mu(h), diag var): one Gaussian noise vector per call.
Vector sample_visible(const ModelParams& params, const HiddenCode& h,
                      RandomStream& rng);

enum class LangevinNoise { kOn, kSuppressed };

// Unadjusted Langevin update of the visible layer at fixed h:
//   v' = v + eps^2/2 (mu(h) - v) / sigma2 + eps xi
// There is no Metropolis correction, so the stationary law carries an
// O(eps^2) bias. kSuppressed drops the noise term (test hook).
Vector langevin_visible_step(const ModelParams& params, const HiddenCode& h,
                             std::span<const double> v, double eps,
                             RandomStream& rng,
                             LangevinNoise noise = LangevinNoise::kOn);

// Data-started chain: v = data, h drawn once from p(h | v).
ChainState start_chain(const ModelParams& params, std::span<const double> v,
                       RandomStream rng);

// Hidden draw, then either one exact visible draw (gibbs) or
// config.langevin_steps Langevin updates (gibbs-langevin).
void gibbs_sweep(const ModelParams& params, ChainState& state,
                 const SamplerConfig& config);

enum class Readout {
  kMean,    // mu(h) on the free coordinates after the last hidden draw
  kSample,  // the final visible sample
};

std::string_view to_string(Readout readout);
Readout parse_readout(std::string_view text);

// Clamped completion: coordinates with clamp[i] == true are held at
// v_clamped[i] bit-for-bit; free coordinates start at the visible bias and
// are resampled every sweep. Throws UsageError when nothing is free or
// steps == 0.
Vector clamped_completion(const ModelParams& params,
                          std::span<const double> v_clamped,
                          const std::vector<bool>& clamp, std::size_t steps,
                          const SamplerConfig& config, Readout readout,
                          RandomStream& rng);

}  // namespace gmrbm
