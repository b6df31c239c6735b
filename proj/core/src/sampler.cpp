#include "gmrbm/sampler.hpp"

#include <cmath>
#include <string>

#include "gmrbm/errors.hpp"

namespace gmrbm {

namespace {

double variance_at(std::span<const double> sigma2, std::size_t i) {
  return sigma2.empty() ? 1.0 : sigma2[i];
}

// Langevin or exact visible update restricted to coordinates where
// `is_free` is true (all coordinates when `is_free` is empty).
void update_visible(const ModelParams& params, const HiddenCode& h,
                    const SamplerConfig& config, Vector& v,
                    const std::vector<bool>& is_free, RandomStream& rng) {
  const Vector mu = conditional_mean(params, h);
  const auto sigma2 = params.variance();
  const std::size_t n = v.size();
  auto free_at = [&](std::size_t i) { return is_free.empty() || is_free[i]; };

  if (config.kind == SamplerKind::kGibbs) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!free_at(i)) continue;
      v[i] = mu[i] + std::sqrt(variance_at(sigma2, i)) * rng.normal();
    }
    return;
  }
  const double eps = *config.langevin_eps;
  const double half_eps2 = 0.5 * eps * eps;
  for (std::size_t step = 0; step < config.langevin_steps; ++step) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!free_at(i)) continue;
      v[i] += half_eps2 * (mu[i] - v[i]) / variance_at(sigma2, i) +
              eps * rng.normal();
    }
  }
}

}  // namespace

std::string_view to_string(SamplerKind kind) {
  return kind == SamplerKind::kGibbs ? "gibbs" : "gibbs-langevin";
}

SamplerKind parse_sampler_kind(std::string_view text) {
  if (text == "gibbs") return SamplerKind::kGibbs;
  if (text == "gibbs-langevin") return SamplerKind::kGibbsLangevin;
  throw UsageError("unknown sampler kind '" + std::string(text) +
                   "' (expected gibbs or gibbs-langevin)");
}

std::string_view to_string(Readout readout) {
  return readout == Readout::kMean ? "mean" : "sample";
}

Readout parse_readout(std::string_view text) {
  if (text == "mean") return Readout::kMean;
  if (text == "sample") return Readout::kSample;
  throw UsageError("unknown readout '" + std::string(text) +
                   "' (expected mean or sample)");
}

void SamplerConfig::validate() const {
  if (kind == SamplerKind::kGibbsLangevin) {
    if (!langevin_eps || !(*langevin_eps > 0.0)) {
      throw UsageError("gibbs-langevin sampler needs langevin_eps > 0");
    }
    if (langevin_steps == 0) {
      throw UsageError("gibbs-langevin sampler needs langevin_steps >= 1");
    }
  } else if (langevin_eps) {
    throw UsageError("langevin_eps is only valid for the gibbs-langevin sampler");
  }
}

std::size_t sample_categorical(std::span<const double> probs,
                               RandomStream& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] > 0.0) last_positive = k;
    cumulative += probs[k];
    if (u < cumulative) return k;
  }
  // Round-off left u above the final cumulative sum.
  return last_positive;
}

HiddenCode sample_hidden(const ModelParams& params, std::span<const double> v,
                         RandomStream& rng) {
  const Vector post = hidden_posterior(params, v);
  const std::size_t q = params.state_count();
  HiddenCode h(params.slot_count());
  for (std::size_t j = 0; j < h.size(); ++j) {
    h.set_index(j, sample_categorical(std::span(post).subspan(j * q, q), rng));
  }
  return h;
}

Vector sample_visible(const ModelParams& params, const HiddenCode& h,
                      RandomStream& rng) {
  Vector v = conditional_mean(params, h);
  const auto sigma2 = params.variance();
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] += std::sqrt(variance_at(sigma2, i)) * rng.normal();
  }
  return v;
}

Vector langevin_visible_step(const ModelParams& params, const HiddenCode& h,
                             std::span<const double> v, double eps,
                             RandomStream& rng, LangevinNoise noise) {
  if (!(eps > 0.0)) throw UsageError("Langevin step size must be > 0");
  if (v.size() != params.visible_count()) {
    throw UsageError("visible vector has wrong length");
  }
  const Vector mu = conditional_mean(params, h);
  const auto sigma2 = params.variance();
  const double half_eps2 = 0.5 * eps * eps;
  Vector out(v.begin(), v.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += half_eps2 * (mu[i] - v[i]) / variance_at(sigma2, i);
    if (noise == LangevinNoise::kOn) out[i] += eps * rng.normal();
  }
  return out;
}

ChainState start_chain(const ModelParams& params, std::span<const double> v,
                       RandomStream rng) {
  ChainState state{Vector(v.begin(), v.end()), HiddenCode(), std::move(rng)};
  state.h = sample_hidden(params, state.v, state.rng);
  return state;
}

void gibbs_sweep(const ModelParams& params, ChainState& state,
                 const SamplerConfig& config) {
  state.h = sample_hidden(params, state.v, state.rng);
  update_visible(params, state.h, config, state.v, {}, state.rng);
}

Vector clamped_completion(const ModelParams& params,
                          std::span<const double> v_clamped,
                          const std::vector<bool>& clamp, std::size_t steps,
                          const SamplerConfig& config, Readout readout,
                          RandomStream& rng) {
  const std::size_t n = params.visible_count();
  if (v_clamped.size() != n || clamp.size() != n) {
    throw UsageError("clamped vector and mask must both have n entries");
  }
  if (steps == 0) throw UsageError("clamped completion needs steps >= 1");
  std::vector<bool> is_free(n);
  bool any_free = false;
  for (std::size_t i = 0; i < n; ++i) {
    is_free[i] = !clamp[i];
    any_free = any_free || is_free[i];
  }
  if (!any_free) {
    throw UsageError("clamped completion needs at least one free coordinate");
  }

  const auto b = params.visible_bias();
  Vector v(v_clamped.begin(), v_clamped.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (is_free[i]) v[i] = b[i];
  }
  HiddenCode h;
  for (std::size_t s = 0; s < steps; ++s) {
    h = sample_hidden(params, v, rng);
    if (s + 1 == steps && readout == Readout::kMean) {
      const Vector mu = conditional_mean(params, h);
      for (std::size_t i = 0; i < n; ++i) {
        if (is_free[i]) v[i] = mu[i];
      }
    } else {
      update_visible(params, h, config, v, is_free, rng);
    }
  }
  return v;
}

}  // namespace gmrbm
