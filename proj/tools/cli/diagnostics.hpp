#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gmrbm/model.hpp"
#include "gmrbm/sampler.hpp"

namespace gmrbm::cli {

struct EnergyDiagnostics {
  std::size_t samples = 0;
  double mean_energy = 0.0;
  // (lag, autocorrelation) for lags 1, 2, 5, 10, 50 that fit in the trace.
  std::vector<std::pair<std::size_t, double>> autocorrelation;
  // 1 + 2 sum of autocorrelations up to the first non-positive one.
  double integrated_time = 1.0;
  double effective_samples = 0.0;
};

// Autocorrelation summary of an energy trace.
EnergyDiagnostics summarize_trace(const std::vector<double>& trace);

// Runs one chain from N(0, I) noise for `sweeps` sweeps, drops the first
// tenth and summarizes E(v, h) after each remaining sweep.
EnergyDiagnostics energy_diagnostics(const ModelParams& params,
                                     const SamplerConfig& sampler,
                                     std::size_t sweeps, std::uint64_t seed);

}  // namespace gmrbm::cli
