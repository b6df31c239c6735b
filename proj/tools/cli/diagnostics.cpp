#include "diagnostics.hpp"

#include <numeric>

#include "gmrbm/errors.hpp"
#include "gmrbm/random.hpp"

namespace gmrbm::cli {

namespace {

double autocorrelation(const std::vector<double>& x, double mean, double var,
                       std::size_t lag) {
  double s = 0.0;
  for (std::size_t t = 0; t + lag < x.size(); ++t) {
    s += (x[t] - mean) * (x[t + lag] - mean);
  }
  return s / (static_cast<double>(x.size()) * var);
}

}  // namespace

EnergyDiagnostics summarize_trace(const std::vector<double>& trace) {
  EnergyDiagnostics d;
  d.samples = trace.size();
  if (trace.empty()) return d;
  const double n = static_cast<double>(trace.size());
  d.mean_energy = std::accumulate(trace.begin(), trace.end(), 0.0) / n;
  double var = 0.0;
  for (double e : trace) var += (e - d.mean_energy) * (e - d.mean_energy);
  var /= n;
  d.effective_samples = n;
  if (!(var > 0.0) || trace.size() < 3) return d;

  for (std::size_t lag : {1, 2, 5, 10, 50}) {
    if (lag >= trace.size()) break;
    d.autocorrelation.emplace_back(lag, autocorrelation(trace, d.mean_energy, var, lag));
  }
  double tau = 1.0;
  for (std::size_t lag = 1; lag < trace.size() / 2; ++lag) {
    const double rho = autocorrelation(trace, d.mean_energy, var, lag);
    if (rho <= 0.0) break;
    tau += 2.0 * rho;
  }
  d.integrated_time = tau;
  d.effective_samples = n / tau;
  return d;
}

EnergyDiagnostics energy_diagnostics(const ModelParams& params,
                                     const SamplerConfig& sampler,
                                     std::size_t sweeps, std::uint64_t seed) {
  if (sweeps < 10) throw UsageError("diagnostic run needs at least 10 sweeps");
  RandomStream rng(derive_seed(seed, "diagnostics"), 0);
  Vector v(params.visible_count());
  for (double& x : v) x = rng.normal();
  ChainState chain = start_chain(params, v, rng);
  const std::size_t burn = sweeps / 10;
  std::vector<double> trace;
  trace.reserve(sweeps - burn);
  for (std::size_t s = 0; s < sweeps; ++s) {
    gibbs_sweep(params, chain, sampler);
    if (s >= burn) trace.push_back(energy(params, chain.v, chain.h));
  }
  return summarize_trace(trace);
}

}  // namespace gmrbm::cli
