#include "gmrbm/gb_model.hpp"

#include <cmath>
#include <string>

#include "gmrbm/errors.hpp"

namespace gmrbm {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_bits(const GbParams& params, std::span<const int> hbits) {
  if (hbits.size() != params.hidden) {
    throw UsageError("hidden bit vector has " + std::to_string(hbits.size()) +
                     " entries, model expects " +
                     std::to_string(params.hidden));
  }
  for (int bit : hbits) {
    if (bit != 0 && bit != 1) throw UsageError("hidden bits must be 0 or 1");
  }
}

}  // namespace

GbParams::GbParams(std::size_t n_visible, std::size_t n_hidden)
    : n(n_visible),
      hidden(n_hidden),
      mu(n_visible, 0.0),
      bhid(n_hidden, 0.0),
      w(n_visible * n_hidden, 0.0),
      sigma2(n_visible, 1.0) {}

void GbParams::validate() const {
  if (mu.size() != n || bhid.size() != hidden || w.size() != n * hidden ||
      sigma2.size() != n) {
    throw UsageError("GB-RBM blocks have inconsistent sizes");
  }
  for (double s : sigma2) {
    if (!(s > 0.0)) throw UsageError("GB-RBM variance must be > 0");
  }
}

double gb_energy(const GbParams& params, std::span<const double> v,
                 std::span<const int> hbits) {
  params.validate();
  if (v.size() != params.n) throw UsageError("visible vector has wrong length");
  check_bits(params, hbits);
  double e = 0.0;
  for (std::size_t i = 0; i < params.n; ++i) {
    const double d = v[i] - params.mu[i];
    e += d * d / (2.0 * params.sigma2[i]);
    const double scaled = v[i] / params.sigma2[i];
    for (std::size_t j = 0; j < params.hidden; ++j) {
      if (hbits[j]) e -= scaled * params.weight(i, j);
    }
  }
  for (std::size_t j = 0; j < params.hidden; ++j) {
    if (hbits[j]) e -= params.bhid[j];
  }
  return e;
}

Vector gb_hidden_probabilities(const GbParams& params,
                               std::span<const double> v) {
  params.validate();
  if (v.size() != params.n) throw UsageError("visible vector has wrong length");
  Vector p(params.bhid);
  for (std::size_t i = 0; i < params.n; ++i) {
    const double scaled = v[i] / params.sigma2[i];
    for (std::size_t j = 0; j < params.hidden; ++j) {
      p[j] += scaled * params.weight(i, j);
    }
  }
  for (double& x : p) x = sigmoid(x);
  return p;
}

GaussianConditional gb_visible_conditional(const GbParams& params,
                                           std::span<const int> hbits) {
  params.validate();
  check_bits(params, hbits);
  GaussianConditional g{params.mu, params.sigma2};
  for (std::size_t i = 0; i < params.n; ++i) {
    for (std::size_t j = 0; j < params.hidden; ++j) {
      if (hbits[j]) g.mean[i] += params.weight(i, j);
    }
  }
  return g;
}

GbParams reduce_q2(const ModelParams& params) {
  if (params.state_count() != 2) {
    throw UsageError("q=2 reduction requires a model with exactly 2 states, got " +
                     std::to_string(params.state_count()));
  }
  const std::size_t n = params.visible_count();
  const std::size_t m = params.slot_count();
  GbParams gb(n, m);
  auto b = params.visible_bias();
  gb.mu.assign(b.begin(), b.end());
  for (std::size_t j = 0; j < m; ++j) {
    auto on = params.weight_template(0, j);
    auto off = params.weight_template(1, j);
    for (std::size_t i = 0; i < n; ++i) {
      gb.mu[i] += off[i];
      gb.weight(i, j) = on[i] - off[i];
    }
    gb.bhid[j] = params.hidden_bias(j, 0) - params.hidden_bias(j, 1);
  }
  if (params.has_variance()) {
    auto s = params.variance();
    gb.sigma2.assign(s.begin(), s.end());
  }
  return gb;
}

std::vector<int> code_to_bits(const HiddenCode& h) {
  std::vector<int> bits(h.size());
  for (std::size_t j = 0; j < h.size(); ++j) bits[j] = h.state(j) == 1 ? 1 : 0;
  return bits;
}

}  // namespace gmrbm
