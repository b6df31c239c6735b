#include "gmrbm/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gmrbm/errors.hpp"

namespace gmrbm {

namespace {

double log_normalizer(const ModelParams& params) {
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  const auto sigma2 = params.variance();
  double total = 0.0;
  for (std::size_t i = 0; i < params.visible_count(); ++i) {
    total += half_log_2pi;
    if (!sigma2.empty()) total += 0.5 * std::log(sigma2[i]);
  }
  return total;
}

std::vector<double> normalized_exp(std::vector<double> log_weights,
                                   double* log_total) {
  const double lse = log_sum_exp(log_weights);
  for (double& x : log_weights) x = std::exp(x - lse);
  if (log_total != nullptr) *log_total = lse;
  return log_weights;
}

// Advances h to the next code in slot-1-fastest order.
void next_code(HiddenCode& h, int q) {
  for (std::size_t j = 0; j < h.size(); ++j) {
    if (h.state(j) < q) {
      h.set_state(j, h.state(j) + 1);
      return;
    }
    h.set_state(j, 1);
  }
}

}  // namespace

std::uint64_t code_count(const ModelParams& params, std::uint64_t cap) {
  std::uint64_t count = 1;
  for (std::size_t j = 0; j < params.slot_count(); ++j) {
    if (count > cap / params.state_count()) {
      throw CapacityError("exact enumeration needs " +
                          std::to_string(params.state_count()) + "^" +
                          std::to_string(params.slot_count()) +
                          " hidden codes, above the cap of " +
                          std::to_string(cap));
    }
    count *= params.state_count();
  }
  if (count > cap) {
    throw CapacityError("exact enumeration exceeds the cap of " +
                        std::to_string(cap) + " hidden codes");
  }
  return count;
}

HiddenCode code_from_index(const ModelParams& params, std::uint64_t index) {
  HiddenCode h(params.slot_count());
  const std::uint64_t q = params.state_count();
  for (std::size_t j = 0; j < h.size(); ++j) {
    h.set_index(j, static_cast<std::size_t>(index % q));
    index /= q;
  }
  return h;
}

std::uint64_t index_from_code(const ModelParams& params, const HiddenCode& h) {
  check_code(params, h);
  std::uint64_t index = 0;
  for (std::size_t j = h.size(); j-- > 0;) {
    index = index * params.state_count() + h.index(j);
  }
  return index;
}

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(top)) return top;
  double total = 0.0;
  for (double v : x) total += std::exp(v - top);
  return top + std::log(total);
}

ExactSummary exact_summary(const ModelParams& params, std::uint64_t cap) {
  const std::uint64_t count = code_count(params, cap);
  std::vector<double> neg_k(count);
  HiddenCode h(params.slot_count());
  for (std::uint64_t t = 0; t < count; ++t) {
    neg_k[t] = -offset_constant(params, h);
    next_code(h, static_cast<int>(params.state_count()));
  }
  ExactSummary summary;
  double lse = 0.0;
  summary.hidden_marginal = normalized_exp(std::move(neg_k), &lse);
  summary.log_partition = log_normalizer(params) + lse;
  return summary;
}

double exact_log_likelihood(const ModelParams& params, std::span<const double> v,
                            std::uint64_t cap) {
  const std::uint64_t count = code_count(params, cap);
  std::vector<double> neg_e(count);
  HiddenCode h(params.slot_count());
  for (std::uint64_t t = 0; t < count; ++t) {
    neg_e[t] = -energy(params, v, h);
    next_code(h, static_cast<int>(params.state_count()));
  }
  return log_sum_exp(neg_e) - exact_summary(params, cap).log_partition;
}

double exact_mean_log_likelihood(const ModelParams& params,
                                 std::span<const Vector> data,
                                 std::uint64_t cap) {
  if (data.empty()) throw UsageError("log-likelihood needs at least one row");
  const std::uint64_t count = code_count(params, cap);
  const double log_z = exact_summary(params, cap).log_partition;
  std::vector<double> neg_e(count);
  double total = 0.0;
  for (const Vector& v : data) {
    HiddenCode h(params.slot_count());
    for (std::uint64_t t = 0; t < count; ++t) {
      neg_e[t] = -energy(params, v, h);
      next_code(h, static_cast<int>(params.state_count()));
    }
    total += log_sum_exp(neg_e) - log_z;
  }
  return total / static_cast<double>(data.size());
}

std::vector<double> exact_posterior(const ModelParams& params,
                                    std::span<const double> v,
                                    std::uint64_t cap) {
  const std::uint64_t count = code_count(params, cap);
  std::vector<double> neg_e(count);
  HiddenCode h(params.slot_count());
  for (std::uint64_t t = 0; t < count; ++t) {
    neg_e[t] = -energy(params, v, h);
    next_code(h, static_cast<int>(params.state_count()));
  }
  return normalized_exp(std::move(neg_e), nullptr);
}

Vector slot_marginals(const ModelParams& params,
                      std::span<const double> code_table) {
  const std::size_t m = params.slot_count();
  const std::size_t q = params.state_count();
  if (code_table.size() !=
      code_count(params, std::numeric_limits<std::uint64_t>::max())) {
    throw UsageError("code table size does not match q^m");
  }
  Vector marg(m * q, 0.0);
  HiddenCode h(m);
  for (double p : code_table) {
    for (std::size_t j = 0; j < m; ++j) marg[j * q + h.index(j)] += p;
    next_code(h, static_cast<int>(q));
  }
  return marg;
}

GradientRecord ExactGradient::total() const {
  GradientRecord g = positive;
  g -= negative;
  return g;
}

ExactGradient exact_gradient(const ModelParams& params,
                             std::span<const Vector> data, std::uint64_t cap) {
  if (data.empty()) throw UsageError("gradient needs at least one data row");
  const std::size_t n = params.visible_count();
  const std::size_t m = params.slot_count();
  const std::size_t q = params.state_count();
  const auto b = params.visible_bias();
  const auto sigma2 = params.variance();
  auto inv_var = [&](std::size_t i) {
    return sigma2.empty() ? 1.0 : 1.0 / sigma2[i];
  };

  ExactGradient grad{GradientRecord(params), GradientRecord(params)};

  // Data phase marginalizes the enumerated joint posterior, never the
  // closed-form per-slot softmax.
  const double weight = 1.0 / static_cast<double>(data.size());
  for (const Vector& v : data) {
    const std::vector<double> post = exact_posterior(params, v, cap);
    const Vector marg = slot_marginals(params, post);
    for (std::size_t i = 0; i < n; ++i) {
      grad.positive.db[i] += weight * (v[i] - b[i]) * inv_var(i);
    }
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t k = 0; k < q; ++k) {
        const double p = marg[j * q + k];
        grad.positive.dc[j * q + k] += weight * p;
        double* row = grad.positive.dw.data() + (k * m + j) * n;
        for (std::size_t i = 0; i < n; ++i) {
          row[i] += weight * p * v[i] * inv_var(i);
        }
      }
    }
  }

  // Model phase: E[v | h] = mu(h), so every moment is a weighted sum over
  // codes of mu(h).
  const ExactSummary summary = exact_summary(params, cap);
  HiddenCode h(m);
  for (double p : summary.hidden_marginal) {
    const Vector mu = conditional_mean(params, h);
    for (std::size_t i = 0; i < n; ++i) {
      grad.negative.db[i] += p * (mu[i] - b[i]) * inv_var(i);
    }
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t k = h.index(j);
      grad.negative.dc[j * q + k] += p;
      double* row = grad.negative.dw.data() + (k * m + j) * n;
      for (std::size_t i = 0; i < n; ++i) row[i] += p * mu[i] * inv_var(i);
    }
    next_code(h, static_cast<int>(q));
  }
  return grad;
}

}  // namespace gmrbm
