#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gmrbm/model.hpp"

namespace gmrbm {

// Brute-force inference over all q^m hidden codes. The visible integral is
// Gaussian and done analytically, so the only enumeration is over codes.
//
// Codes are enumerated with slot 1 varying fastest: code index t maps to
// h_j = 1 + (t / q^j) mod q.

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

// Number of codes q^m; throws CapacityError when it exceeds `cap`.
std::uint64_t code_count(const ModelParams& params,
                         std::uint64_t cap = kDefaultEnumerationCap);

HiddenCode code_from_index(const ModelParams& params, std::uint64_t index);
std::uint64_t index_from_code(const ModelParams& params, const HiddenCode& h);

// Stable log(sum(exp(x))).
double log_sum_exp(std::span<const double> x);

struct ExactSummary {
  double log_partition = 0.0;
  std::vector<double> hidden_marginal;  // indexed by code index
};

// log Z = sum_i 1/2 log(2 pi sigma2_i) + logsumexp_h(-K(h));
// p(h) proportional to exp(-K(h)).
ExactSummary exact_summary(const ModelParams& params,
                           std::uint64_t cap = kDefaultEnumerationCap);

double exact_log_likelihood(const ModelParams& params, std::span<const double> v,
                            std::uint64_t cap = kDefaultEnumerationCap);

// Mean of exact_log_likelihood over the rows of `data`.
double exact_mean_log_likelihood(const ModelParams& params,
                                 std::span<const Vector> data,
                                 std::uint64_t cap = kDefaultEnumerationCap);

// p(h | v) over all codes, proportional to exp(-E(v,h)).
std::vector<double> exact_posterior(const ModelParams& params,
                                    std::span<const double> v,
                                    std::uint64_t cap = kDefaultEnumerationCap);

// Marginal of slot j over an enumerated table, as an m x q row-major matrix.
Vector slot_marginals(const ModelParams& params,
                      std::span<const double> code_table);

// Gradient of the mean log-likelihood of `data` w.r.t. (b, c, W), split into
// the data phase E_{p(h|v)}[-dE/dtheta] and the model phase
// E_{p(v,h)}[-dE/dtheta], both averaged over the data and computed exactly.
struct ExactGradient {
  GradientRecord positive;
  GradientRecord negative;

  GradientRecord total() const;
};

ExactGradient exact_gradient(const ModelParams& params,
                             std::span<const Vector> data,
                             std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace gmrbm
