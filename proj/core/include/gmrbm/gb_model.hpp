#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gmrbm/model.hpp"

namespace gmrbm {

// Gaussian-Bernoulli RBM with energy
//
//   E(v,h) = sum_i (v_i - mu_i)^2 / (2 sigma2_i)
//            - sum_{i,j} (v_i / sigma2_i) W_ij h_j - sum_j bhid_j h_j
//
// W is n x m', row-major: weight(i, j) = w[i * m' + j].
struct GbParams {
  std::size_t n = 0;
  std::size_t hidden = 0;
  Vector mu;
  Vector bhid;
  Vector w;
  Vector sigma2;

  GbParams() = default;
  // Zero offsets and weights, unit variance.
  GbParams(std::size_t n, std::size_t hidden);

  double weight(std::size_t i, std::size_t j) const { return w[i * hidden + j]; }
  double& weight(std::size_t i, std::size_t j) { return w[i * hidden + j]; }

  void validate() const;
};

double gb_energy(const GbParams& params, std::span<const double> v,
                 std::span<const int> hbits);

// p(h_j = 1 | v) = sigmoid([W^T (v / sigma2)]_j + bhid_j)
Vector gb_hidden_probabilities(const GbParams& params,
                               std::span<const double> v);

// p(v | h) = N(mu + W h, diag sigma2)
GaussianConditional gb_visible_conditional(const GbParams& params,
                                           std::span<const int> hbits);

// Tied q = 2 reduction. With s_j = 1 iff h_j = 1:
//   mu          = b + sum_j W^{(2)}_{:,j}
//   W~_{:,j}    = W^{(1)}_{:,j} - W^{(2)}_{:,j}
//   bhid_j      = c_{j,1} - c_{j,2}
//   sigma2      = model variance (ones when absent)
// E_GM(v,h) - E_GB(v,s) is then independent of (v,h). Throws UsageError
// unless q == 2.
GbParams reduce_q2(const ModelParams& params);

// Hidden code -> bit vector under h_j = 1 <=> bit 1.
std::vector<int> code_to_bits(const HiddenCode& h);

}  // namespace gmrbm
