#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace gmrbm {

using Vector = std::vector<double>;

// Hidden configuration of a Gaussian-multinoulli RBM: one categorical state
// per slot. States are 1-based ({1..q}) at this interface; storage accessors
// on ModelParams take 0-based state indices, and index(j) == state(j) - 1.
class HiddenCode {
 public:
  HiddenCode() = default;
  // All slots start in state 1.
  explicit HiddenCode(std::size_t slots) : states_(slots, 1) {}
  explicit HiddenCode(std::vector<int> states) : states_(std::move(states)) {}

  std::size_t size() const { return states_.size(); }
  int state(std::size_t slot) const { return states_[slot]; }
  std::size_t index(std::size_t slot) const {
    return static_cast<std::size_t>(states_[slot] - 1);
  }
  void set_state(std::size_t slot, int state) { states_[slot] = state; }
  void set_index(std::size_t slot, std::size_t index) {
    states_[slot] = static_cast<int>(index) + 1;
  }
  const std::vector<int>& states() const { return states_; }

  friend bool operator==(const HiddenCode&, const HiddenCode&) = default;

 private:
  std::vector<int> states_;
};

// Parameters of a Gaussian-multinoulli RBM with n visibles and m hidden slots
// of q states each.
//
//   visible_bias   b      length n
//   hidden_bias    c      m x q, slot-major: c[j * q + k]
//   weights        W      q x m x n, layout (k, j, i): W[(k * m + j) * n + i]
//   variance       sigma2 optional, length n, strictly positive
//
// One slot-state template W^{(k)}_{:,j} is a contiguous stripe of length n.
class ModelParams {
 public:
  ModelParams() = default;
  ModelParams(std::size_t n, std::size_t m, std::size_t q);

  std::size_t visible_count() const { return n_; }
  std::size_t slot_count() const { return m_; }
  std::size_t state_count() const { return q_; }

  std::span<double> visible_bias() { return b_; }
  std::span<const double> visible_bias() const { return b_; }

  std::span<double> hidden_bias() { return c_; }
  std::span<const double> hidden_bias() const { return c_; }
  double& hidden_bias(std::size_t slot, std::size_t state) {
    return c_[slot * q_ + state];
  }
  double hidden_bias(std::size_t slot, std::size_t state) const {
    return c_[slot * q_ + state];
  }

  std::span<double> weights() { return w_; }
  std::span<const double> weights() const { return w_; }
  std::span<double> weight_template(std::size_t state, std::size_t slot) {
    return std::span<double>(w_).subspan((state * m_ + slot) * n_, n_);
  }
  std::span<const double> weight_template(std::size_t state,
                                          std::size_t slot) const {
    return std::span<const double>(w_).subspan((state * m_ + slot) * n_, n_);
  }

  bool has_variance() const { return sigma2_.has_value(); }
  // Empty span when the model uses unit variance.
  std::span<const double> variance() const;
  void set_variance(Vector sigma2);
  void clear_variance() { sigma2_.reset(); }

  // Throws UsageError if any stored value is non-finite or a variance entry
  // is not strictly positive.
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::size_t q_ = 0;
  Vector b_;
  Vector c_;
  Vector w_;
  std::optional<Vector> sigma2_;
};

// Per-block statistics shaped like ModelParams (no variance block).
struct GradientRecord {
  Vector db;
  Vector dc;
  Vector dw;

  GradientRecord() = default;
  explicit GradientRecord(const ModelParams& params);

  void set_zero();
  GradientRecord& operator+=(const GradientRecord& other);
  GradientRecord& operator-=(const GradientRecord& other);
  GradientRecord& operator*=(double scale);
};

// Throws UsageError unless h has m entries each within {1..q}.
void check_code(const ModelParams& params, const HiddenCode& h);

// mu(h) = b + sum_j W^{(h_j)}_{:,j}
Vector conditional_mean(const ModelParams& params, const HiddenCode& h);

// Unit variance:
//   E(v,h) = 1/2 |v - b|^2 - sum_j c_{j,h_j} - sum_j W^{(h_j)}_{:,j} . v
// With a variance vector the quadratic and coupling terms are divided by
// sigma2 elementwise.
double energy(const ModelParams& params, std::span<const double> v,
              const HiddenCode& h);

// K(h) such that E(v,h) = 1/2 |v - mu(h)|^2_{sigma2} + K(h).
double offset_constant(const ModelParams& params, const HiddenCode& h);

// Row j holds c_{j,k} + W^{(k)}_{:,j} . (v / sigma2), row-major m x q.
Vector hidden_logits(const ModelParams& params, std::span<const double> v);

// Row-wise softmax of hidden_logits with max subtraction, row-major m x q.
Vector hidden_posterior(const ModelParams& params, std::span<const double> v);

// b + sum_j sum_k p(h_j = k | v) W^{(k)}_{:,j} for a posterior table.
Vector posterior_mean_reconstruction(const ModelParams& params,
                                     std::span<const double> posterior);

struct GaussianConditional {
  Vector mean;
  Vector variance;
};

GaussianConditional visible_conditional(const ModelParams& params,
                                        const HiddenCode& h);

// In-place softmax of one row, max-subtracted.
void softmax_in_place(std::span<double> row);

}  // namespace gmrbm
