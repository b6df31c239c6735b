#include "gmrbm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gmrbm/errors.hpp"

namespace gmrbm {

namespace {

void check_visible(const ModelParams& params, std::span<const double> v) {
  if (v.size() != params.visible_count()) {
    throw UsageError("visible vector has " + std::to_string(v.size()) +
                     " entries, model expects " +
                     std::to_string(params.visible_count()));
  }
}

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw UsageError(std::string("non-finite value in ") + what);
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

ModelParams::ModelParams(std::size_t n, std::size_t m, std::size_t q)
    : n_(n), m_(m), q_(q), b_(n, 0.0), c_(m * q, 0.0), w_(q * m * n, 0.0) {
  if (n == 0 || m == 0 || q == 0) {
    throw UsageError("model dimensions n, m, q must all be >= 1");
  }
}

std::span<const double> ModelParams::variance() const {
  if (!sigma2_) return {};
  return *sigma2_;
}

void ModelParams::set_variance(Vector sigma2) {
  if (sigma2.size() != n_) {
    throw UsageError("variance vector must have n entries");
  }
  for (double s : sigma2) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw UsageError("variance entries must be finite and > 0");
    }
  }
  sigma2_ = std::move(sigma2);
}

void ModelParams::validate() const {
  if (b_.size() != n_ || c_.size() != m_ * q_ || w_.size() != q_ * m_ * n_) {
    throw UsageError("model blocks have inconsistent sizes");
  }
  check_finite(b_, "visible bias");
  check_finite(c_, "hidden bias");
  check_finite(w_, "weights");
  if (sigma2_) {
    if (sigma2_->size() != n_) throw UsageError("variance has wrong length");
    for (double s : *sigma2_) {
      if (!(s > 0.0) || !std::isfinite(s)) {
        throw UsageError("variance entries must be finite and > 0");
      }
    }
  }
}

GradientRecord::GradientRecord(const ModelParams& params)
    : db(params.visible_count(), 0.0),
      dc(params.hidden_bias().size(), 0.0),
      dw(params.weights().size(), 0.0) {}

void GradientRecord::set_zero() {
  std::fill(db.begin(), db.end(), 0.0);
  std::fill(dc.begin(), dc.end(), 0.0);
  std::fill(dw.begin(), dw.end(), 0.0);
}

GradientRecord& GradientRecord::operator+=(const GradientRecord& other) {
  for (std::size_t i = 0; i < db.size(); ++i) db[i] += other.db[i];
  for (std::size_t i = 0; i < dc.size(); ++i) dc[i] += other.dc[i];
  for (std::size_t i = 0; i < dw.size(); ++i) dw[i] += other.dw[i];
  return *this;
}

GradientRecord& GradientRecord::operator-=(const GradientRecord& other) {
  for (std::size_t i = 0; i < db.size(); ++i) db[i] -= other.db[i];
  for (std::size_t i = 0; i < dc.size(); ++i) dc[i] -= other.dc[i];
  for (std::size_t i = 0; i < dw.size(); ++i) dw[i] -= other.dw[i];
  return *this;
}

GradientRecord& GradientRecord::operator*=(double scale) {
  for (double& x : db) x *= scale;
  for (double& x : dc) x *= scale;
  for (double& x : dw) x *= scale;
  return *this;
}

void check_code(const ModelParams& params, const HiddenCode& h) {
  if (h.size() != params.slot_count()) {
    throw UsageError("hidden code has " + std::to_string(h.size()) +
                     " slots, model expects " +
                     std::to_string(params.slot_count()));
  }
  const int q = static_cast<int>(params.state_count());
  for (std::size_t j = 0; j < h.size(); ++j) {
    if (h.state(j) < 1 || h.state(j) > q) {
      throw UsageError("hidden state " + std::to_string(h.state(j)) +
                       " of slot " + std::to_string(j) + " outside {1.." +
                       std::to_string(q) + "}");
    }
  }
}

Vector conditional_mean(const ModelParams& params, const HiddenCode& h) {
  check_code(params, h);
  auto b = params.visible_bias();
  Vector mu(b.begin(), b.end());
  for (std::size_t j = 0; j < h.size(); ++j) {
    auto t = params.weight_template(h.index(j), j);
    for (std::size_t i = 0; i < mu.size(); ++i) mu[i] += t[i];
  }
  return mu;
}

double energy(const ModelParams& params, std::span<const double> v,
              const HiddenCode& h) {
  check_visible(params, v);
  check_finite(v, "visible vector");
  check_code(params, h);
  const auto b = params.visible_bias();
  const auto sigma2 = params.variance();
  const std::size_t n = params.visible_count();

  Vector scaled(v.begin(), v.end());
  double quadratic = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = v[i] - b[i];
    const double s = sigma2.empty() ? 1.0 : sigma2[i];
    quadratic += 0.5 * d * d / s;
    scaled[i] = v[i] / s;
  }
  double e = quadratic;
  for (std::size_t j = 0; j < h.size(); ++j) {
    e -= params.hidden_bias(j, h.index(j));
    e -= dot(params.weight_template(h.index(j), j), scaled);
  }
  return e;
}

double offset_constant(const ModelParams& params, const HiddenCode& h) {
  const Vector mu = conditional_mean(params, h);
  const auto b = params.visible_bias();
  const auto sigma2 = params.variance();
  double k = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double s = sigma2.empty() ? 1.0 : sigma2[i];
    k += 0.5 * (b[i] * b[i] - mu[i] * mu[i]) / s;
  }
  for (std::size_t j = 0; j < h.size(); ++j) {
    k -= params.hidden_bias(j, h.index(j));
  }
  return k;
}

Vector hidden_logits(const ModelParams& params, std::span<const double> v) {
  check_visible(params, v);
  const std::size_t m = params.slot_count();
  const std::size_t q = params.state_count();
  const auto sigma2 = params.variance();

  Vector scaled(v.begin(), v.end());
  if (!sigma2.empty()) {
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] /= sigma2[i];
  }
  Vector logits(params.hidden_bias().begin(), params.hidden_bias().end());
  for (std::size_t k = 0; k < q; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      logits[j * q + k] += dot(params.weight_template(k, j), scaled);
    }
  }
  return logits;
}

void softmax_in_place(std::span<double> row) {
  const double top = *std::max_element(row.begin(), row.end());
  double total = 0.0;
  for (double& x : row) {
    x = std::exp(x - top);
    total += x;
  }
  for (double& x : row) x /= total;
}

Vector hidden_posterior(const ModelParams& params, std::span<const double> v) {
  Vector p = hidden_logits(params, v);
  const std::size_t q = params.state_count();
  for (std::size_t j = 0; j < params.slot_count(); ++j) {
    softmax_in_place(std::span<double>(p).subspan(j * q, q));
  }
  return p;
}

Vector posterior_mean_reconstruction(const ModelParams& params,
                                     std::span<const double> posterior) {
  const std::size_t m = params.slot_count();
  const std::size_t q = params.state_count();
  if (posterior.size() != m * q) {
    throw UsageError("posterior table must be m x q");
  }
  auto b = params.visible_bias();
  Vector out(b.begin(), b.end());
  for (std::size_t k = 0; k < q; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      const double p = posterior[j * q + k];
      if (p == 0.0) continue;
      auto t = params.weight_template(k, j);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += p * t[i];
    }
  }
  return out;
}

GaussianConditional visible_conditional(const ModelParams& params,
                                        const HiddenCode& h) {
  GaussianConditional g;
  g.mean = conditional_mean(params, h);
  if (params.has_variance()) {
    auto s = params.variance();
    g.variance.assign(s.begin(), s.end());
  } else {
    g.variance.assign(params.visible_count(), 1.0);
  }
  return g;
}

}  // namespace gmrbm
