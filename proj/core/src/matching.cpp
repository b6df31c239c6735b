#include "gmrbm/matching.hpp"

#include <cmath>
#include <cstdio>

#include "gmrbm/errors.hpp"

namespace gmrbm {

namespace {

void require_positive(std::uint64_t x, const char* name) {
  if (x == 0) throw UsageError(std::string(name) + " must be >= 1");
}

bool is_power_of_two(std::uint64_t x) { return x != 0 && (x & (x - 1)) == 0; }

}  // namespace

std::uint64_t gm_param_count(std::uint64_t n, std::uint64_t m, std::uint64_t q) {
  require_positive(n, "n");
  require_positive(m, "m");
  require_positive(q, "q");
  return n + m * q * (1 + n);
}

std::uint64_t gb_param_count(std::uint64_t n, std::uint64_t m_prime) {
  return n + m_prime + n * m_prime;
}

std::uint64_t capacity_matched_mprime(std::uint64_t m, std::uint64_t q) {
  if (q < 2) {
    throw UsageError("capacity matching needs q >= 2 (q=1 has a single code)");
  }
  if (is_power_of_two(q)) {
    std::uint64_t bits = 0;
    while ((std::uint64_t{1} << bits) < q) ++bits;
    return m * bits;
  }
  return static_cast<std::uint64_t>(
      std::ceil(static_cast<double>(m) * std::log2(static_cast<double>(q))));
}

std::uint64_t budget_hidden_units(std::uint64_t n_w, std::uint64_t n_v,
                                  std::uint64_t q, BudgetRounding rounding) {
  require_positive(n_w, "n_w");
  require_positive(n_v, "n_v");
  require_positive(q, "q");
  const std::uint64_t per_unit = n_v * q;
  std::uint64_t units = n_w / per_unit;
  if (rounding == BudgetRounding::kCeiling && n_w % per_unit != 0) ++units;
  return units == 0 ? 1 : units;
}

std::string_view to_string(MatchMode mode) {
  return mode == MatchMode::kCapacity ? "capacity" : "parameter";
}

MatchMode parse_match_mode(std::string_view text) {
  if (text == "capacity") return MatchMode::kCapacity;
  if (text == "param" || text == "parameter") return MatchMode::kParameter;
  throw UsageError("unknown match mode '" + std::string(text) +
                   "' (expected capacity or param)");
}

MatchReport capacity_match(std::uint64_t n, std::uint64_t m, std::uint64_t q) {
  MatchReport r;
  r.mode = MatchMode::kCapacity;
  r.n = n;
  r.m = m;
  r.q = q;
  require_positive(m, "m");
  r.m_prime = capacity_matched_mprime(m, q);
  if (n > 0) {
    r.gm_params = gm_param_count(n, m, q);
    r.gb_params = gb_param_count(n, r.m_prime);
  }
  r.gm_log2_codebook = static_cast<double>(m) * std::log2(static_cast<double>(q));
  r.gb_log2_codebook = static_cast<double>(r.m_prime);
  return r;
}

MatchReport parameter_match(std::uint64_t n_w, std::uint64_t n_v,
                            std::uint64_t q, BudgetRounding rounding) {
  MatchReport r;
  r.mode = MatchMode::kParameter;
  r.n = n_v;
  r.q = q;
  r.m = budget_hidden_units(n_w, n_v, q, rounding);
  r.m_prime = r.m * q;
  r.gm_params = gm_param_count(n_v, r.m, q);
  r.gb_params = gb_param_count(n_v, r.m_prime);
  r.gm_log2_codebook =
      static_cast<double>(r.m) * std::log2(static_cast<double>(q));
  r.gb_log2_codebook = static_cast<double>(r.m_prime);
  return r;
}

namespace {

// Counts that depend on n print as "-" when n is unknown (0).
std::string count_or_dash(const MatchReport& r, std::uint64_t value) {
  return r.n == 0 ? "-" : std::to_string(value);
}

}  // namespace

std::string format_match_table(const MatchReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "mode: %s\n"
                "%-6s %8s %10s %4s %12s %14s\n"
                "%-6s %8s %10llu %4llu %12s %14.4f\n"
                "%-6s %8s %10llu %4s %12s %14.4f\n",
                std::string(to_string(r.mode)).c_str(), "model", "visible",
                "hidden", "q", "params", "log2_codebook", "GM",
                count_or_dash(r, r.n).c_str(),
                static_cast<unsigned long long>(r.m),
                static_cast<unsigned long long>(r.q),
                count_or_dash(r, r.gm_params).c_str(), r.gm_log2_codebook, "GB",
                count_or_dash(r, r.n).c_str(),
                static_cast<unsigned long long>(r.m_prime), "2",
                count_or_dash(r, r.gb_params).c_str(), r.gb_log2_codebook);
  return buf;
}

std::string format_match_keyvalues(const MatchReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "mode=%s\nn=%s\nm=%llu\nq=%llu\ngm_params=%s\n"
                "gm_log2_codebook=%.17g\nm_prime=%llu\ngb_params=%s\n"
                "gb_log2_codebook=%.17g\n",
                std::string(to_string(r.mode)).c_str(),
                count_or_dash(r, r.n).c_str(),
                static_cast<unsigned long long>(r.m),
                static_cast<unsigned long long>(r.q),
                count_or_dash(r, r.gm_params).c_str(), r.gm_log2_codebook,
                static_cast<unsigned long long>(r.m_prime),
                count_or_dash(r, r.gb_params).c_str(), r.gb_log2_codebook);
  return buf;
}

}  // namespace gmrbm
