#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace gmrbm {

// n + m q (1 + n): b, then c, then W.
std::uint64_t gm_param_count(std::uint64_t n, std::uint64_t m, std::uint64_t q);

// n + m' + n m'
std::uint64_t gb_param_count(std::uint64_t n, std::uint64_t m_prime);

// ceil(m log2 q): binary hidden units whose codebook 2^m' covers q^m.
// Throws UsageError for q < 2.
std::uint64_t capacity_matched_mprime(std::uint64_t m, std::uint64_t q);

enum class BudgetRounding {
  kTable,    // floor, matching the published q -> hidden-unit table
  kCeiling,
};

// Hidden slots that spend a weight budget n_w over templates of length n_v:
// n_w / (n_v q), rounded per `rounding`, never below 1.
std::uint64_t budget_hidden_units(std::uint64_t n_w, std::uint64_t n_v,
                                  std::uint64_t q,
                                  BudgetRounding rounding = BudgetRounding::kTable);

enum class MatchMode { kCapacity, kParameter };

std::string_view to_string(MatchMode mode);
MatchMode parse_match_mode(std::string_view text);

struct MatchReport {
  MatchMode mode = MatchMode::kCapacity;
  std::uint64_t n = 0;
  std::uint64_t m = 0;
  std::uint64_t q = 0;
  std::uint64_t gm_params = 0;
  double gm_log2_codebook = 0.0;
  std::uint64_t m_prime = 0;
  std::uint64_t gb_params = 0;
  double gb_log2_codebook = 0.0;
};

// GM model (n, m, q) against a GB baseline with m' = ceil(m log2 q).
// n = 0 leaves the parameter counts unset; they format as "-".
MatchReport capacity_match(std::uint64_t n, std::uint64_t m, std::uint64_t q);

// GM model sized by budget_hidden_units(n_w, n_v, q) against a GB baseline
// with m' = m q, which makes the two total parameter counts equal.
MatchReport parameter_match(std::uint64_t n_w, std::uint64_t n_v,
                            std::uint64_t q,
                            BudgetRounding rounding = BudgetRounding::kTable);

// Human-readable aligned table.
std::string format_match_table(const MatchReport& report);
// One `key=value` per line.
std::string format_match_keyvalues(const MatchReport& report);

}  // namespace gmrbm
