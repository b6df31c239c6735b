#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gmrbm/model.hpp"

namespace gmrbm {

// Vector file: first line `<count> <dim>`, then `count` lines of `dim`
// whitespace-separated decimals. Values are written with 17 significant
// digits, so a write/read cycle is value-exact.
struct VectorFile {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::vector<Vector> rows;
};

// Throws DataError carrying the 1-based line number of the first problem.
VectorFile parse_vectors(std::istream& in);
VectorFile read_vectors(const std::filesystem::path& path);

void write_vectors(std::ostream& out, std::span<const Vector> rows);
void write_vectors(const std::filesystem::path& path,
                   std::span<const Vector> rows);

// Checkpoint: header `GMRBM1 n m q has_sigma2`, then b (n values),
// c (m*q, slot-major), W (q*m*n, layout (k,j,i)), then sigma2 (n) when
// flagged. Loading either returns a complete model or throws DataError.
inline constexpr const char* kCheckpointMagic = "GMRBM1";

void write_checkpoint(std::ostream& out, const ModelParams& params);
void save_checkpoint(const ModelParams& params,
                     const std::filesystem::path& path);
ModelParams parse_checkpoint(std::istream& in);
ModelParams load_checkpoint(const std::filesystem::path& path);

// Diagonal-covariance Gaussian mixture.
struct GmmComponent {
  double weight = 0.0;
  Vector mean;
  Vector variance;
};

struct GmmSpec {
  std::vector<GmmComponent> components;

  std::size_t dim() const;
  // Weights positive and summing to 1 within 1e-12, variances positive,
  // consistent dimensions. Throws UsageError.
  void validate() const;
};

// Component by weight, then a diagonal Gaussian draw. Deterministic in seed.
std::vector<Vector> sample_gmm(const GmmSpec& spec, std::size_t count,
                               std::uint64_t seed,
                               std::vector<std::size_t>* labels = nullptr);

// Formats with 17 significant digits.
std::string format_double(double x);

}  // namespace gmrbm
