#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gmrbm {

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Seed of the named sub-stream `name` under a root seed ("train", "chains",
// "recall", "synth", ...).
std::uint64_t derive_seed(std::uint64_t root, std::string_view name);

// A deterministic random stream identified by (seed, stream). Two streams
// with the same identity produce identical sequences; distinct identities
// are seeded through independent splitmix64 outputs.
class RandomStream {
 public:
  RandomStream() : RandomStream(0, 0) {}
  RandomStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }
  double normal() { return normal_(engine_); }
  std::uint64_t next_u64() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

  // Stream `index` in the family rooted at this stream's identity.
  RandomStream child(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace gmrbm
