#include "gmrbm/random.hpp"

namespace gmrbm {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view name) {
  // FNV-1a over the name, folded into the root.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return mix64(root ^ mix64(h));
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed),
      stream_(stream),
      engine_(mix64(seed ^ mix64(stream ^ 0x5851f42d4c957f2dULL))) {}

RandomStream RandomStream::child(std::uint64_t index) const {
  return RandomStream(mix64(seed_ ^ mix64(stream_)), index);
}

}  // namespace gmrbm
