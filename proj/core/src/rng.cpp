#include "pinn/rng.hpp"

namespace pinn {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng Rng::derive(std::uint64_t seed, std::string_view stream, std::uint64_t index) {
  // FNV-1a over the label, then two splitmix rounds folding in seed and index.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::uint64_t state = seed ^ h;
  splitmix64(state);
  state ^= index * 0x9e3779b97f4a7c15ULL;
  std::uint64_t derived = splitmix64(state);
  return Rng(derived);
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  // Rejection sampling to avoid modulo bias.
  if (n == 0) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

Point Rng::uniform_in(const DomainBox& box) {
  Point p(box.lower.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = uniform(box.lower[i], box.upper[i]);
  return p;
}

}  // namespace pinn
