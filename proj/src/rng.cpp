#include "linefix/rng.hpp"

namespace linefix {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t salt) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ salt);
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t salt) {
  return Rng(mix_seed(seed, stream, salt));
}

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  const unsigned __int128 wide =
      static_cast<unsigned __int128>(rng()) * static_cast<std::uint64_t>(n);
  return static_cast<std::size_t>(wide >> 64);
}

bool bernoulli(Rng& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform01(rng) < p;
}

}  // namespace linefix
