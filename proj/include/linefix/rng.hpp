#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace linefix {

using Rng = std::mt19937_64;

// Stream derivation: every (seed, stream, salt) triple gets an independent
// generator, so per-line work can run in any order.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t salt = 0);
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0,
             std::uint64_t salt = 0);

// Portable draws; std:: distributions differ across standard libraries.
double uniform01(Rng& rng);
std::size_t uniform_index(Rng& rng, std::size_t n);
bool bernoulli(Rng& rng, double p);

}  // namespace linefix
