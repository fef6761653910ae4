#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace ghr {

// All randomness is drawn from std::mt19937_64 engines. Distributions are
// implemented here rather than taken from <random> so that sampled values do
// not depend on the standard library vendor.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent seed for a named sub-stream ("data", "init",
// "shuffle", ...) and an optional index.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index = 0);

Rng make_rng(std::uint64_t master, std::string_view stream, std::uint64_t index = 0);

// Uniform in [0, 1) with 53 random bits.
double uniform01(Rng& rng);
double uniform(Rng& rng, double lo, double hi);
// Uniform integer in [lo, hi] inclusive, by rejection.
std::uint64_t uniform_int(Rng& rng, std::uint64_t lo, std::uint64_t hi);
double standard_normal(Rng& rng);

// Fisher-Yates over 0..n-1.
std::vector<std::uint32_t> random_permutation(Rng& rng, std::size_t n);

}  // namespace ghr
