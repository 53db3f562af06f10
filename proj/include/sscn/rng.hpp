#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sscn {

/// The one generator family used everywhere: a 64-bit Mersenne twister whose
/// state is expanded from (seed, stream) through std::seed_seq. Distinct
/// stream ids give statistically independent sequences, which is how Monte
/// Carlo loops fan out without sharing state.
using Rng = std::mt19937_64;

inline constexpr std::string_view kRngFamily = "mt19937_64/seed_seq(seed_lo,seed_hi,stream_lo,stream_hi)";

Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

// Uniform on [lo, hi).
double uniform(Rng& rng, double lo, double hi);

}  // namespace sscn
