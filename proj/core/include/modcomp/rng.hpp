#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace modcomp {

using Rng = std::mt19937_64;

/// Mixes a base seed with a purpose label into an independent 64-bit seed.
/// Streams for different labels (e.g. "data", "init:joint") never share state,
/// so adding a consumer of one stream leaves every other stream untouched.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

/// A generator seeded from derive_seed(seed, label).
Rng make_stream(std::uint64_t seed, std::string_view label);

}  // namespace modcomp
