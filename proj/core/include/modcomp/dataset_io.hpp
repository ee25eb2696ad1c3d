#pragma once

// Binary dataset container ("MCDS", little-endian):
//
//   magic[4] version:u32 flags:u8
//   K:u32 s:f64 alpha:f64 sigma_g:f64 seed:u64
//   2 x { d:u32 gamma:f64 rho:f64 mu:f64 C_big:f64 c_small:f64 }
//   n:u64
//   n x { y:u32 suff1:u8 suff2:u8 x1:f64[d1] x2:f64[d2] }
//   if flags & kWithProvenance:
//     2 x dictionary:f64[d_r * K] (column-major)
//     n x { for r in 1,2: z:f64[K] spike:f64[K] gaussian:f64[d_r] }

#include <cstdint>
#include <filesystem>

#include "modcomp/synth_data.hpp"

namespace modcomp {

inline constexpr std::uint32_t kDatasetFormatVersion = 1;
inline constexpr std::uint8_t kWithProvenance = 0x1;

/// With `debug` the latent codes, noise and dictionaries are written too;
/// it requires a dataset that carries them.
void write_dataset(const std::filesystem::path& path, const Dataset& data, bool debug);
Dataset read_dataset(const std::filesystem::path& path);

/// One row per sample: y,suff1,suff2,x1_0..x1_{d1-1},x2_0..x2_{d2-1}.
void export_csv(const std::filesystem::path& path, const Dataset& data);

}  // namespace modcomp
