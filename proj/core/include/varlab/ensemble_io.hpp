#pragma once

#include "varlab/ensemble.hpp"

#include <filesystem>
#include <span>

namespace varlab {

/// 16-byte magic at the start of every binary ensemble file.
inline constexpr char kEnsembleMagic[16] = {'V', 'A', 'R', 'L', 'A', 'B', '-', 'E',
                                            'N', 'S', 'E', 'M', 'B', 'L', 'E', '1'};

/// Binary container, little-endian:
///   magic[16] | u64 M | u64 n_paths | u64 dim | u64 seed | u64 steps K |
///   u64 flags (bit0 constant diffusion, bit1 weights) |
///   f64 states[n][K+1][d] | f64 drifts[n][K][d] | f64 diffusions | f64 weights[n]
void write_ensemble(const PathEnsemble& ensemble, const std::filesystem::path& file);
PathEnsemble read_ensemble(const std::filesystem::path& file);

/// CSV with columns path,step,time,x0..x{d-1} for the selected paths.
void write_paths_csv(const PathEnsemble& ensemble, std::span<const std::size_t> paths,
                     const std::filesystem::path& file);

}  // namespace varlab
