#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "lyapvec/linalg.hpp"

namespace lyapvec {

using Rng = std::mt19937_64;

/// 64-bit FNV-1a of a component name.
std::uint64_t fnv1a(std::string_view text);

/// Seed of an independent stream: splitmix64(master ^ fnv1a(component) + replicate * golden).
/// Streams are addressed by name, so adding a component never shifts another one's draws.
std::uint64_t stream_seed(std::uint64_t master, std::string_view component,
                          std::uint64_t replicate = 0);

inline Rng make_rng(std::uint64_t master, std::string_view component, std::uint64_t replicate = 0) {
  return Rng(stream_seed(master, component, replicate));
}

/// rows x cols matrix of independent N(0, 1) draws, filled column by column.
Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng);

}  // namespace lyapvec
