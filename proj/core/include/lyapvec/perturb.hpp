#pragma once

#include <cstdint>

#include "lyapvec/models.hpp"

namespace lyapvec::perturb {

struct PerturbationSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// x~_j = x_j + eps_j, eps_j ~ N(0, sigma^2 I) independent across samples. The result is marked
/// non-dynamical.
models::Trajectory perturb_trajectory(const models::Trajectory& truth, const PerturbationSpec& spec);

}  // namespace lyapvec::perturb
