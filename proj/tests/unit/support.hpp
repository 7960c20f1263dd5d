#pragma once

#include <gtest/gtest.h>

#include <cstdint>
#include <functional>

#include "lyapvec/error.hpp"
#include "lyapvec/models.hpp"
#include "lyapvec/random.hpp"

namespace lyapvec::testing {

inline void expect_error(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected Error(" << to_string(code) << ")";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

// A state on (or very near) the attractor.
inline Vector attractor_point(const models::ModelSpec& model, std::uint64_t seed, double spinup = 20.0) {
  Rng rng(seed);
  Vector x = standard_normal(model.dimension(), 1, rng);
  const double dt = 0.005;
  for (int i = 0; i < static_cast<int>(spinup / dt); ++i) x = models::rk4_step(model, x, dt);
  return x;
}

}  // namespace lyapvec::testing
