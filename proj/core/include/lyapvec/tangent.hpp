#pragma once

#include <cstddef>

#include "lyapvec/linalg.hpp"
#include "lyapvec/models.hpp"

namespace lyapvec::tangent {

struct TangentResult {
  Vector state;    // x after `steps` solver steps
  Matrix columns;  // M * B
};

/// Joint RK4 integration of (dx/dt = f(x), dB/dt = J(x) B) from (x, B) over `steps` steps of `dt`.
TangentResult propagate_tangent(const models::ModelSpec& model, const Vector& x, const Matrix& b,
                                int steps, double dt);

/// Tangent propagator M started at x over `steps` steps; propagate_tangent with B = I.
Matrix finite_time_propagator(const models::ModelSpec& model, const Vector& x, int steps, double dt);

/// Applies M_{j, j+gaps} to B along a stored trajectory. The state is restarted from the stored
/// sample at every saved gap, so the trajectory need not be a solution of the model (analysis
/// means, perturbed states).
Matrix propagate_along(const models::Trajectory& trajectory, std::size_t j, std::size_t gaps,
                       Matrix b);

/// M_{j, j+gaps} along a stored trajectory.
Matrix propagator_along(const models::Trajectory& trajectory, std::size_t j, std::size_t gaps);

}  // namespace lyapvec::tangent
