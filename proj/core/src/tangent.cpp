#include "lyapvec/tangent.hpp"

#include "lyapvec/error.hpp"

namespace lyapvec::tangent {

namespace {

// Reusable stage buffers for the joint (x, B) RK4 step.
struct JointStepper {
  const models::ModelSpec& model;
  Vector kx1, kx2, kx3, kx4, xs;
  Matrix kb1, kb2, kb3, kb4, bs;

  JointStepper(const models::ModelSpec& m, Eigen::Index d, Eigen::Index cols)
      : model(m), kx1(d), kx2(d), kx3(d), kx4(d), xs(d),
        kb1(d, cols), kb2(d, cols), kb3(d, cols), kb4(d, cols), bs(d, cols) {}

  void field(const Vector& x, Vector& out) { out = models::vector_field(model, x); }

  void step(Vector& x, Matrix& b, double dt) {
    field(x, kx1);
    models::apply_jacobian(model, x, b, kb1);

    xs = x + 0.5 * dt * kx1;
    bs = b + 0.5 * dt * kb1;
    field(xs, kx2);
    models::apply_jacobian(model, xs, bs, kb2);

    xs = x + 0.5 * dt * kx2;
    bs = b + 0.5 * dt * kb2;
    field(xs, kx3);
    models::apply_jacobian(model, xs, bs, kb3);

    xs = x + dt * kx3;
    bs = b + dt * kb3;
    field(xs, kx4);
    models::apply_jacobian(model, xs, bs, kb4);

    x += (dt / 6.0) * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4);
    b += (dt / 6.0) * (kb1 + 2.0 * kb2 + 2.0 * kb3 + kb4);
  }
};

}  // namespace

TangentResult propagate_tangent(const models::ModelSpec& model, const Vector& x, const Matrix& b,
                                int steps, double dt) {
  if (x.size() != model.dimension() || b.rows() != model.dimension()) {
    throw Error(ErrorCode::kDimensionMismatch, "propagate_tangent: dimension mismatch");
  }
  if (steps < 0 || !(dt > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "propagate_tangent: need steps >= 0 and dt > 0");
  }
  TangentResult out{x, b};
  JointStepper stepper(model, x.size(), b.cols());
  for (int s = 0; s < steps; ++s) stepper.step(out.state, out.columns, dt);
  if (!out.state.allFinite() || !out.columns.allFinite()) {
    throw Error(ErrorCode::kBlowUp, "propagate_tangent: non-finite result");
  }
  return out;
}

Matrix finite_time_propagator(const models::ModelSpec& model, const Vector& x, int steps, double dt) {
  const int d = model.dimension();
  return propagate_tangent(model, x, Matrix::Identity(d, d), steps, dt).columns;
}

Matrix propagate_along(const models::Trajectory& trajectory, std::size_t j, std::size_t gaps,
                       Matrix b) {
  if (j + gaps >= trajectory.size()) {
    throw Error(ErrorCode::kInvalidArgument, "propagate_along: segment runs past the trajectory");
  }
  const auto& model = trajectory.model();
  if (b.rows() != model.dimension()) {
    throw Error(ErrorCode::kDimensionMismatch, "propagate_along: dimension mismatch");
  }
  const int steps = trajectory.steps_per_save();
  const double dt = trajectory.solver_step();
  JointStepper stepper(model, model.dimension(), b.cols());
  Vector x;
  for (std::size_t g = 0; g < gaps; ++g) {
    x = trajectory.state(j + g);
    for (int s = 0; s < steps; ++s) stepper.step(x, b, dt);
  }
  if (!b.allFinite()) throw Error(ErrorCode::kBlowUp, "propagate_along: non-finite tangent vectors");
  return b;
}

Matrix propagator_along(const models::Trajectory& trajectory, std::size_t j, std::size_t gaps) {
  const int d = trajectory.model().dimension();
  return propagate_along(trajectory, j, gaps, Matrix::Identity(d, d));
}

}  // namespace lyapvec::tangent
