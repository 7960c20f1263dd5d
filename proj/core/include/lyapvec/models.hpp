#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lyapvec/linalg.hpp"

namespace lyapvec::models {

enum class ModelKind { kLorenz63 = 1, kLorenz96 = 2 };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

/// Lorenz-63 (sigma, rho, beta) or Lorenz-96 (forcing F) with a fixed dimension.
class ModelSpec {
 public:
  static ModelSpec lorenz63(double sigma = 10.0, double rho = 28.0, double beta = 8.0 / 3.0);
  static ModelSpec lorenz96(int dimension, double forcing = 8.0);
  /// Rebuilds a spec from its serialized parts, validating invariants.
  static ModelSpec from_parts(ModelKind kind, int dimension, std::vector<double> params);

  ModelKind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  std::span<const double> params() const { return params_; }

  /// trace(J(x)); constant in x for both models.
  double jacobian_trace() const;

  bool operator==(const ModelSpec&) const = default;

 private:
  ModelSpec(ModelKind kind, int dimension, std::vector<double> params);

  ModelKind kind_;
  int dimension_;
  std::vector<double> params_;
};

Vector vector_field(const ModelSpec& model, const Vector& x);

/// Dense analytic Jacobian J_ij = df_i/dx_j.
Matrix jacobian(const ModelSpec& model, const Vector& x);

/// J(x) * B without forming J for Lorenz-96 (four nonzeros per row).
void apply_jacobian(const ModelSpec& model, const Vector& x, const Matrix& b, Matrix& out);

/// Classical four-stage Runge-Kutta step. Throws Error(kBlowUp) on a non-finite result.
Vector rk4_step(const ModelSpec& model, const Vector& x, double dt);

/// Uniformly sampled state sequence. Column j of `states()` is the state at t0 + j * save_interval.
class Trajectory {
 public:
  Trajectory(ModelSpec model, double t0, double solver_step, double save_interval, Matrix states,
             bool dynamical = true);

  const ModelSpec& model() const { return model_; }
  double t0() const { return t0_; }
  double solver_step() const { return solver_step_; }
  double save_interval() const { return save_interval_; }
  /// Solver steps per saved interval.
  int steps_per_save() const { return steps_per_save_; }
  const Matrix& states() const { return states_; }
  std::size_t size() const { return static_cast<std::size_t>(states_.cols()); }
  Vector state(std::size_t j) const { return states_.col(static_cast<Eigen::Index>(j)); }
  double time(std::size_t j) const { return t0_ + static_cast<double>(j) * save_interval_; }
  /// False for pseudo-trajectories (perturbed states, analysis means) that do not solve the ODE.
  bool dynamical() const { return dynamical_; }

  /// Samples [first, first + count).
  Trajectory window(std::size_t first, std::size_t count) const;

 private:
  ModelSpec model_;
  double t0_;
  double solver_step_;
  double save_interval_;
  int steps_per_save_;
  Matrix states_;
  bool dynamical_;
};

/// Exact integer ratio save_interval / solver_step; throws when it is not an integer multiple.
int steps_per_interval(double interval, double solver_step);

/// Integrates `spinup` time units (discarded), then saves the state every `save_interval`
/// over `total` time units; the first saved state is the post-spinup state.
Trajectory integrate_trajectory(const ModelSpec& model, const Vector& x0, double spinup,
                                double total, double solver_step, double save_interval);

}  // namespace lyapvec::models
