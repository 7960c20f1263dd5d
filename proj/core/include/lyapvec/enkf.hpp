#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "lyapvec/linalg.hpp"
#include "lyapvec/models.hpp"
#include "lyapvec/random.hpp"

namespace lyapvec::enkf {

/// y = H x + eta, eta ~ N(0, noise_std^2 I_p), every `obs_interval` time units.
struct ObservationModel {
  Matrix h;
  double noise_std = 1.0;
  double obs_interval = 0.0;

  /// Unit-selector rows for the given state indices.
  static ObservationModel select(int dimension, const std::vector<int>& indices, double noise_std,
                                 double obs_interval);
  /// Selects the even state indices 0, 2, 4, ...
  static ObservationModel even_indices(int dimension, double noise_std, double obs_interval);

  int observed() const { return static_cast<int>(h.rows()); }
  void validate(int dimension) const;
};

struct ObservationSet {
  ObservationModel model;
  double t0 = 0.0;
  /// Column k is the observation at t0 + k * obs_interval.
  Matrix values;
  std::uint64_t seed = 0;

  std::size_t size() const { return static_cast<std::size_t>(values.cols()); }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * model.obs_interval; }
};

/// Observes every `obs_interval` (a multiple of the save interval) starting at the first sample.
ObservationSet generate_observations(const models::Trajectory& truth, const ObservationModel& obs_model,
                                     std::uint64_t seed);

struct EnkfConfig {
  int ensemble_size = 25;
  Vector initial_offset;           // empty means zero
  double initial_cov_scale = 1.0;  // initial ensemble covariance = scale * I
  double localization_radius = std::numeric_limits<double>::infinity();
  double inflation = 1.0;
  int burn_in = 0;                 // analysis steps dropped from the pseudo-trajectory
  std::uint64_t seed = 0;

  void validate(int dimension) const;
};

/// Fifth-order piecewise-rational compactly supported taper with half-width `radius` (support 2r).
double gaspari_cohn(double distance, double radius);

/// Grid distance, cyclic for Lorenz-96.
double grid_distance(const models::ModelSpec& model, int i, int k);

/// d x d taper matrix; all ones when the radius is infinite.
Matrix localization_matrix(const models::ModelSpec& model, double radius);

/// Integrates every member (column) independently over `steps` solver steps.
Matrix forecast_step(const models::ModelSpec& model, Matrix ensemble, int steps, double dt);

/// K = (rho L.P) H^T (H (rho L.P) H^T + mu^2 I)^{-1} from the ensemble sample covariance P.
/// An empty `localization` means no tapering.
Matrix kalman_gain(const Matrix& ensemble, const ObservationModel& obs_model, const Matrix& localization,
                   double inflation);

/// Stochastic (perturbed-observation) EnKF analysis. Anomalies are scaled by sqrt(inflation) before
/// the update, so the sample covariance is inflation * P.
Matrix analysis_update(const Matrix& ensemble, const Vector& y, const ObservationModel& obs_model,
                       const Matrix& localization, double inflation, Rng& rng);

struct RmseSeries {
  Vector per_step;
  double time_mean = 0.0;
};

/// sqrt(|x_est - x_true|^2 / d) per column, and its mean.
RmseSeries rmse(const Matrix& estimate, const Matrix& truth);

/// sqrt of the component-averaged temporal variance of the trajectory.
double climatological_spread(const models::Trajectory& trajectory);

struct FilterRun {
  /// Analysis means after burn-in, as a non-dynamical trajectory.
  models::Trajectory analysis;
  /// Full-length diagnostics, one entry per analysis step (burn-in included).
  Vector spread;
  Vector rmse;
  double mean_rmse = 0.0;  // over the post-burn-in window
  double mean_spread = 0.0;
  bool diverged = false;
  std::size_t first_truth_index = 0;  // truth sample aligned with analysis.state(0)
  EnkfConfig config;
};

/// Twin experiment: forecast/analysis cycles over every observation, scored against the truth.
/// With `assimilate == false` the ensemble runs free (baseline).
FilterRun run_filter(const models::Trajectory& truth, const ObservationSet& obs, const EnkfConfig& config,
                     bool assimilate = true);

}  // namespace lyapvec::enkf
