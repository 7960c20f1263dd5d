#include "lyapvec/enkf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lyapvec/error.hpp"

namespace lyapvec::enkf {

namespace {

constexpr double kDivergenceFactor = 5.0;
constexpr int kDivergenceSteps = 100;

}  // namespace

// -----------------------------------------------------------------------------

ObservationModel ObservationModel::select(int dimension, const std::vector<int>& indices,
                                          double noise_std, double obs_interval) {
  ObservationModel m;
  m.h = Matrix::Zero(static_cast<Eigen::Index>(indices.size()), dimension);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] < 0 || indices[r] >= dimension) {
      throw Error(ErrorCode::kInvalidArgument, "observation index out of range");
    }
    m.h(static_cast<Eigen::Index>(r), indices[r]) = 1.0;
  }
  m.noise_std = noise_std;
  m.obs_interval = obs_interval;
  m.validate(dimension);
  return m;
}

ObservationModel ObservationModel::even_indices(int dimension, double noise_std, double obs_interval) {
  std::vector<int> idx;
  for (int k = 0; k < dimension; k += 2) idx.push_back(k);
  return select(dimension, idx, noise_std, obs_interval);
}

void ObservationModel::validate(int dimension) const {
  if (h.cols() != dimension || h.rows() < 1 || h.rows() > dimension) {
    throw Error(ErrorCode::kDimensionMismatch, "observation operator must be p x d with 1 <= p <= d");
  }
  if (!(noise_std > 0.0) || !std::isfinite(noise_std)) {
    throw Error(ErrorCode::kInvalidArgument, "observation noise std must be positive");
  }
  if (!(obs_interval > 0.0)) throw Error(ErrorCode::kInvalidArgument, "observation interval must be positive");
}

ObservationSet generate_observations(const models::Trajectory& truth, const ObservationModel& obs_model,
                                     std::uint64_t seed) {
  obs_model.validate(truth.model().dimension());
  const int stride = models::steps_per_interval(obs_model.obs_interval, truth.save_interval());
  const auto count = static_cast<Eigen::Index>((truth.size() - 1) / static_cast<std::size_t>(stride) + 1);

  Rng rng(seed);
  const Matrix noise = standard_normal(obs_model.observed(), count, rng);
  ObservationSet out;
  out.model = obs_model;
  out.t0 = truth.t0();
  out.seed = seed;
  out.values.resize(obs_model.observed(), count);
  for (Eigen::Index k = 0; k < count; ++k) {
    out.values.col(k) = obs_model.h * truth.states().col(k * stride) + obs_model.noise_std * noise.col(k);
  }
  return out;
}

void EnkfConfig::validate(int dimension) const {
  if (ensemble_size < 2) throw Error(ErrorCode::kConfig, "ensemble size must be >= 2");
  if (initial_offset.size() != 0 && initial_offset.size() != dimension) {
    throw Error(ErrorCode::kConfig, "initial offset must have the model dimension");
  }
  if (!(initial_cov_scale >= 0.0)) throw Error(ErrorCode::kConfig, "initial covariance scale must be >= 0");
  if (!(localization_radius > 0.0)) throw Error(ErrorCode::kConfig, "localization radius must be > 0 (inf disables)");
  if (!(inflation >= 1.0)) throw Error(ErrorCode::kConfig, "inflation factor must be >= 1");
  if (burn_in < 0) throw Error(ErrorCode::kConfig, "burn-in must be >= 0");
}

// -----------------------------------------------------------------------------

double gaspari_cohn(double distance, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::kInvalidArgument, "gaspari_cohn: radius must be positive");
  if (std::isinf(radius)) return 1.0;
  const double z = std::abs(distance) / radius;
  if (z <= 1.0) {
    return (((-0.25 * z + 0.5) * z + 0.625) * z - 5.0 / 3.0) * z * z + 1.0;
  }
  if (z < 2.0) {
    return ((((z / 12.0 - 0.5) * z + 0.625) * z + 5.0 / 3.0) * z - 5.0) * z + 4.0 - 2.0 / (3.0 * z);
  }
  return 0.0;
}

double grid_distance(const models::ModelSpec& model, int i, int k) {
  const int diff = std::abs(i - k);
  if (model.kind() == models::ModelKind::kLorenz96) return std::min(diff, model.dimension() - diff);
  return diff;
}

Matrix localization_matrix(const models::ModelSpec& model, double radius) {
  const int d = model.dimension();
  Matrix taper(d, d);
  for (int i = 0; i < d; ++i) {
    for (int k = 0; k < d; ++k) taper(i, k) = gaspari_cohn(grid_distance(model, i, k), radius);
  }
  return taper;
}

Matrix forecast_step(const models::ModelSpec& model, Matrix ensemble, int steps, double dt) {
  for (Eigen::Index i = 0; i < ensemble.cols(); ++i) {
    Vector x = ensemble.col(i);
    for (int s = 0; s < steps; ++s) x = models::rk4_step(model, x, dt);
    ensemble.col(i) = x;
  }
  return ensemble;
}

Matrix kalman_gain(const Matrix& ensemble, const ObservationModel& obs_model, const Matrix& localization,
                   double inflation) {
  const Eigen::Index n = ensemble.cols();
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "kalman_gain: need at least 2 members");
  const Vector mean = ensemble.rowwise().mean();
  const Matrix anomalies = ensemble.colwise() - mean;
  Matrix cov = inflation * (anomalies * anomalies.transpose()) / static_cast<double>(n - 1);
  if (localization.size() != 0) cov = cov.cwiseProduct(localization);

  const Matrix& h = obs_model.h;
  const Matrix pht = cov * h.transpose();
  Matrix innovation = h * pht;
  innovation.diagonal().array() += obs_model.noise_std * obs_model.noise_std;
  Eigen::LLT<Matrix> llt(innovation);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularSystem, "kalman_gain: innovation covariance is not positive definite");
  }
  return llt.solve(pht.transpose()).transpose();
}

Matrix analysis_update(const Matrix& ensemble, const Vector& y, const ObservationModel& obs_model,
                       const Matrix& localization, double inflation, Rng& rng) {
  if (!ensemble.allFinite()) throw Error(ErrorCode::kNonFinite, "analysis_update: non-finite ensemble");
  if (y.size() != obs_model.observed()) throw Error(ErrorCode::kDimensionMismatch, "analysis_update: observation size");

  Matrix forecast = ensemble;
  if (inflation != 1.0) {
    const Vector mean = forecast.rowwise().mean();
    forecast = ((forecast.colwise() - mean) * std::sqrt(inflation)).colwise() + mean;
  }
  const Matrix gain = kalman_gain(forecast, obs_model, localization, 1.0);
  Matrix perturbed = obs_model.noise_std * standard_normal(obs_model.observed(), forecast.cols(), rng);
  perturbed.colwise() += y;
  return forecast + gain * (perturbed - obs_model.h * forecast);
}

// -----------------------------------------------------------------------------

RmseSeries rmse(const Matrix& estimate, const Matrix& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols() || estimate.cols() == 0) {
    throw Error(ErrorCode::kMisaligned, "rmse: sequences are not aligned");
  }
  RmseSeries out;
  out.per_step = ((estimate - truth).colwise().squaredNorm() / static_cast<double>(truth.rows()))
                     .array().sqrt().transpose();
  out.time_mean = out.per_step.mean();
  return out;
}

double climatological_spread(const models::Trajectory& trajectory) {
  const Matrix& s = trajectory.states();
  const Matrix centered = s.colwise() - s.rowwise().mean();
  return std::sqrt(centered.squaredNorm() / static_cast<double>(s.size()));
}

FilterRun run_filter(const models::Trajectory& truth, const ObservationSet& obs, const EnkfConfig& config,
                     bool assimilate) {
  const auto& model = truth.model();
  const int d = model.dimension();
  config.validate(d);
  obs.model.validate(d);
  const int stride = models::steps_per_interval(obs.model.obs_interval, truth.save_interval());
  const int solver_steps = models::steps_per_interval(obs.model.obs_interval, truth.solver_step());
  const std::size_t n_steps = obs.size();
  if ((n_steps - 1) * static_cast<std::size_t>(stride) >= truth.size() || std::abs(obs.t0 - truth.t0()) > 1e-9) {
    throw Error(ErrorCode::kMisaligned, "run_filter: observations are not aligned with the truth");
  }
  if (static_cast<std::size_t>(config.burn_in) >= n_steps) {
    throw Error(ErrorCode::kConfig, "run_filter: burn-in covers every assimilation step");
  }

  Rng rng(config.seed);
  const Vector offset = config.initial_offset.size() == 0 ? Vector::Zero(d) : config.initial_offset;
  Matrix ensemble = std::sqrt(config.initial_cov_scale) * standard_normal(d, config.ensemble_size, rng);
  ensemble.colwise() += truth.state(0) + offset;

  const Matrix taper = std::isinf(config.localization_radius)
                           ? Matrix() : localization_matrix(model, config.localization_radius);
  const double climate = climatological_spread(truth);

  Matrix means(d, static_cast<Eigen::Index>(n_steps));
  Matrix truth_at_obs(d, static_cast<Eigen::Index>(n_steps));
  FilterRun run{models::Trajectory(model, truth.t0(), truth.solver_step(), obs.model.obs_interval,
                                   truth.states().leftCols(1), false),
                Vector(n_steps), Vector(n_steps), 0.0, 0.0, false, 0, config};
  int over_threshold = 0;
  for (std::size_t k = 0; k < n_steps; ++k) {
    if (k > 0) ensemble = forecast_step(model, std::move(ensemble), solver_steps, truth.solver_step());
    if (assimilate) {
      ensemble = analysis_update(ensemble, obs.values.col(static_cast<Eigen::Index>(k)), obs.model, taper,
                                 config.inflation, rng);
    }
    const auto col = static_cast<Eigen::Index>(k);
    means.col(col) = ensemble.rowwise().mean();
    truth_at_obs.col(col) = truth.states().col(col * stride);
    const Matrix anomalies = ensemble.colwise() - means.col(col);
    run.spread(col) = std::sqrt(anomalies.squaredNorm() / (d * static_cast<double>(ensemble.cols() - 1)));
    run.rmse(col) = (means.col(col) - truth_at_obs.col(col)).norm() / std::sqrt(static_cast<double>(d));

    over_threshold = run.rmse(col) > kDivergenceFactor * climate ? over_threshold + 1 : 0;
    if (over_threshold >= kDivergenceSteps) run.diverged = true;
  }

  const auto first = static_cast<Eigen::Index>(config.burn_in);
  const Eigen::Index kept = static_cast<Eigen::Index>(n_steps) - first;
  run.first_truth_index = static_cast<std::size_t>(first) * static_cast<std::size_t>(stride);
  run.analysis = models::Trajectory(model, obs.time(static_cast<std::size_t>(first)), truth.solver_step(),
                                    obs.model.obs_interval, means.rightCols(kept), false);
  run.mean_rmse = rmse(means.rightCols(kept), truth_at_obs.rightCols(kept)).time_mean;
  run.mean_spread = run.spread.tail(kept).mean();
  return run;
}

}  // namespace lyapvec::enkf
