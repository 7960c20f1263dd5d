#include "lyapvec/ginelli.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include "lyapvec/error.hpp"
#include "lyapvec/tangent.hpp"

namespace lyapvec::ginelli {

namespace {

constexpr double kRankFloor = 1e-300;
constexpr double kGrowthWarning = 30.0;
constexpr double kConditionWarning = 1e14;

double column_angle_deg(const Matrix& a, const Matrix& b, Eigen::Index i) {
  const double c = std::abs(a.col(i).dot(b.col(i))) / (a.col(i).norm() * b.col(i).norm());
  return std::acos(std::clamp(c, 0.0, 1.0)) * 180.0 / std::numbers::pi;
}

}  // namespace

// -----------------------------------------------------------------------------

GinelliSchedule GinelliSchedule::from_lengths(double forward, double sampling, double backward,
                                              int qr_interval, double save_interval) {
  if (qr_interval < 1) throw Error(ErrorCode::kConfig, "QR interval must be >= 1");
  const double period = qr_interval * save_interval;
  GinelliSchedule s;
  s.qr_interval = qr_interval;
  s.save_interval = save_interval;
  const auto count = [&](const char* name, double length) {
    try {
      return models::steps_per_interval(length, period);
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, std::string("Ginelli schedule, ") + name + " length: " + e.what());
    }
  };
  s.n_forward = count("forward", forward);
  s.n_sampling = count("sampling", sampling);
  s.n_backward = count("backward", backward);
  s.validate();
  return s;
}

void GinelliSchedule::validate() const {
  if (qr_interval < 1 || n_forward < 1 || n_sampling < 1 || n_backward < 1) {
    throw Error(ErrorCode::kConfig, "Ginelli schedule: every QR count and the QR interval must be >= 1");
  }
  if (!(save_interval > 0.0)) throw Error(ErrorCode::kConfig, "Ginelli schedule: save interval must be positive");
}

Matrix standard_frame(int dimension, int m) {
  if (m < 1 || m > dimension) throw Error(ErrorCode::kInvalidArgument, "need 1 <= m <= dimension");
  return Matrix::Identity(dimension, m);
}

Matrix generic_upper_triangular(int m, Rng& rng) {
  Matrix u = standard_normal(m, m, rng);
  for (int j = 0; j < m; ++j) {
    for (int i = j + 1; i < m; ++i) u(i, j) = 0.0;
    u(j, j) = std::abs(u(j, j)) + 0.1;
  }
  return u;
}

// -----------------------------------------------------------------------------

ForwardResult forward_sweep(const models::Trajectory& trajectory, const Matrix& initial_frame,
                            const GinelliSchedule& schedule) {
  schedule.validate();
  const int d = trajectory.model().dimension();
  if (initial_frame.rows() != d || initial_frame.cols() < 1 || initial_frame.cols() > d) {
    throw Error(ErrorCode::kDimensionMismatch, "forward_sweep: initial frame must be d x m with m <= d");
  }
  if (trajectory.size() < schedule.required_samples()) {
    std::ostringstream msg;
    msg << "forward_sweep: trajectory has " << trajectory.size() << " samples, schedule needs "
        << schedule.required_samples();
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
  if (std::abs(trajectory.save_interval() - schedule.save_interval) >
      1e-12 * schedule.save_interval) {
    throw Error(ErrorCode::kMisaligned, "forward_sweep: schedule and trajectory save intervals differ");
  }

  const Eigen::Index m = initial_frame.cols();
  const auto l = static_cast<std::size_t>(schedule.qr_interval);
  const int drift_from = schedule.n_forward - std::max(1, schedule.n_forward / 10);

  ForwardResult result;
  result.history.schedule = schedule;
  result.history.blvs.reserve(static_cast<std::size_t>(schedule.n_sampling));
  result.history.growth.reserve(static_cast<std::size_t>(schedule.n_sampling + schedule.n_backward));
  Vector log_sum = Vector::Zero(m);

  Matrix frame = qr_positive(initial_frame, kRankFloor).q;
  for (int q = 0; q < schedule.total_qr(); ++q) {
    if (q >= schedule.n_forward && q < schedule.n_forward + schedule.n_sampling) {
      result.history.blvs.push_back(frame);
    }
    Matrix evolved = tangent::propagate_along(trajectory, static_cast<std::size_t>(q) * l, l, frame);
    QrFactors qr = qr_positive(evolved, kRankFloor);

    const Vector logs = qr.r.diagonal().array().log();
    result.diagnostics.max_log_growth = std::max(result.diagnostics.max_log_growth, logs.maxCoeff());
    if (q >= drift_from && q < schedule.n_forward) {
      for (Eigen::Index i = 0; i < m; ++i) {
        result.diagnostics.blv_drift_deg =
            std::max(result.diagnostics.blv_drift_deg, column_angle_deg(frame, qr.q, i));
      }
    }
    if (q >= schedule.n_forward) {
      log_sum += logs;
      result.history.growth.push_back(std::move(qr.r));
    }
    frame = std::move(qr.q);
  }

  if (result.diagnostics.max_log_growth > kGrowthWarning) {
    std::ostringstream msg;
    msg << "log R_ii reached " << result.diagnostics.max_log_growth
        << " within one QR interval; consider a smaller QR interval";
    result.diagnostics.warnings.push_back(msg.str());
  }
  const double span = (schedule.n_sampling + schedule.n_backward) * schedule.qr_period();
  result.exponents = log_sum / span;
  return result;
}

// -----------------------------------------------------------------------------

std::vector<Matrix> backward_sweep(const QrHistory& history, const Matrix& seed,
                                   BackwardDiagnostics* diagnostics) {
  const auto& s = history.schedule;
  const auto n_growth = static_cast<std::size_t>(s.n_sampling + s.n_backward);
  if (history.growth.size() != n_growth || history.blvs.size() != static_cast<std::size_t>(s.n_sampling)) {
    throw Error(ErrorCode::kMisaligned, "backward_sweep: history does not match its schedule");
  }
  const Eigen::Index m = history.growth.front().rows();
  if (seed.rows() != m || seed.cols() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "backward_sweep: seed must be m x m");
  }
  if (!seed.isUpperTriangular(0.0) || (seed.diagonal().array() == 0.0).any()) {
    throw Error(ErrorCode::kInvalidArgument, "backward_sweep: seed must be upper triangular and full rank");
  }

  BackwardDiagnostics local;
  std::vector<Matrix> out(static_cast<std::size_t>(s.n_sampling));
  Matrix coeffs = seed;
  for (std::size_t k = n_growth; k-- > 0;) {
    const Matrix& r = history.growth[k];
    const Vector diag = r.diagonal().cwiseAbs();
    local.max_condition_estimate = std::max(local.max_condition_estimate, diag.maxCoeff() / diag.minCoeff());

    coeffs = solve_upper(r, coeffs);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double norm = coeffs.col(i).norm();
      if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw Error(ErrorCode::kRankCollapse, "backward_sweep: coefficient column collapsed");
      }
      coeffs.col(i) /= norm;
    }
    if (k < out.size()) out[k] = coeffs;
  }
  if (local.max_condition_estimate > kConditionWarning) {
    std::ostringstream msg;
    msg << "ill-conditioned growth factor (condition estimate " << local.max_condition_estimate << ")";
    local.warnings.push_back(msg.str());
  }
  if (diagnostics != nullptr) *diagnostics = std::move(local);
  return out;
}

// -----------------------------------------------------------------------------

LyapunovSet assemble_clvs(const QrHistory& history, std::vector<Matrix> coefficients,
                          const Vector& exponents, double t0) {
  if (coefficients.size() != history.blvs.size()) {
    throw Error(ErrorCode::kMisaligned, "assemble_clvs: BLV and coefficient sequences differ in length");
  }
  const auto& s = history.schedule;
  LyapunovSet set;
  set.exponents = exponents;
  set.first_sample = static_cast<std::size_t>(s.n_forward) * s.qr_interval;
  set.qr_interval = s.qr_interval;
  set.save_interval = s.save_interval;
  set.t_first = t0 + static_cast<double>(set.first_sample) * s.save_interval;
  set.blvs = history.blvs;
  set.clvs.reserve(coefficients.size());
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    Matrix& u = coefficients[k];
    if (u.rows() != history.blvs[k].cols() || u.cols() != u.rows()) {
      throw Error(ErrorCode::kMisaligned, "assemble_clvs: coefficient shape mismatch");
    }
    Matrix c = history.blvs[k] * u;
    for (Eigen::Index i = 0; i < c.cols(); ++i) {
      Eigen::Index arg = 0;
      c.col(i).cwiseAbs().maxCoeff(&arg);
      if (c(arg, i) < 0.0) {
        c.col(i) *= -1.0;
        u.col(i) *= -1.0;
      }
    }
    set.clvs.push_back(std::move(c));
  }
  set.coefficients = std::move(coefficients);
  return set;
}

LyapunovSet compute_lyapunov(const models::Trajectory& trajectory, const GinelliSchedule& schedule,
                             int vectors, const Matrix& seed) {
  const ForwardResult fwd =
      forward_sweep(trajectory, standard_frame(trajectory.model().dimension(), vectors), schedule);
  std::vector<Matrix> coeffs = backward_sweep(fwd.history, seed);
  return assemble_clvs(fwd.history, std::move(coeffs), fwd.exponents, trajectory.t0());
}

// -----------------------------------------------------------------------------

Vector clv_growth_rates(const LyapunovSet& lyap, const models::Trajectory& trajectory) {
  if (lyap.size() == 0) throw Error(ErrorCode::kInvalidArgument, "clv_growth_rates: empty set");
  const auto l = static_cast<std::size_t>(lyap.qr_interval);
  Vector log_sum = Vector::Zero(lyap.vectors());
  for (std::size_t k = 0; k < lyap.size(); ++k) {
    const Matrix evolved = tangent::propagate_along(trajectory, lyap.sample_index(k), l, lyap.clvs[k]);
    log_sum += evolved.colwise().norm().transpose().array().log().matrix();
  }
  return log_sum / (static_cast<double>(lyap.size()) * l * lyap.save_interval);
}

Matrix covariance_cosines(const LyapunovSet& lyap, const models::Trajectory& trajectory) {
  if (lyap.size() < 2) throw Error(ErrorCode::kInvalidArgument, "covariance_cosines: need >= 2 frames");
  const auto l = static_cast<std::size_t>(lyap.qr_interval);
  Matrix out(lyap.vectors(), static_cast<Eigen::Index>(lyap.size() - 1));
  for (std::size_t k = 0; k + 1 < lyap.size(); ++k) {
    const Matrix evolved = tangent::propagate_along(trajectory, lyap.sample_index(k), l, lyap.clvs[k]);
    const Matrix& next = lyap.clvs[k + 1];
    for (Eigen::Index i = 0; i < evolved.cols(); ++i) {
      out(i, static_cast<Eigen::Index>(k)) =
          std::abs(evolved.col(i).dot(next.col(i))) / (evolved.col(i).norm() * next.col(i).norm());
    }
  }
  return out;
}

double kaplan_yorke(const Vector& exponents) {
  if (exponents.size() == 0) throw Error(ErrorCode::kInvalidArgument, "kaplan_yorke: empty spectrum");
  if (exponents(0) < 0.0) return 0.0;
  double cumulative = 0.0;
  for (Eigen::Index j = 0; j < exponents.size(); ++j) {
    const double next = cumulative + exponents(j);
    if (next < 0.0) return static_cast<double>(j) + cumulative / std::abs(exponents(j));
    cumulative = next;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "kaplan_yorke: cumulative sum never turns negative (spectrum is not dissipative)");
}

}  // namespace lyapvec::ginelli
