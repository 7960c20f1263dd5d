#include "lyapvec/models.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "lyapvec/error.hpp"

namespace lyapvec::models {

namespace {

inline int wrap(int k, int n) { return ((k % n) + n) % n; }

void require_dimension(const ModelSpec& model, Eigen::Index rows, const char* where) {
  if (rows != model.dimension()) {
    std::ostringstream msg;
    msg << where << ": expected dimension " << model.dimension() << ", got " << rows;
    throw Error(ErrorCode::kDimensionMismatch, msg.str());
  }
}

// Writes f(x) into `out` (already sized).
void eval_field(const ModelSpec& model, const Vector& x, Vector& out) {
  const auto p = model.params();
  if (model.kind() == ModelKind::kLorenz63) {
    out(0) = p[0] * (x(1) - x(0));
    out(1) = x(0) * (p[1] - x(2)) - x(1);
    out(2) = x(0) * x(1) - p[2] * x(2);
    return;
  }
  const int n = model.dimension();
  const double forcing = p[0];
  for (int k = 0; k < n; ++k) {
    out(k) = (x(wrap(k + 1, n)) - x(wrap(k - 2, n))) * x(wrap(k - 1, n)) - x(k) + forcing;
  }
}

}  // namespace

// -----------------------------------------------------------------------------

std::string to_string(ModelKind kind) {
  return kind == ModelKind::kLorenz63 ? "l63" : "l96";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "l63" || name == "lorenz63") return ModelKind::kLorenz63;
  if (name == "l96" || name == "lorenz96") return ModelKind::kLorenz96;
  throw Error(ErrorCode::kConfig, "unknown model kind '" + name + "'");
}

ModelSpec::ModelSpec(ModelKind kind, int dimension, std::vector<double> params)
    : kind_(kind), dimension_(dimension), params_(std::move(params)) {
  for (double v : params_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "model parameters must be finite");
  }
  if (kind_ == ModelKind::kLorenz63) {
    if (dimension_ != 3 || params_.size() != 3) {
      throw Error(ErrorCode::kInvalidArgument, "Lorenz-63 needs dimension 3 and (sigma, rho, beta)");
    }
  } else {
    if (dimension_ < 4 || params_.size() != 1) {
      throw Error(ErrorCode::kInvalidArgument, "Lorenz-96 needs dimension >= 4 and a forcing F");
    }
  }
}

ModelSpec ModelSpec::lorenz63(double sigma, double rho, double beta) {
  return ModelSpec(ModelKind::kLorenz63, 3, {sigma, rho, beta});
}

ModelSpec ModelSpec::lorenz96(int dimension, double forcing) {
  return ModelSpec(ModelKind::kLorenz96, dimension, {forcing});
}

ModelSpec ModelSpec::from_parts(ModelKind kind, int dimension, std::vector<double> params) {
  return ModelSpec(kind, dimension, std::move(params));
}

double ModelSpec::jacobian_trace() const {
  if (kind_ == ModelKind::kLorenz63) return -(params_[0] + 1.0 + params_[2]);
  return -static_cast<double>(dimension_);
}

// -----------------------------------------------------------------------------

Vector vector_field(const ModelSpec& model, const Vector& x) {
  require_dimension(model, x.size(), "vector_field");
  if (!x.allFinite()) throw Error(ErrorCode::kNonFinite, "vector_field: non-finite state");
  Vector out(x.size());
  eval_field(model, x, out);
  return out;
}

Matrix jacobian(const ModelSpec& model, const Vector& x) {
  require_dimension(model, x.size(), "jacobian");
  const int n = model.dimension();
  Matrix jac = Matrix::Zero(n, n);
  const auto p = model.params();
  if (model.kind() == ModelKind::kLorenz63) {
    jac << -p[0], p[0], 0.0,
           p[1] - x(2), -1.0, -x(0),
           x(1), x(0), -p[2];
    return jac;
  }
  for (int k = 0; k < n; ++k) {
    jac(k, wrap(k - 2, n)) = -x(wrap(k - 1, n));
    jac(k, wrap(k - 1, n)) = x(wrap(k + 1, n)) - x(wrap(k - 2, n));
    jac(k, k) = -1.0;
    jac(k, wrap(k + 1, n)) = x(wrap(k - 1, n));
  }
  return jac;
}

void apply_jacobian(const ModelSpec& model, const Vector& x, const Matrix& b, Matrix& out) {
  const int n = model.dimension();
  out.resize(b.rows(), b.cols());
  if (model.kind() == ModelKind::kLorenz63) {
    const auto p = model.params();
    out.row(0) = p[0] * (b.row(1) - b.row(0));
    out.row(1) = (p[1] - x(2)) * b.row(0) - b.row(1) - x(0) * b.row(2);
    out.row(2) = x(1) * b.row(0) + x(0) * b.row(1) - p[2] * b.row(2);
    return;
  }
  for (int k = 0; k < n; ++k) {
    const int km2 = wrap(k - 2, n);
    const int km1 = wrap(k - 1, n);
    const int kp1 = wrap(k + 1, n);
    out.row(k) = x(km1) * (b.row(kp1) - b.row(km2)) + (x(kp1) - x(km2)) * b.row(km1) - b.row(k);
  }
}

Vector rk4_step(const ModelSpec& model, const Vector& x, double dt) {
  require_dimension(model, x.size(), "rk4_step");
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "rk4_step: dt must be positive");
  const Eigen::Index d = x.size();
  Vector k1(d), k2(d), k3(d), k4(d);
  eval_field(model, x, k1);
  eval_field(model, x + 0.5 * dt * k1, k2);
  eval_field(model, x + 0.5 * dt * k2, k3);
  eval_field(model, x + dt * k3, k4);
  Vector next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) throw Error(ErrorCode::kBlowUp, "rk4_step: non-finite state (step too large?)");
  return next;
}

// -----------------------------------------------------------------------------

int steps_per_interval(double interval, double solver_step) {
  if (!(solver_step > 0.0) || !(interval > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "time steps must be positive");
  }
  const double ratio = interval / solver_step;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded) {
    std::ostringstream msg;
    msg << "interval " << interval << " is not an integer multiple of solver step " << solver_step;
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
  return static_cast<int>(rounded);
}

Trajectory::Trajectory(ModelSpec model, double t0, double solver_step, double save_interval,
                       Matrix states, bool dynamical)
    : model_(std::move(model)),
      t0_(t0),
      solver_step_(solver_step),
      save_interval_(save_interval),
      steps_per_save_(steps_per_interval(save_interval, solver_step)),
      states_(std::move(states)),
      dynamical_(dynamical) {
  require_dimension(model_, states_.rows(), "Trajectory");
  if (states_.cols() == 0) throw Error(ErrorCode::kInvalidArgument, "Trajectory: no states");
  if (!states_.allFinite()) throw Error(ErrorCode::kNonFinite, "Trajectory: non-finite state");
}

Trajectory Trajectory::window(std::size_t first, std::size_t count) const {
  if (count == 0 || first + count > size()) {
    throw Error(ErrorCode::kInvalidArgument, "Trajectory::window out of range");
  }
  return Trajectory(model_, time(first), solver_step_, save_interval_,
                    states_.middleCols(static_cast<Eigen::Index>(first),
                                       static_cast<Eigen::Index>(count)),
                    dynamical_);
}

Trajectory integrate_trajectory(const ModelSpec& model, const Vector& x0, double spinup,
                                double total, double solver_step, double save_interval) {
  require_dimension(model, x0.size(), "integrate_trajectory");
  const int per_save = steps_per_interval(save_interval, solver_step);
  if (total < save_interval * (1.0 - 1e-12)) {
    throw Error(ErrorCode::kInvalidArgument, "integrate_trajectory: total time shorter than one save interval");
  }
  const auto n_saves = static_cast<Eigen::Index>(std::llround(total / save_interval));
  const auto n_spinup = spinup > 0.0 ? std::llround(spinup / solver_step) : 0LL;

  Vector x = x0;
  for (long long s = 0; s < n_spinup; ++s) x = rk4_step(model, x, solver_step);

  Matrix states(model.dimension(), n_saves + 1);
  states.col(0) = x;
  for (Eigen::Index j = 1; j <= n_saves; ++j) {
    for (int s = 0; s < per_save; ++s) x = rk4_step(model, x, solver_step);
    states.col(j) = x;
  }
  return Trajectory(model, 0.0, solver_step, save_interval, std::move(states));
}

}  // namespace lyapvec::models
