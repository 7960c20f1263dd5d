#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lyapvec/linalg.hpp"
#include "lyapvec/models.hpp"
#include "lyapvec/random.hpp"

namespace lyapvec::ginelli {

/// QR every `qr_interval` saved steps; n_forward, n_sampling and n_backward QR steps cover
/// [0, I], [I, F] and [F, E].
struct GinelliSchedule {
  int qr_interval = 1;
  int n_forward = 1;
  int n_sampling = 1;
  int n_backward = 1;
  double save_interval = 0.01;

  /// Converts interval lengths (time units) into QR counts; each must be a multiple of l * dt_save.
  static GinelliSchedule from_lengths(double forward, double sampling, double backward,
                                      int qr_interval, double save_interval);

  int total_qr() const { return n_forward + n_sampling + n_backward; }
  std::size_t total_gaps() const { return static_cast<std::size_t>(total_qr()) * qr_interval; }
  /// Trajectory samples needed to cover [0, E].
  std::size_t required_samples() const { return total_gaps() + 1; }
  double qr_period() const { return qr_interval * save_interval; }

  void validate() const;
};

/// Forward-sweep storage: BLVs B_q on [I, F) and growth factors R_{q, q+1} on [I, E).
struct QrHistory {
  GinelliSchedule schedule;
  std::vector<Matrix> blvs;
  std::vector<Matrix> growth;
};

struct ForwardDiagnostics {
  /// Largest per-column rotation (degrees) of the frame between consecutive QR steps over the
  /// last 10% of the forward transient.
  double blv_drift_deg = 0.0;
  /// Largest log R_ii over a single QR interval.
  double max_log_growth = 0.0;
  std::vector<std::string> warnings;
};

struct ForwardResult {
  QrHistory history;
  Vector exponents;
  ForwardDiagnostics diagnostics;
};

/// Alternates tangent propagation over l saved gaps with positive-diagonal QR.
ForwardResult forward_sweep(const models::Trajectory& trajectory, const Matrix& initial_frame,
                            const GinelliSchedule& schedule);

/// First m standard basis vectors of R^d.
Matrix standard_frame(int dimension, int m);

/// Seed for the backward sweep: strictly-upper entries N(0,1), diagonal |N(0,1)| + 0.1.
Matrix generic_upper_triangular(int m, Rng& rng);

struct BackwardDiagnostics {
  double max_condition_estimate = 0.0;
  std::vector<std::string> warnings;
};

/// Backward iteration U_q = normalize(R_q^{-1} U_{q+1}) from the seed at E down to I; returns U on
/// [I, F) in forward time order.
std::vector<Matrix> backward_sweep(const QrHistory& history, const Matrix& seed,
                                   BackwardDiagnostics* diagnostics = nullptr);

/// BLVs, CLVs and coefficients at the QR sample times in [I, F).
struct LyapunovSet {
  Vector exponents;
  std::vector<Matrix> blvs;
  std::vector<Matrix> coefficients;
  std::vector<Matrix> clvs;
  std::size_t first_sample = 0;  // trajectory sample index of the first frame (time I)
  int qr_interval = 1;
  double save_interval = 0.0;
  double t_first = 0.0;

  std::size_t size() const { return blvs.size(); }
  int dimension() const { return blvs.empty() ? 0 : static_cast<int>(blvs.front().rows()); }
  int vectors() const { return static_cast<int>(exponents.size()); }
  std::size_t sample_index(std::size_t k) const { return first_sample + k * qr_interval; }
  double time(std::size_t k) const { return t_first + static_cast<double>(k) * qr_interval * save_interval; }
};

/// C_q = B_q U_q; each CLV is sign-fixed so its largest-magnitude component is positive.
LyapunovSet assemble_clvs(const QrHistory& history, std::vector<Matrix> coefficients,
                          const Vector& exponents, double t0 = 0.0);

/// Forward sweep from the standard frame, backward sweep from `seed`, CLV assembly.
LyapunovSet compute_lyapunov(const models::Trajectory& trajectory, const GinelliSchedule& schedule,
                             int vectors, const Matrix& seed);

/// Finite-time growth rate of each CLV under the tangent propagator over [I, F].
Vector clv_growth_rates(const LyapunovSet& lyap, const models::Trajectory& trajectory);

/// |cos(M C_q e_i, C_{q+1} e_i)| for vector i (row) and consecutive frame pair q (column).
Matrix covariance_cosines(const LyapunovSet& lyap, const models::Trajectory& trajectory);

/// Kaplan-Yorke dimension; 0 for an all-negative spectrum.
double kaplan_yorke(const Vector& exponents);

}  // namespace lyapvec::ginelli
