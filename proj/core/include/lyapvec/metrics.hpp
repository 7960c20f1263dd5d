#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lyapvec/ginelli.hpp"
#include "lyapvec/linalg.hpp"

namespace lyapvec::metrics {

/// Angles in degrees, one per sample time.
using AngleSeries = std::vector<double>;

struct AngleSummary {
  double median = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
};

/// arccos(|u.v| / (|u||v|)) in degrees; sign-blind.
double acute_angle(const Vector& u, const Vector& v);

/// Principal angles (degrees, nondecreasing) between span(P) and span(Q). Inputs are
/// re-orthonormalized first.
std::vector<double> principal_angles(const Matrix& p, const Matrix& q);

/// Haar-distributed k-dimensional subspace of R^d (QR of a Gaussian matrix).
Matrix random_orthonormal_subspace(int d, int k, std::uint64_t seed);

/// Percentile in [0, 100] by linear interpolation between order statistics.
double percentile(std::span<const double> values, double pct);

/// Median and quartiles with linear interpolation.
AngleSummary summarize(std::span<const double> series);

/// Leading k BLVs at frame j.
Matrix subspace_from_blvs(const ginelli::LyapunovSet& lyap, std::size_t j, int k);

enum class VectorKind { kBlv, kClv };

/// Per-frame angle between vector `index` of two sets, frames matched by position.
AngleSeries vector_angle_series(const ginelli::LyapunovSet& reference,
                                const ginelli::LyapunovSet& candidate, VectorKind kind, int index);

/// Per-frame principal angles between the leading-k BLV subspaces; entry [i] is the series of the
/// (i+1)-th principal angle.
std::vector<AngleSeries> principal_angle_series(const ginelli::LyapunovSet& reference,
                                                const ginelli::LyapunovSet& candidate, int k);

}  // namespace lyapvec::metrics
