#include "lyapvec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lyapvec/error.hpp"
#include "lyapvec/random.hpp"

namespace lyapvec::metrics {

namespace {

inline double degrees_from_cosine(double c) {
  return std::acos(std::clamp(c, 0.0, 1.0)) * 180.0 / std::numbers::pi;
}

void require_aligned(const ginelli::LyapunovSet& a, const ginelli::LyapunovSet& b) {
  if (a.size() != b.size() || a.dimension() != b.dimension()) {
    throw Error(ErrorCode::kMisaligned, "Lyapunov sets differ in frame count or dimension");
  }
}

}  // namespace

double acute_angle(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) throw Error(ErrorCode::kDimensionMismatch, "acute_angle: size mismatch");
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw Error(ErrorCode::kInvalidArgument, "acute_angle: zero vector");
  return degrees_from_cosine(std::abs(u.dot(v)) / (nu * nv));
}

std::vector<double> principal_angles(const Matrix& p, const Matrix& q) {
  if (p.cols() == 0 || q.cols() == 0) throw Error(ErrorCode::kInvalidArgument, "principal_angles: empty basis");
  if (p.rows() != q.rows()) throw Error(ErrorCode::kDimensionMismatch, "principal_angles: ambient dimensions differ");
  // `wide` spans the larger subspace; the angles are those of each direction of `narrow`.
  const bool p_wider = p.cols() >= q.cols();
  const Matrix wide = qr_positive(p_wider ? p : q).q;
  const Matrix narrow = qr_positive(p_wider ? q : p).q;

  const Matrix overlap = wide.transpose() * narrow;
  const Vector cosines = Eigen::JacobiSVD<Matrix>(overlap).singularValues();  // nonincreasing
  const Vector sines = Eigen::JacobiSVD<Matrix>(narrow - wide * overlap).singularValues();

  // arccos loses accuracy near 0 degrees, arcsin near 90; take whichever is well conditioned.
  const auto k = static_cast<std::size_t>(narrow.cols());
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double c = cosines(static_cast<Eigen::Index>(i));
    const double s = sines(static_cast<Eigen::Index>(k - 1 - i));
    out[i] = c * c >= 0.5 ? std::asin(std::clamp(s, 0.0, 1.0)) * 180.0 / std::numbers::pi
                          : degrees_from_cosine(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Matrix random_orthonormal_subspace(int d, int k, std::uint64_t seed) {
  if (k < 1 || k > d) throw Error(ErrorCode::kInvalidArgument, "random subspace: need 1 <= k <= d");
  Rng rng(seed);
  return qr_positive(standard_normal(d, k, rng)).q;
}

double percentile(std::span<const double> values, double pct) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "percentile of an empty series");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = std::clamp(pct, 0.0, 100.0) / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

AngleSummary summarize(std::span<const double> series) {
  return {percentile(series, 50.0), percentile(series, 25.0), percentile(series, 75.0)};
}

Matrix subspace_from_blvs(const ginelli::LyapunovSet& lyap, std::size_t j, int k) {
  if (j >= lyap.size()) throw Error(ErrorCode::kInvalidArgument, "subspace_from_blvs: frame out of range");
  if (k < 1 || k > lyap.vectors()) throw Error(ErrorCode::kInvalidArgument, "subspace_from_blvs: k out of range");
  return lyap.blvs[j].leftCols(k);
}

AngleSeries vector_angle_series(const ginelli::LyapunovSet& reference,
                                const ginelli::LyapunovSet& candidate, VectorKind kind, int index) {
  require_aligned(reference, candidate);
  if (index < 0 || index >= std::min(reference.vectors(), candidate.vectors())) {
    throw Error(ErrorCode::kInvalidArgument, "vector index out of range");
  }
  const auto& a = kind == VectorKind::kBlv ? reference.blvs : reference.clvs;
  const auto& b = kind == VectorKind::kBlv ? candidate.blvs : candidate.clvs;
  AngleSeries out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = acute_angle(a[j].col(index), b[j].col(index));
  return out;
}

std::vector<AngleSeries> principal_angle_series(const ginelli::LyapunovSet& reference,
                                                const ginelli::LyapunovSet& candidate, int k) {
  require_aligned(reference, candidate);
  std::vector<AngleSeries> out(static_cast<std::size_t>(k), AngleSeries(reference.size()));
  for (std::size_t j = 0; j < reference.size(); ++j) {
    const auto angles = principal_angles(subspace_from_blvs(reference, j, k), subspace_from_blvs(candidate, j, k));
    for (std::size_t i = 0; i < angles.size(); ++i) out[i][j] = angles[i];
  }
  return out;
}

}  // namespace lyapvec::metrics
