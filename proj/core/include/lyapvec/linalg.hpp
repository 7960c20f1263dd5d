#pragma once

#include <Eigen/Dense>

namespace lyapvec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct QrFactors {
  Matrix q;  // d x m, orthonormal columns
  Matrix r;  // m x m, upper triangular with positive diagonal
};

/// Thin QR with the positive-diagonal convention, which makes the factorization unique.
/// Throws Error(kRankCollapse) when a diagonal entry of R falls below `rank_floor`.
QrFactors qr_positive(const Matrix& a, double rank_floor = 1e-300);

/// Solves R X = B for upper-triangular R by back-substitution.
Matrix solve_upper(const Matrix& r, const Matrix& b);

/// max |A^T A - I|
double orthonormality_defect(const Matrix& a);

bool all_finite(const Matrix& a);

}  // namespace lyapvec
