#include "lyapvec/linalg.hpp"

#include <cmath>
#include <sstream>

#include "lyapvec/error.hpp"

namespace lyapvec {

QrFactors qr_positive(const Matrix& a, double rank_floor) {
  const Eigen::Index d = a.rows();
  const Eigen::Index m = a.cols();
  if (m == 0 || m > d) {
    throw Error(ErrorCode::kInvalidArgument, "qr_positive: need 1 <= columns <= rows");
  }
  Eigen::HouseholderQR<Matrix> qr(a);
  QrFactors out;
  out.q = qr.householderQ() * Matrix::Identity(d, m);
  out.r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (out.r(i, i) < 0.0) {
      out.r.row(i) *= -1.0;
      out.q.col(i) *= -1.0;
    }
    if (!(std::abs(out.r(i, i)) > rank_floor)) {
      std::ostringstream msg;
      msg << "qr_positive: rank collapse at column " << i << " (R_ii = " << out.r(i, i) << ")";
      throw Error(ErrorCode::kRankCollapse, msg.str());
    }
  }
  return out;
}

Matrix solve_upper(const Matrix& r, const Matrix& b) {
  if (r.rows() != r.cols() || r.rows() != b.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "solve_upper: shape mismatch");
  }
  return r.triangularView<Eigen::Upper>().solve(b);
}

double orthonormality_defect(const Matrix& a) {
  const Matrix gram = a.transpose() * a;
  return (gram - Matrix::Identity(a.cols(), a.cols())).cwiseAbs().maxCoeff();
}

bool all_finite(const Matrix& a) { return a.allFinite(); }

}  // namespace lyapvec
