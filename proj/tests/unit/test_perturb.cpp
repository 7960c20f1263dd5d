#include <gtest/gtest.h>

#include <cmath>

#include "lyapvec/perturb.hpp"
#include "support.hpp"

using namespace lyapvec;
using lyapvec::testing::expect_error;
using models::ModelSpec;

namespace {

const models::Trajectory& truth() {
  static const auto t = models::integrate_trajectory(ModelSpec::lorenz63(), Vector::Ones(3), 10.0, 100.0, 0.002, 0.01);
  return t;
}

}  // namespace

TEST(Perturb, ZeroSigmaIsIdentity) {
  const auto out = perturb::perturb_trajectory(truth(), {0.0, 3});
  EXPECT_EQ(out.states(), truth().states());
  EXPECT_EQ(out.model(), truth().model());
  EXPECT_DOUBLE_EQ(out.t0(), truth().t0());
}

TEST(Perturb, MarkedNonDynamical) {
  EXPECT_TRUE(truth().dynamical());
  EXPECT_FALSE(perturb::perturb_trajectory(truth(), {0.2, 3}).dynamical());
}

TEST(Perturb, CovarianceMoments) {
  const double sigma = 0.7;
  const Matrix eps = perturb::perturb_trajectory(truth(), {sigma, 17}).states() - truth().states();
  ASSERT_GE(eps.cols(), 10000);
  const Matrix centered = eps.colwise() - eps.rowwise().mean();
  const Matrix cov = centered * centered.transpose() / static_cast<double>(eps.cols() - 1);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(cov(i, i), sigma * sigma, 0.05 * sigma * sigma);
    for (int j = 0; j < i; ++j) EXPECT_LT(std::abs(cov(i, j)), 0.05 * sigma * sigma);
  }
}

TEST(Perturb, IndependentAcrossTime) {
  const Matrix eps = perturb::perturb_trajectory(truth(), {1.0, 23}).states() - truth().states();
  for (int i = 0; i < 3; ++i) {
    const Vector e = eps.row(i).transpose();
    const Vector c = e.array() - e.mean();
    const double lag1 = c.head(c.size() - 1).dot(c.tail(c.size() - 1)) / c.squaredNorm();
    EXPECT_LT(std::abs(lag1), 0.05);
  }
}

TEST(Perturb, DeterministicUnderSeed) {
  const auto a = perturb::perturb_trajectory(truth(), {0.3, 5});
  const auto b = perturb::perturb_trajectory(truth(), {0.3, 5});
  const auto c = perturb::perturb_trajectory(truth(), {0.3, 6});
  EXPECT_EQ(a.states(), b.states());
  EXPECT_NE(a.states(), c.states());
}

TEST(Perturb, RejectsNegativeSigma) {
  expect_error(ErrorCode::kInvalidArgument, [] { perturb::perturb_trajectory(truth(), {-0.1, 1}); });
  expect_error(ErrorCode::kInvalidArgument, [] { perturb::perturb_trajectory(truth(), {std::nan(""), 1}); });
}
