#include <gtest/gtest.h>

#include <cmath>

#include "lyapvec/models.hpp"
#include "support.hpp"

using namespace lyapvec;
using lyapvec::testing::attractor_point;
using lyapvec::testing::expect_error;
using models::ModelSpec;

TEST(ModelSpec, Invariants) {
  EXPECT_EQ(ModelSpec::lorenz63().dimension(), 3);
  EXPECT_EQ(ModelSpec::lorenz96(40).dimension(), 40);
  expect_error(ErrorCode::kInvalidArgument, [] { ModelSpec::lorenz96(3); });
  expect_error(ErrorCode::kInvalidArgument, [] { ModelSpec::from_parts(models::ModelKind::kLorenz63, 4, {10, 28, 8.0 / 3}); });
  expect_error(ErrorCode::kNonFinite, [] { ModelSpec::lorenz96(10, std::nan("")); });
  EXPECT_EQ(models::parse_model_kind("l96"), models::ModelKind::kLorenz96);
  expect_error(ErrorCode::kConfig, [] { models::parse_model_kind("l84"); });
}

TEST(VectorField, Lorenz63OriginIsFixed) {
  EXPECT_EQ(models::vector_field(ModelSpec::lorenz63(), Vector::Zero(3)), Vector::Zero(3));
}

TEST(VectorField, Lorenz96UniformForcingIsFixed) {
  const auto m = ModelSpec::lorenz96(40, 8.0);
  EXPECT_EQ(models::vector_field(m, Vector::Constant(40, 8.0)), Vector::Zero(40));
}

TEST(VectorField, Lorenz63HandEvaluation) {
  const Vector f = models::vector_field(ModelSpec::lorenz63(10, 28, 8.0 / 3.0), Vector::Ones(3));
  EXPECT_DOUBLE_EQ(f(0), 0.0);
  EXPECT_DOUBLE_EQ(f(1), 26.0);
  EXPECT_DOUBLE_EQ(f(2), -5.0 / 3.0);
}

TEST(VectorField, Lorenz96HandEvaluation) {
  // dX_k/dt = (X_{k+1} - X_{k-2}) X_{k-1} - X_k + F with cyclic indices
  const auto m = ModelSpec::lorenz96(5, 8.0);
  Vector x(5);
  x << 1, 2, 3, 4, 5;
  const Vector f = models::vector_field(m, x);
  Vector expected(5);
  for (int k = 0; k < 5; ++k) {
    const auto at = [&](int i) { return x((i % 5 + 5) % 5); };
    expected(k) = (at(k + 1) - at(k - 2)) * at(k - 1) - at(k) + 8.0;
  }
  EXPECT_EQ(f, expected);
  EXPECT_DOUBLE_EQ(f(0), (2 - 4) * 5 - 1 + 8.0);
}

TEST(VectorField, Errors) {
  expect_error(ErrorCode::kDimensionMismatch, [] { models::vector_field(ModelSpec::lorenz63(), Vector::Zero(4)); });
  expect_error(ErrorCode::kNonFinite, [] {
    models::vector_field(ModelSpec::lorenz63(), Vector::Constant(3, std::numeric_limits<double>::infinity()));
  });
  expect_error(ErrorCode::kDimensionMismatch, [] { models::jacobian(ModelSpec::lorenz96(10), Vector::Zero(9)); });
}

TEST(Jacobian, TraceIsConstant) {
  const auto l63 = ModelSpec::lorenz63();
  const auto l96 = ModelSpec::lorenz96(10);
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(s);
    const Vector x3 = 10.0 * standard_normal(3, 1, rng);
    const Vector x10 = 5.0 * standard_normal(10, 1, rng);
    EXPECT_NEAR(models::jacobian(l63, x3).trace(), -41.0 / 3.0, 1e-13);
    EXPECT_NEAR(models::jacobian(l96, x10).trace(), -10.0, 1e-13);
  }
  EXPECT_NEAR(l63.jacobian_trace(), -41.0 / 3.0, 1e-15);
  EXPECT_EQ(l96.jacobian_trace(), -10.0);
}

TEST(Jacobian, Lorenz96RowsHaveFourNonzeros) {
  const auto m = ModelSpec::lorenz96(12);
  const Vector x = attractor_point(m, 3);
  const Matrix j = models::jacobian(m, x);
  for (int r = 0; r < 12; ++r) EXPECT_EQ((j.row(r).array() != 0.0).count(), 4) << "row " << r;
}

TEST(Jacobian, MatchesCentralDifferences) {
  const double h = 1e-5;
  for (const auto& model : {ModelSpec::lorenz63(), ModelSpec::lorenz96(40)}) {
    for (std::uint64_t s = 0; s < 100; ++s) {
      const Vector x = attractor_point(model, s, 2.0);
      const Matrix j = models::jacobian(model, x);
      for (int k = 0; k < model.dimension(); ++k) {
        Vector e = Vector::Zero(model.dimension());
        e(k) = h;
        const Vector fd = (models::vector_field(model, x + e) - models::vector_field(model, x - e)) / (2 * h);
        EXPECT_LT((fd - j.col(k)).norm(), 1e-6 * std::max(1.0, j.col(k).norm()));
      }
    }
  }
}

TEST(Jacobian, ApplyMatchesDense) {
  const auto m = ModelSpec::lorenz96(20);
  Rng rng(5);
  const Vector x = attractor_point(m, 9);
  const Matrix b = standard_normal(20, 7, rng);
  Matrix out(20, 7);
  models::apply_jacobian(m, x, b, out);
  EXPECT_LT((out - models::jacobian(m, x) * b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Rk4, FixedPointsArePreserved) {
  const auto l63 = ModelSpec::lorenz63();
  for (double dt : {1e-4, 0.01, 0.1}) {
    EXPECT_EQ(models::rk4_step(l63, Vector::Zero(3), dt), Vector::Zero(3));
    const auto l96 = ModelSpec::lorenz96(40, 8.0);
    EXPECT_EQ(models::rk4_step(l96, Vector::Constant(40, 8.0), dt), Vector::Constant(40, 8.0));
  }
  // nontrivial L63 equilibrium
  const double c = std::sqrt(8.0 / 3.0 * 27.0);
  Vector q(3);
  q << c, c, 27.0;
  EXPECT_LT((models::rk4_step(l63, q, 0.01) - q).norm(), 1e-12);
}

TEST(Rk4, FourthOrderConvergence) {
  const auto m = ModelSpec::lorenz63();
  const Vector x0 = attractor_point(m, 1);
  const auto run = [&](double dt) {
    Vector x = x0;
    const int n = static_cast<int>(std::lround(0.1 / dt));
    for (int i = 0; i < n; ++i) x = models::rk4_step(m, x, dt);
    return x;
  };
  const Vector ref = run(1e-5);
  const double e1 = (run(0.01) - ref).norm();
  const double e2 = (run(0.005) - ref).norm();
  const double e3 = (run(0.0025) - ref).norm();
  EXPECT_NEAR(e1 / e2, 16.0, 3.0);
  EXPECT_NEAR(e2 / e3, 16.0, 3.0);
}

TEST(Rk4, BlowUpIsReported) {
  expect_error(ErrorCode::kBlowUp, [] {
    Vector x = Vector::Constant(3, 1e200);
    models::rk4_step(ModelSpec::lorenz63(), x, 1.0);
  });
  expect_error(ErrorCode::kInvalidArgument, [] { models::rk4_step(ModelSpec::lorenz63(), Vector::Ones(3), 0.0); });
}

TEST(Trajectory, OneSaveIntervalGivesTwoStates) {
  const auto m = ModelSpec::lorenz63();
  const Vector x0 = Vector::Ones(3);
  const auto t = models::integrate_trajectory(m, x0, 0.0, 0.01, 0.002, 0.01);
  ASSERT_EQ(t.size(), 2U);
  EXPECT_EQ(t.state(0), x0);
  Vector x = x0;
  for (int i = 0; i < 5; ++i) x = models::rk4_step(m, x, 0.002);
  EXPECT_EQ(t.state(1), x);
  EXPECT_EQ(t.steps_per_save(), 5);
  EXPECT_DOUBLE_EQ(t.time(1), 0.01);
}

TEST(Trajectory, SpinupIsDiscarded) {
  const auto m = ModelSpec::lorenz63();
  const Vector x0 = Vector::Ones(3);
  const auto t = models::integrate_trajectory(m, x0, 1.0, 0.02, 0.002, 0.01);
  Vector x = x0;
  for (int i = 0; i < 500; ++i) x = models::rk4_step(m, x, 0.002);
  EXPECT_EQ(t.state(0), x);
  EXPECT_EQ(t.size(), 3U);
}

TEST(Trajectory, Lorenz63StaysOnAttractor) {
  Rng rng(42);
  const Vector x0 = standard_normal(3, 1, rng);
  const auto t = models::integrate_trajectory(ModelSpec::lorenz63(), x0, 500.0, 300.0, 0.002, 0.01);
  EXPECT_TRUE(t.states().allFinite());
  EXPECT_LT(t.states().row(2).cwiseAbs().maxCoeff(), 60.0);
}

TEST(Trajectory, Deterministic) {
  const auto m = ModelSpec::lorenz96(40);
  const Vector x0 = Vector::Constant(40, 8.0) + 0.01 * Vector::Unit(40, 3);
  const auto a = models::integrate_trajectory(m, x0, 10.0, 5.0, 0.01, 0.05);
  const auto b = models::integrate_trajectory(m, x0, 10.0, 5.0, 0.01, 0.05);
  EXPECT_EQ(a.states(), b.states());
}

TEST(Trajectory, Preconditions) {
  const auto m = ModelSpec::lorenz63();
  expect_error(ErrorCode::kInvalidArgument, [&] { models::integrate_trajectory(m, Vector::Ones(3), 0, 0.005, 0.002, 0.01); });
  expect_error(ErrorCode::kInvalidArgument, [&] { models::integrate_trajectory(m, Vector::Ones(3), 0, 1.0, 0.003, 0.01); });
  EXPECT_EQ(models::steps_per_interval(0.05, 0.01), 5);
  const auto t = models::integrate_trajectory(m, Vector::Ones(3), 0, 0.1, 0.002, 0.01);
  EXPECT_EQ(t.window(3, 4).size(), 4U);
  EXPECT_EQ(t.window(3, 4).state(0), t.state(3));
  EXPECT_DOUBLE_EQ(t.window(3, 4).t0(), t.time(3));
  expect_error(ErrorCode::kInvalidArgument, [&] { t.window(8, 4); });
}
