#include <benchmark/benchmark.h>

#include "lyapvec/enkf.hpp"
#include "lyapvec/linalg.hpp"
#include "lyapvec/metrics.hpp"
#include "lyapvec/models.hpp"
#include "lyapvec/random.hpp"
#include "lyapvec/tangent.hpp"

using namespace lyapvec;

namespace {

models::ModelSpec spec(int d) { return d == 3 ? models::ModelSpec::lorenz63() : models::ModelSpec::lorenz96(d); }

Vector start(int d) {
  Rng rng(7);
  return 8.0 + standard_normal(d, 1, rng).col(0).array();
}

void BM_Rk4Step(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto model = spec(d);
  Vector x = start(d);
  for (auto _ : state) {
    x = models::rk4_step(model, x, 1e-3);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_Rk4Step)->Arg(3)->Arg(40);

// One QR gap of the L96 setup: five RK4 steps of state and a d x m tangent block.
void BM_TangentGap(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto model = spec(d);
  const Vector x = start(d);
  const Matrix b = Matrix::Identity(d, d);
  for (auto _ : state) benchmark::DoNotOptimize(tangent::propagate_tangent(model, x, b, 5, 0.01));
}
BENCHMARK(BM_TangentGap)->Arg(10)->Arg(40);

void BM_QrPositive(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Rng rng(1);
  const Matrix a = standard_normal(d, d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(qr_positive(a));
}
BENCHMARK(BM_QrPositive)->Arg(3)->Arg(40);

void BM_AnalysisUpdate(benchmark::State& state) {
  const int d = 40;
  const auto model = spec(d);
  Rng rng(3);
  const Matrix ensemble = standard_normal(d, 25, rng).array() + 2.0;
  const auto obs = enkf::ObservationModel::even_indices(d, 0.3, 0.05);
  const Vector y = Vector::Constant(obs.observed(), 2.0);
  const Matrix taper = state.range(0) ? enkf::localization_matrix(model, 4.0) : Matrix();
  for (auto _ : state) benchmark::DoNotOptimize(enkf::analysis_update(ensemble, y, obs, taper, 1.0, rng));
}
BENCHMARK(BM_AnalysisUpdate)->Arg(0)->Arg(1);

void BM_PrincipalAngles(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const Matrix p = metrics::random_orthonormal_subspace(40, k, 1);
  const Matrix q = metrics::random_orthonormal_subspace(40, k, 2);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::principal_angles(p, q));
}
BENCHMARK(BM_PrincipalAngles)->Arg(2)->Arg(15)->Arg(40);

}  // namespace

BENCHMARK_MAIN();
