#include <benchmark/benchmark.h>

#include "inekf/contacts.hpp"
#include "inekf/correction.hpp"
#include "inekf/dynamics.hpp"
#include "inekf/qekf.hpp"

namespace {

using namespace inekf;

FilterBelief standing_belief(int contacts) {
  FilterBelief b = new_belief(Mat3::Identity(), Vec3::Zero(), Vec3(0, 0, 0.68),
                              BiasVector{}, Eigen::MatrixXd::Identity(15, 15) * 0.01,
                              ErrorFrame::kRightInvariant, Convention::kWorldCentric);
  const PointFootLeg leg({0.0, 0.12, 0.0}, 0.12, 0.35, 0.40);
  for (int i = 0; i < contacts; ++i) {
    b = add_contact(b, i, Vec3(0.05 + 0.01 * i, 0.3, -0.6), leg, NoiseParams{});
  }
  return b;
}

const ImuSample kImu{Vec3(0.01, -0.02, 0.005), Vec3(0.1, 0.0, 9.81), 0.0005};

void BM_GammaClosedForm(benchmark::State& state) {
  const Vec3 phi(0.21, -0.13, 0.08);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gamma(static_cast<int>(state.range(0)), phi));
  }
}
BENCHMARK(BM_GammaClosedForm)->DenseRange(0, 3);

void BM_ExpSEK3(benchmark::State& state) {
  Eigen::VectorXd xi(9);
  xi << 0.2, -0.1, 0.05, 0.3, 0.0, -0.2, 1.0, 2.0, 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(exp_sek3(xi));
  }
}
BENCHMARK(BM_ExpSEK3);

void BM_Propagate(benchmark::State& state) {
  FilterBelief b = standing_belief(static_cast<int>(state.range(0)));
  const NoiseParams noise;
  for (auto _ : state) {
    b = propagate(b, kImu, noise);
  }
  benchmark::DoNotOptimize(b);
}
BENCHMARK(BM_Propagate)->DenseRange(0, 2);

void BM_PropagateLeftFrame(benchmark::State& state) {
  FilterBelief b = switch_error_frame(standing_belief(1));
  const NoiseParams noise;
  for (auto _ : state) {
    b = propagate(b, kImu, noise);
  }
  benchmark::DoNotOptimize(b);
}
BENCHMARK(BM_PropagateLeftFrame);

void BM_FkUpdate(benchmark::State& state) {
  FilterBelief b = standing_belief(1);
  const PointFootLeg leg({0.0, 0.12, 0.0}, 0.12, 0.35, 0.40);
  const Vec3 alpha(0.05, 0.3, -0.6);
  const NoiseParams noise;
  for (auto _ : state) {
    const auto obs = fk_position_observation(b, alpha, 0, leg, noise);
    b = update_right(b, obs).belief;
  }
  benchmark::DoNotOptimize(b);
}
BENCHMARK(BM_FkUpdate);

void BM_FullStep(benchmark::State& state) {
  FilterBelief b = standing_belief(1);
  const PointFootLeg leg({0.0, 0.12, 0.0}, 0.12, 0.35, 0.40);
  const Vec3 alpha(0.05, 0.3, -0.6);
  const NoiseParams noise;
  for (auto _ : state) {
    b = propagate(b, kImu, noise);
    const auto obs = fk_position_observation(b, alpha, 0, leg, noise);
    b = update_right(b, obs).belief;
  }
  benchmark::DoNotOptimize(b);
}
BENCHMARK(BM_FullStep);

void BM_QekfFullStep(benchmark::State& state) {
  QekfBelief b;
  b.position = Vec3(0, 0, 0.68);
  const PointFootLeg leg({0.0, 0.12, 0.0}, 0.12, 0.35, 0.40);
  const Vec3 alpha(0.05, 0.3, -0.6);
  const NoiseParams noise;
  b = qekf_add_contact(b, 0, alpha, leg, noise);
  for (auto _ : state) {
    b = qekf_predict(b, kImu, noise);
    b = qekf_update(b, alpha, 0, leg, noise).belief;
  }
  benchmark::DoNotOptimize(b);
}
BENCHMARK(BM_QekfFullStep);

void BM_ContactLifecycle(benchmark::State& state) {
  const FilterBelief base = standing_belief(1);
  const PointFootLeg leg({0.0, -0.12, 0.0}, 0.12, 0.35, 0.40);
  for (auto _ : state) {
    FilterBelief b = add_contact(base, 99, Vec3(0.0, 0.25, -0.55), leg, NoiseParams{});
    b = remove_contact(b, 99);
    benchmark::DoNotOptimize(b);
  }
}
BENCHMARK(BM_ContactLifecycle);

}  // namespace

BENCHMARK_MAIN();
