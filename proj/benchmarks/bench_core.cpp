#include <trajcon/constrain.hpp>
#include <trajcon/instances.hpp>
#include <trajcon/scenario.hpp>

#include <benchmark/benchmark.h>

using namespace trajcon;

namespace {

struct Instance {
    TrajectoryDensity density;
    ConstraintSet set;
};

Instance make_instance(std::uint64_t seed, ConstraintMode mode, std::size_t count) {
    Rng rng(seed);
    auto td = random_density(rng, {2, TimeWindow(0, 9)});
    auto cs = random_constraint_set(rng, td, mode, {}, count);
    return {std::move(td), std::move(cs)};
}

void BM_ConstrainConjunct(benchmark::State& state) {
    const auto inst = make_instance(1, ConstraintMode::conjunct, static_cast<std::size_t>(state.range(0)));
    const McOptions mc{static_cast<std::size_t>(state.range(1)), 7, true};
    for (auto _ : state) benchmark::DoNotOptimize(constrain_density(inst.density, inst.set, mc));
}
BENCHMARK(BM_ConstrainConjunct)->Args({1, 10000})->Args({3, 10000})->Args({3, 100000})->Unit(benchmark::kMillisecond);

void BM_ConstrainDisjunct(benchmark::State& state) {
    const auto inst = make_instance(2, ConstraintMode::disjunct, static_cast<std::size_t>(state.range(0)));
    const McOptions mc{static_cast<std::size_t>(state.range(1)), 7, true};
    for (auto _ : state) benchmark::DoNotOptimize(constrain_density(inst.density, inst.set, mc));
}
BENCHMARK(BM_ConstrainDisjunct)->Args({2, 10000})->Args({4, 10000})->Args({4, 100000})->Unit(benchmark::kMillisecond);

void BM_ConstrainedMarginals(benchmark::State& state) {
    const auto inst = make_instance(3, ConstraintMode::conjunct, 2);
    const auto cd = constrain_density(inst.density, inst.set, {10000, 7, true});
    const McOptions mc{static_cast<std::size_t>(state.range(0)), 8, true};
    for (auto _ : state) benchmark::DoNotOptimize(constrained_marginals(cd.density, mc));
}
BENCHMARK(BM_ConstrainedMarginals)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_SampleDensity(benchmark::State& state) {
    const auto inst = make_instance(4, ConstraintMode::conjunct, 1);
    const TrajectorySampler sampler(inst.density);
    Rng rng(9);
    for (auto _ : state) benchmark::DoNotOptimize(sampler.draw(rng));
}
BENCHMARK(BM_SampleDensity);

void BM_SmoothLifetime(benchmark::State& state) {
    MotionModel mm;
    mm.transition = (Eigen::Matrix2d() << 1.0, 1.0, 0.0, 1.0).finished();
    mm.process_noise = (Eigen::Matrix2d() << 0.0333, 0.05, 0.05, 0.1).finished();
    mm.birth_mean = Eigen::Vector2d(0.0, 1.0);
    mm.birth_covariance = Eigen::Vector2d(25.0, 1.0).asDiagonal();
    SensorModel sm;
    sm.measurement = (Eigen::MatrixXd(1, 2) << 1.0, 0.0).finished();
    sm.noise = Eigen::MatrixXd::Constant(1, 1, 4.0);
    const auto n = static_cast<Time>(state.range(0));
    std::vector<TimedMeasurement> ms;
    for (Time t = 0; t < n; t += 2) ms.push_back({t, Eigen::VectorXd::Constant(1, static_cast<double>(t))});
    for (auto _ : state) benchmark::DoNotOptimize(smooth_lifetime(ms, mm, sm, {0, n - 1}));
}
BENCHMARK(BM_SmoothLifetime)->Arg(20)->Arg(60)->Arg(100)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
