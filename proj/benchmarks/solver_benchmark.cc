#include <vector>

#include <benchmark/benchmark.h>

#include "pnl/aor.h"
#include "pnl/bench.h"
#include "pnl/dlt.h"
#include "pnl/estimator.h"
#include "pnl/prenorm.h"

namespace {

std::vector<pnl::Correspondence> scene(std::size_t n, double outlier_fraction = 0.0) {
    pnl::BenchConfig cfg;
    cfg.n_lines = n;
    cfg.sigma_p = 1.0;
    pnl::Rng rng = pnl::trial_rng(42, n);
    const pnl::Scene s = pnl::generate_scene(cfg, rng);
    const auto noisy = pnl::add_endpoint_noise(s.image_segments, cfg.sigma_p, rng);
    const auto injected = pnl::apply_outliers(noisy, outlier_fraction, cfg.outlier_sigma, rng);
    return pnl::build_correspondences(s.segments, injected.endpoints, s.intrinsics);
}

void BM_EstimatePose(benchmark::State &state) {
    const auto corr = scene(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(pnl::estimate_pose(corr));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EstimatePose)->Arg(9)->Arg(25)->Arg(100)->Arg(1000)->Complexity(benchmark::oN);

void BM_EstimatePoseNoPrenorm(benchmark::State &state) {
    const auto corr = scene(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(pnl::estimate_pose(corr, false));
    }
}
BENCHMARK(BM_EstimatePoseNoPrenorm)->Arg(9)->Arg(100)->Arg(1000);

void BM_EstimatePoseAor(benchmark::State &state) {
    const auto corr = scene(static_cast<std::size_t>(state.range(0)), 0.2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(pnl::estimate_pose_aor(corr));
    }
}
BENCHMARK(BM_EstimatePoseAor)->Arg(100)->Arg(500);

void BM_MeasurementMatrix(benchmark::State &state) {
    const auto corr = scene(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(pnl::build_measurement_matrix(corr));
    }
}
BENCHMARK(BM_MeasurementMatrix)->Arg(100)->Arg(1000);

void BM_Weiszfeld(benchmark::State &state) {
    const auto corr = scene(static_cast<std::size_t>(state.range(0)));
    std::vector<pnl::PluckerLine> lines;
    for (const auto &c : corr) {
        lines.push_back(c.line3d);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(pnl::weiszfeld_closest_point(lines));
    }
}
BENCHMARK(BM_Weiszfeld)->Arg(100)->Arg(1000);

} // namespace

BENCHMARK_MAIN();
