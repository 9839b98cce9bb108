#include <benchmark/benchmark.h>

#include "rarinf/inference.hpp"
#include "rarinf/intervals.hpp"
#include "rarinf/study.hpp"

using namespace rarinf;

static void BM_JointDistribution(benchmark::State& state) {
    const auto d = DesignSpec::rpw(1, 1, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(joint_distribution(d, {0.7, 0.4}).total());
}
BENCHMARK(BM_JointDistribution)->Arg(25)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_DesignLawBuild(benchmark::State& state) {
    const auto d = DesignSpec::of(Rule::NAD, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(DesignLaw(d).weight(0, 0, 0));
}
BENCHMARK(BM_DesignLawBuild)->Arg(25)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_JointFromLaw(benchmark::State& state) {
    const DesignLaw law(DesignSpec::rpw(1, 1, static_cast<int>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(law.joint({0.7, 0.4}).total());
}
BENCHMARK(BM_JointFromLaw)->Arg(25)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_Cmle(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const DesignLaw law(DesignSpec::rpw(1, 1, n));
    const Outcome o{n / 5, n / 4, n / 2, n};
    for (auto _ : state) benchmark::DoNotOptimize(cmle(law, o).estimate);
}
BENCHMARK(BM_Cmle)->Arg(25)->Arg(50)->Arg(100)->Unit(benchmark::kMicrosecond);

static void BM_CondBootstrapExact(benchmark::State& state) {
    const DesignLaw law(DesignSpec::sdd(1, 1, 25));
    const Outcome o{6, 5, 13, 25};
    const CiSpec spec;
    for (auto _ : state) benchmark::DoNotOptimize(cond_bootstrap_ci(law, o, spec).arms);
}
BENCHMARK(BM_CondBootstrapExact)->Unit(benchmark::kMicrosecond);

static void BM_StudyRow(benchmark::State& state) {
    const StudyEngine engine(DesignSpec::sdd(1, 1, 25));
    engine.row({0.5, 0.5});
    for (auto _ : state) benchmark::DoNotOptimize(engine.row({0.7, 0.3}).rel_var);
}
BENCHMARK(BM_StudyRow)->Unit(benchmark::kMillisecond);

static void BM_StudyTable(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(study_table(DesignSpec::sdd(1, 1, 25), paper_grid()).size());
}
BENCHMARK(BM_StudyTable)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
