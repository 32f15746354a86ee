// Throughput of the hot paths: quartic roots, grouped ionization times,
// single-orbit amplitudes, one trajectory propagation, one shooting solve.

#include <benchmark/benchmark.h>

#include "orbholo/cqsfa.hpp"
#include "orbholo/quartic.hpp"
#include "orbholo/sfa_amplitude.hpp"
#include "orbholo/sfa_times.hpp"
#include "orbholo/trajectory.hpp"

using namespace orbholo;

namespace {

LaserField bench_field(double eps) {
    return LaserField::from_experiment(2.5e14, 735.0, eps, 0.0);
}

const TargetAtom atom{0.90357, 1.0};
const Vec2 p{0.5, 0.25};

void BM_QuarticClosedForm(benchmark::State& state) {
    const QuarticResolvent qr = quartic_coefficients(bench_field(0.3), atom, p);
    const double b = qr.a3.real(), c = qr.a2.real(), d = qr.a1.real(),
                 e = qr.a0.real();
    for (auto _ : state) {
        benchmark::DoNotOptimize(quartic_solve_closed(b, c, d, e));
    }
}
BENCHMARK(BM_QuarticClosedForm);

void BM_GroupedTimes(benchmark::State& state) {
    const LaserField field = bench_field(0.3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(grouped_times(field, atom, p, 0));
    }
}
BENCHMARK(BM_GroupedTimes);

void BM_OrbitAmplitude(benchmark::State& state) {
    const LaserField field = bench_field(0.3);
    const auto [t1, t2] = grouped_times(field, atom, p, 0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(orbit_amplitude(field, atom, p, t1));
    }
}
BENCHMARK(BM_OrbitAmplitude);

void BM_Propagate(benchmark::State& state) {
    const LaserField field = bench_field(0.0);
    const auto [t1, t2] = grouped_times(field, atom, p, 0);
    const Vec2 exit = tunnel_exit(field, p, t1.t_prime);
    const double t0 = t1.t_prime.real();
    const double horizon = t0 + 20.0 * field.period();
    for (auto _ : state) {
        benchmark::DoNotOptimize(propagate(field, atom, exit, p, t0, horizon));
    }
}
BENCHMARK(BM_Propagate)->Unit(benchmark::kMillisecond);

void BM_Shoot(benchmark::State& state) {
    const LaserField field = bench_field(0.0);
    const ShootSeed seed = sfa_seed(field, atom, p, TimeGroup::t1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(shoot(field, atom, seed, p));
    }
}
BENCHMARK(BM_Shoot)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
