// Serial vs parallel timings of the OpenMP kernels. Arg 0 = serial, 1 = parallel.
#include "jumpctl/dynamics.hpp"
#include "jumpctl/hjb.hpp"
#include "jumpctl/lq.hpp"
#include "jumpctl/verify.hpp"

#include <benchmark/benchmark.h>

using namespace jumpctl;

namespace {

Execution mode(const benchmark::State& st)
{
    return st.range(0) ? Execution::Parallel : Execution::Serial;
}

const LQSolution& lq()
{
    static const LQSolution sol = solve_lq(LQSpec::scalar(1.0, 1.0, 1.0, 0.5));
    return sol;
}

SimConfig sim_config(Execution exec)
{
    SimConfig cfg;
    cfg.x0 = Vec::Constant(1, 2.0);
    cfg.T = 1.0;
    cfg.dt = 1e-2;
    cfg.n_paths = 4000;
    cfg.seed = 3;
    cfg.record_every = 10;
    cfg.u = lq().u;
    cfg.exec = exec;
    return cfg;
}

void BM_simulate(benchmark::State& st)
{
    const SimConfig cfg = sim_config(mode(st));
    PathFunctionals fn;
    fn.f = lq().cost();
    fn.q = lq().discount();
    for (auto _ : st)
        benchmark::DoNotOptimize(simulate(lq().policy(0.0), cfg, fn));
}

void BM_solve_stationary(benchmark::State& st)
{
    const LQSpec spec = LQSpec::scalar(1.0, 1.0, 1.0, 0.5);
    DriftLattice lat{Vec::Constant(1, -3.0), Vec::Constant(1, 3.0), {61}};
    const HJBProblem prob = lq_problem(spec, lat);
    const Grid grid = Grid::line(-6.0, 6.0, 401);
    SolveOptions opt;
    opt.exec = mode(st);
    for (auto _ : st)
        benchmark::DoNotOptimize(solve_stationary(prob, grid, opt));
}

void BM_submartingale_test(benchmark::State& st)
{
    SimConfig cfg = sim_config(Execution::Parallel);
    cfg.n_paths = 20000;
    PathFunctionals fn;
    fn.f = lq().cost();
    fn.q = lq().discount();
    const PathBundle b = simulate(lq().policy(0.0), cfg, fn);
    const BellmanSeries S = bellman_series(lq().value_field(), b);
    const std::vector<std::pair<int, int>> pairs{{0, b.n_records / 2}, {b.n_records / 2, b.n_records - 1}};
    BinningOptions opt;
    opt.exec = mode(st);
    for (auto _ : st)
        benchmark::DoNotOptimize(submartingale_test(S, pairs, MartingaleMode::Martingale, opt));
}

}  // namespace

BENCHMARK(BM_simulate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_solve_stationary)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_submartingale_test)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
