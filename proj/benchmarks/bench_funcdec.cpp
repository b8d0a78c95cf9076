#include <benchmark/benchmark.h>

#include <funcdec/funcdec.hpp>

#include <numbers>
#include <random>

using namespace funcdec;

namespace {

const char* kNested = "cos(sin(x1*x2))+sin(cos(sin(x1*x2)))+sin(x1*x2)";

void BM_ToRpn(benchmark::State& state) {
    const auto tokens = tokenize(kNested);
    for (auto _ : state) benchmark::DoNotOptimize(to_rpn(tokens));
}
BENCHMARK(BM_ToRpn);

void BM_DecomposeReduce(benchmark::State& state) {
    const auto rpn = parse(kNested);
    for (auto _ : state) benchmark::DoNotOptimize(reduce(decompose_dedup(rpn, 2)));
}
BENCHMARK(BM_DecomposeReduce);

void BM_LstmIngest(benchmark::State& state) {
    const auto spec = LstmSpec::random(static_cast<std::size_t>(state.range(0)), 1, 1);
    for (auto _ : state) benchmark::DoNotOptimize(reduce(lstm_ingest(spec)));
}
BENCHMARK(BM_LstmIngest)->Arg(2)->Arg(5)->Arg(10);

void BM_MustVisit(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(1);
    std::bernoulli_distribution edge(4.0 / static_cast<double>(n));
    Digraph g(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (edge(rng)) g.add_edge(i, j);
        }
    }
    for (auto _ : state) benchmark::DoNotOptimize(must_visit(g));
}
BENCHMARK(BM_MustVisit)->Arg(32)->Arg(128)->Arg(512);

void BM_BuildGraphSet(benchmark::State& state) {
    const auto fd = decompose_dedup(parse("sin(x)+sin(x)^2"), 1);
    ApproxConfig cfg;
    cfg.tol = 1.0 / static_cast<double>(state.range(0));
    const Interval dom[] = {Interval(-std::numbers::pi, std::numbers::pi)};
    for (auto _ : state) benchmark::DoNotOptimize(build_graph_set(fd, dom, cfg));
}
BENCHMARK(BM_BuildGraphSet)->Arg(10)->Arg(100);

void BM_Contains(benchmark::State& state) {
    const auto fd = decompose_dedup(parse("sin(x)+sin(x)^2"), 1);
    ApproxConfig cfg;
    cfg.tol = 1.0 / static_cast<double>(state.range(0));
    const Interval dom[] = {Interval(-std::numbers::pi, std::numbers::pi)};
    const auto gs = build_graph_set(fd, dom, cfg);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
    for (auto _ : state) {
        const double x = u(rng);
        const double in[] = {x};
        const Eigen::Vector2d p(x, eval_fd(fd, in)[0]);
        benchmark::DoNotOptimize(contains(gs.set, p));
    }
}
BENCHMARK(BM_Contains)->Arg(10)->Arg(100);

} // namespace

BENCHMARK_MAIN();
