#include "agentkit/belief.hpp"

#include <benchmark/benchmark.h>

using namespace agentkit;

static BeliefBase make_base(int beliefs) {
    BeliefBase bb;
    for (int i = 0; i < beliefs; ++i) {
        bb.add(Predicate("location", {Term::integer(i / 10), Term::integer(i % 10),
                                      Term::text(i % 2 ? "X" : "O")}));
    }
    return bb;
}

static void BM_BeliefAdd(benchmark::State& state) {
    for (auto _ : state) {
        BeliefBase bb = make_base(static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(bb.size());
    }
}
BENCHMARK(BM_BeliefAdd)->Arg(100);

static void BM_BeliefQuery(benchmark::State& state) {
    BeliefBase bb = make_base(static_cast<int>(state.range(0)));
    Predicate pattern("location", {Term::var("R", TermType::Int),
                                   Term::var("C", TermType::Int),
                                   Term::text("X")});
    for (auto _ : state) {
        benchmark::DoNotOptimize(bb.query(pattern));
    }
}
BENCHMARK(BM_BeliefQuery)->Arg(10)->Arg(100)->Arg(1000);
