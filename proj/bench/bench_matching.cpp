#include <benchmark/benchmark.h>

#include "mergechase/oracle.hpp"

using namespace mergechase;

namespace {

// A growing instance: the generated KB from seed 962 chased for `steps` steps.
struct Workload {
  GeneratedKb g;
  Instance instance;
  TauConjunction body;
  CompiledRule rule;
};

Workload workload(std::size_t steps) {
  KbGeneratorConfig cfg;
  cfg.seed = 962;
  Workload w{generate_kb(cfg), {}, {}, {}};
  w.instance = run_chase(w.g.kb, Strategy::fair(), steps).final;
  w.body = tau(w.g.kb.symbols, w.g.kb.tbox.front().body);
  w.rule = compile_rule(w.g.kb.symbols, w.g.kb.tbox.front());
  return w;
}

void BM_Enumerate(benchmark::State& state, ExecPolicy policy) {
  Workload w = workload(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_assignments(w.instance, w.body, policy));
  state.counters["facts"] = static_cast<double>(w.instance.size());
}

void BM_Triggers(benchmark::State& state, ExecPolicy policy) {
  Workload w = workload(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(applicable_triggers(w.instance, w.rule, policy));
  state.counters["facts"] = static_cast<double>(w.instance.size());
}

}  // namespace

BENCHMARK_CAPTURE(BM_Enumerate, serial, ExecPolicy::Serial)->Arg(25)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Enumerate, parallel, ExecPolicy::Parallel)->Arg(25)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Triggers, serial, ExecPolicy::Serial)->Arg(25)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Triggers, parallel, ExecPolicy::Parallel)->Arg(25)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
