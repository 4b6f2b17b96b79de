// Parallel kernels vs their serial reference implementations.
#include <benchmark/benchmark.h>

#include "cmom/econometrics.hpp"
#include "cmom/link_engine.hpp"
#include "cmom/sorter.hpp"
#include "cmom/synth_lab.hpp"

using namespace cmom;

namespace {

struct Fixture {
  SynthResult synth;
  std::vector<CustomerAggregate> aggs;
  SignalPanel signals;
  FMInput fm_input;

  Fixture() {
    DGPConfig cfg;
    cfg.n_firms = 400;
    cfg.n_periods = 480;
    cfg.seed = 77;
    synth = generate(cfg);
    aggs = customer_aggregates(synth.monthly, synth.links);
    aggregates_to_signals(aggs, signals);
    fm_input.signals["cmom-1-1"] = signals.series("cmom-1-1");
    fm_input.signals["rel_size"] = signals.series("rel_size");
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void bm_aggregates_serial(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        customer_aggregates_serial(f.synth.monthly, f.synth.links));
}

void bm_aggregates_parallel(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        customer_aggregates(f.synth.monthly, f.synth.links));
}

void bm_sort_serial(benchmark::State& state) {
  auto& f = fixture();
  BreakpointSpec spec;
  for (auto _ : state)
    benchmark::DoNotOptimize(form_portfolios_serial(
        f.synth.monthly, f.signals, "cmom-1-1", spec, Weighting::Value));
}

void bm_sort_parallel(benchmark::State& state) {
  auto& f = fixture();
  BreakpointSpec spec;
  for (auto _ : state)
    benchmark::DoNotOptimize(form_portfolios(f.synth.monthly, f.signals,
                                             "cmom-1-1", spec,
                                             Weighting::Value));
}

void bm_fm_serial(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(fama_macbeth_serial(
        f.synth.monthly, f.fm_input, {"cmom-1-1", "rel_size"}));
}

void bm_fm_parallel(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(fama_macbeth(f.synth.monthly, f.fm_input,
                                          {"cmom-1-1", "rel_size"}));
}

BENCHMARK(bm_aggregates_serial);
BENCHMARK(bm_aggregates_parallel);
BENCHMARK(bm_sort_serial);
BENCHMARK(bm_sort_parallel);
BENCHMARK(bm_fm_serial);
BENCHMARK(bm_fm_parallel);

}  // namespace

BENCHMARK_MAIN();
