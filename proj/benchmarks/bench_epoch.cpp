#include "hvac/llc.hpp"
#include "hvac/scenario_gen.hpp"
#include "hvac/tldm.hpp"
#include "hvac/ulc.hpp"

#include <benchmark/benchmark.h>
#include <spdlog/spdlog.h>

using namespace hvac;

namespace {

const Case& bench_case() {
  static const Case c = [] {
    spdlog::set_level(spdlog::level::warn);
    return benchmark5();
  }();
  return c;
}

// State at the start of the high-occupancy window, CO2 near the cap.
PlantState busy_state(const Case& c) {
  PlantState s;
  s.temps = Vector::Constant(c.building.zone_count(), 25.0);
  s.co2 = Vector::Constant(c.building.zone_count(), 760.0);
  s.time_index = 20;
  return s;
}

void BM_Ulc(benchmark::State& state) {
  const Case& c = bench_case();
  const PlantState s = busy_state(c);
  const Vector dr = Vector::Constant(c.building.horizon.horizon_steps, c.building.ahu.dr_max);
  for (auto _ : state) {
    auto r = solve_ulc(c.building, c.scenario, s, dr);
    benchmark::DoNotOptimize(r.objective);
  }
}
BENCHMARK(BM_Ulc)->Unit(benchmark::kMillisecond);

void BM_Llc(benchmark::State& state) {
  const Case& c = bench_case();
  const PlantState s = busy_state(c);
  const Vector dr = Vector::Constant(c.building.horizon.horizon_steps, 0.5);
  const UlcResult u = solve_ulc(c.building, c.scenario, s, dr);
  for (auto _ : state) {
    auto r = solve_llc(c.building, c.scenario, s, u.flows, dr);
    benchmark::DoNotOptimize(r.objective);
  }
}
BENCHMARK(BM_Llc)->Unit(benchmark::kMillisecond);

void BM_Epoch(benchmark::State& state) {
  const Case& c = bench_case();
  const PlantState s = busy_state(c);
  for (auto _ : state) {
    auto e = tldm_epoch(c.building, c.scenario, s, {});
    benchmark::DoNotOptimize(e.predicted_cost);
  }
}
BENCHMARK(BM_Epoch)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
