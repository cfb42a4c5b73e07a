#include <benchmark/benchmark.h>

#include <memory>

#include "districtsim/dhnet.hpp"
#include "districtsim/envelope.hpp"
#include "districtsim/protocol.hpp"
#include "districtsim/simulators.hpp"
#include "districtsim/units.hpp"

using namespace districtsim;

namespace {

std::shared_ptr<const scenario::Scenario> district() {
  static const auto s = std::make_shared<const scenario::Scenario>(
      scenario::load_data(scenario::load_scenario(DISTRICTSIM_SOURCE_DIR "/scenarios/district4/scenario.json")));
  return s;
}

void BM_StepThermal(benchmark::State& st) {
  const auto cond = envelope::derive_conductances(district()->config.buildings.front().params);
  auto state = envelope::ThermalState::uniform(to_kelvin(20.0), district()->config.buildings.front().params.heat_capacity_j_per_k);
  const auto inj = envelope::split_gains(400.0, 300.0, cond);
  for (auto _ : st) {
    auto r = envelope::step_thermal(state, cond, inj, to_kelvin(0.0), to_kelvin(0.0), 5000.0, 60.0);
    state = r.state;
    benchmark::DoNotOptimize(state);
  }
}
BENCHMARK(BM_StepThermal);

void BM_NetworkSolve(benchmark::State& st) {
  const auto& topo = *district()->topology;
  std::vector<dhnet::SubstationFlow> flows(topo.substations().size(), {0.1, to_kelvin(60.0)});
  for (auto _ : st) benchmark::DoNotOptimize(dhnet::network_solve(topo, flows, to_kelvin(10.0), to_kelvin(95.0)));
}
BENCHMARK(BM_NetworkSolve);

void BM_ProtocolRoundTrip(benchmark::State& st) {
  const auto msg = protocol::Message::step_ok(900.0, {{"T_buffer", 351.15}, {"Q_demand", 2790.6666666666665}});
  for (auto _ : st) benchmark::DoNotOptimize(protocol::decode_message(protocol::encode_message(msg)));
}
BENCHMARK(BM_ProtocolRoundTrip);

void BM_BuildingDay(benchmark::State& st) {
  for (auto _ : st) {
    sim::BuildingSimulator b(district(), "B1");
    cosim::PortValues in;
    for (const auto& p : b.descriptor().inputs) in[p.name] = p.default_value;
    for (int k = 0; k < 96; ++k) benchmark::DoNotOptimize(b.step(900.0 * k, 900.0, in));
  }
}
BENCHMARK(BM_BuildingDay)->Unit(benchmark::kMillisecond);

void BM_DistrictWeek(benchmark::State& st) {
  auto s = std::make_shared<scenario::Scenario>(*district());
  s->config.t_end = 7.0 * 86400.0;
  for (auto _ : st) benchmark::DoNotOptimize(sim::run_district(s));
}
BENCHMARK(BM_DistrictWeek)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
