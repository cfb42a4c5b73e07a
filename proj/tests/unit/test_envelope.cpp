#include "districtsim/envelope.hpp"
#include "districtsim/errors.hpp"
#include "districtsim/units.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace districtsim;
using namespace districtsim::envelope;

namespace {

BuildingParams small_house() {
  BuildingParams p;
  p.surfaces = {
      SurfaceSpec::make(SurfaceKind::roof, 60.0, 0.4, "roof"),
      SurfaceSpec::make(SurfaceKind::wall, 120.0, 0.5, "wall"),
      SurfaceSpec::make(SurfaceKind::floor, 60.0, 0.6, "floor"),
      SurfaceSpec::make(SurfaceKind::window, 20.0, 1.3, "window"),
  };
  p.floor_area_m2 = 100.0;
  p.storeys = 2;
  p.f_ms = 2.5;
  p.f_red = 0.9;
  p.heat_capacity_j_per_k = 165000.0 * 200.0;
  return p;
}

oracle::Network5R1C as_oracle(const ConductanceSet& c) {
  return {c.h_ve, c.h_the, c.h_win, c.h_mas, c.h_tra};
}

BuildingParams random_building(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u_opaque(0.15, 1.6);
  std::uniform_real_distribution<double> u_window(0.8, 4.5);
  std::uniform_real_distribution<double> area(20.0, 200.0);
  std::uniform_real_distribution<double> f_red(0.6, 1.0);
  std::uniform_int_distribution<int> storeys(1, 3);
  BuildingParams p;
  p.storeys = storeys(rng);
  p.floor_area_m2 = area(rng) + 40.0;
  p.surfaces = {
      SurfaceSpec::make(SurfaceKind::roof, area(rng), u_opaque(rng)),
      SurfaceSpec::make(SurfaceKind::wall, area(rng), u_opaque(rng)),
      SurfaceSpec::make(SurfaceKind::floor, p.floor_area_m2, u_opaque(rng)),
      SurfaceSpec::make(SurfaceKind::window, 0.2 * area(rng), u_window(rng)),
  };
  p.f_red = f_red(rng);
  p.f_ms = (rng() % 2) ? 2.5 : 3.0;
  p.heat_capacity_j_per_k = 165000.0 * p.floor_area_m2 * p.storeys;
  return p;
}

}  // namespace

TEST(EffectiveU, Examples) {
  auto wall = SurfaceSpec::make(SurfaceKind::wall, 10.0, 1.0);
  EXPECT_NEAR(effective_u(wall, 0.9, 0.1), 0.99, 1e-15);
  auto floor = SurfaceSpec::make(SurfaceKind::floor, 10.0, 0.8);
  EXPECT_NEAR(effective_u(floor, 1.0, 0.1), 0.5, 1e-15);
  auto roof = SurfaceSpec::make(SurfaceKind::roof, 10.0, 0.437);
  EXPECT_EQ(effective_u(roof, 1.0, 0.0), 0.437);
}

TEST(EffectiveU, AdjustmentFactorsByKind) {
  EXPECT_EQ(adjustment_factor(SurfaceKind::floor), 0.5);
  EXPECT_EQ(adjustment_factor(SurfaceKind::roof), 1.0);
  EXPECT_EQ(adjustment_factor(SurfaceKind::wall), 1.0);
  EXPECT_EQ(adjustment_factor(SurfaceKind::window), 1.0);
}

TEST(EffectiveU, RejectsInvalidSurfaces) {
  auto bad_u = SurfaceSpec::make(SurfaceKind::wall, 10.0, 0.0);
  EXPECT_THROW(effective_u(bad_u, 1.0, 0.1), InvalidParameter);
  auto bad_area = SurfaceSpec::make(SurfaceKind::wall, -1.0, 1.0);
  EXPECT_THROW(effective_u(bad_area, 1.0, 0.1), InvalidParameter);
  auto ok = SurfaceSpec::make(SurfaceKind::wall, 1.0, 1.0);
  EXPECT_THROW(effective_u(ok, 0.0, 0.1), InvalidParameter);
  EXPECT_THROW(effective_u(ok, 1.2, 0.1), InvalidParameter);
  auto wrong_b = ok;
  wrong_b.adjustment_b = 0.5;
  EXPECT_THROW(wrong_b.validate(), InvalidParameter);
}

TEST(EffectiveU, NoReductionNoBridgeIsPlainAdjustedU) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.05, 6.0);
  for (auto kind : {SurfaceKind::roof, SurfaceKind::wall, SurfaceKind::floor, SurfaceKind::window}) {
    for (int i = 0; i < 50; ++i) {
      auto s = SurfaceSpec::make(kind, 3.0, u(rng));
      EXPECT_EQ(effective_u(s, 1.0, 0.0), adjustment_factor(kind) * s.u_value);
    }
  }
}

TEST(DeriveConductances, MassCoupling) {
  auto p = small_house();
  p.floor_area_m2 = 100.0;
  p.f_ms = 2.5;
  EXPECT_NEAR(derive_conductances(p).h_mas, 2275.0, 1e-9);
}

TEST(DeriveConductances, OpaqueSplit) {
  // A single opaque wall with U_eq = 5 W/(m2K) over 100 m2 gives h_op = 500 W/K.
  BuildingParams p;
  p.surfaces = {SurfaceSpec::make(SurfaceKind::wall, 100.0, 4.9)};
  p.floor_area_m2 = 100.0;
  p.f_ms = 2.5;
  p.f_red = 1.0;
  p.heat_capacity_j_per_k = 1e7;
  auto c = derive_conductances(p);
  EXPECT_NEAR(c.h_op, 500.0, 1e-9);
  EXPECT_NEAR(c.h_tra, 1.0 / (1.0 / 500.0 - 1.0 / 2275.0), 1e-9);
  EXPECT_NEAR(c.h_tra, 640.8, 0.05);
  EXPECT_EQ(c.h_win, 0.0);
}

TEST(DeriveConductances, TotalAreaUsesStoreys) {
  auto p = small_house();
  p.storeys = 2;
  auto c = derive_conductances(p);
  EXPECT_NEAR(c.a_tot, 380.0, 1e-12);
  EXPECT_NEAR(c.h_the, 1311.0, 1e-9);
  EXPECT_NEAR(c.a_mas, 250.0, 1e-12);
}

TEST(DeriveConductances, WindowsAndVentilation) {
  auto p = small_house();
  auto c = derive_conductances(p);
  EXPECT_NEAR(c.h_win, 20.0 * (1.3 + 0.1) * 0.9, 1e-12);
  const double volume = 100.0 * 2.5 * 2;
  const double m_air = 0.6 * 0.9 * volume * kRhoAir / 3600.0;
  EXPECT_NEAR(c.air_mass_flow, m_air, 1e-15);
  EXPECT_NEAR(c.h_ve, m_air * kCpAir, 1e-12);

  p.flags.ventilation = false;
  EXPECT_EQ(derive_conductances(p).h_ve, 0.0);
}

TEST(DeriveConductances, DegenerateWhenOpaqueExceedsMassCoupling) {
  BuildingParams p;
  p.surfaces = {SurfaceSpec::make(SurfaceKind::wall, 500.0, 5.0)};
  p.floor_area_m2 = 100.0;  // h_mas = 2275 < h_op = 2550
  p.heat_capacity_j_per_k = 1e7;
  EXPECT_THROW(derive_conductances(p), DegenerateNetwork);
}

TEST(DeriveConductances, InvalidParams) {
  auto p = small_house();
  p.f_red = 0.0;
  EXPECT_THROW(derive_conductances(p), InvalidParameter);
  p = small_house();
  p.storeys = 0;
  EXPECT_THROW(derive_conductances(p), InvalidParameter);
  p = small_house();
  p.heat_capacity_j_per_k = 0.0;
  EXPECT_THROW(derive_conductances(p), InvalidParameter);
  p = small_house();
  p.air_change_rate = -0.1;
  EXPECT_THROW(derive_conductances(p), InvalidParameter);
}

TEST(DeriveConductances, ReconstructionIdentity) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    auto p = random_building(rng);
    ConductanceSet c;
    try {
      c = derive_conductances(p);
    } catch (const DegenerateNetwork&) {
      continue;
    }
    EXPECT_NEAR(1.0 / c.h_tra + 1.0 / c.h_mas, 1.0 / c.h_op, 1e-14 / c.h_op);
  }
}

TEST(SplitGains, ZeroAndInternalOnly) {
  auto c = derive_conductances(small_house());
  auto z = split_gains(0.0, 0.0, c);
  EXPECT_EQ(z.phi_ia, 0.0);
  EXPECT_EQ(z.phi_st, 0.0);
  EXPECT_EQ(z.phi_m, 0.0);

  auto g = split_gains(200.0, 0.0, c);
  EXPECT_DOUBLE_EQ(g.phi_ia, 100.0);
  EXPECT_DOUBLE_EQ(g.phi_st + g.phi_m, 100.0);
}

TEST(SplitGains, PinnedAllocation) {
  // a_mas = 2.5 * 100 = 250 m2, a_tot = 380 m2:
  // phi_m = 250/380 * (100 + 300) = 263.1578947368421, phi_st = 400 - phi_m.
  auto c = derive_conductances(small_house());
  auto g = split_gains(200.0, 300.0, c);
  EXPECT_NEAR(g.phi_ia, 100.0, 1e-12);
  EXPECT_NEAR(g.phi_m, 263.1578947368421, 1e-9);
  EXPECT_NEAR(g.phi_st, 136.8421052631579, 1e-9);
  EXPECT_NEAR(g.total(), 500.0, 1e-12);
}

TEST(SplitGains, ConservesInjectedPower) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> w(0.0, 5000.0);
  for (int i = 0; i < 100; ++i) {
    auto p = random_building(rng);
    ConductanceSet c;
    try {
      c = derive_conductances(p);
    } catch (const DegenerateNetwork&) {
      continue;
    }
    const double internal = w(rng), solar = w(rng);
    auto g = split_gains(internal, solar, c);
    EXPECT_NEAR(g.total(), internal + solar, 1e-9 * (internal + solar + 1.0));
    EXPECT_GE(g.phi_st, 0.0);
    EXPECT_GE(g.phi_m, 0.0);
  }
}

TEST(StepThermal, EquilibriumIsFixedPoint) {
  auto c = derive_conductances(small_house());
  const double t = 293.15;
  auto s0 = ThermalState::uniform(t, 3.3e7);
  auto r = step_thermal(s0, c, {}, t, t, 0.0, 900.0);
  EXPECT_NEAR(r.state.t_air, t, 1e-10);
  EXPECT_NEAR(r.state.t_sur, t, 1e-10);
  EXPECT_NEAR(r.state.t_mas, t, 1e-10);
  EXPECT_NEAR(r.flow.ventilation_w, 0.0, 1e-8);
  EXPECT_NEAR(r.flow.window_w, 0.0, 1e-8);
  EXPECT_NEAR(r.flow.opaque_w, 0.0, 1e-8);
}

TEST(StepThermal, ZeroStepLeavesMassUnchanged) {
  auto c = derive_conductances(small_house());
  ThermalState s0{290.0, 289.0, 288.0, 3.3e7};
  auto r = step_thermal(s0, c, {100.0, 50.0, 20.0}, 270.0, 270.0, 500.0, 1e-12);
  EXPECT_NEAR(r.state.t_mas, s0.t_mas, 1e-9);
  EXPECT_EQ(r.state.c_m, s0.c_m);
}

TEST(StepThermal, RejectsBadInput) {
  auto c = derive_conductances(small_house());
  auto s0 = ThermalState::uniform(293.15, 3.3e7);
  EXPECT_THROW(step_thermal(s0, c, {}, NAN, 273.15, 0.0, 60.0), NumericError);
  EXPECT_THROW(step_thermal(s0, c, {}, 273.15, 273.15, INFINITY, 60.0), NumericError);
  EXPECT_THROW(step_thermal(s0, c, {}, 273.15, 273.15, 0.0, 0.0), InvalidParameter);
}

TEST(StepThermal, ConvergesToDirectLinearSolve) {
  auto c = derive_conductances(small_house());
  const NodeInjections inj{150.0, 220.0, 310.0};
  const double t_ext = 273.15, q = 4000.0;
  auto expected = oracle::steady_state(as_oracle(c), t_ext, t_ext, inj.phi_ia + q, inj.phi_st, inj.phi_m);

  auto s = ThermalState::uniform(293.15, 165000.0 * 200.0);
  for (int i = 0; i < 20000; ++i) s = step_thermal(s, c, inj, t_ext, t_ext, q, 3600.0).state;
  EXPECT_NEAR(s.t_air, expected.t_air, 1e-6 * expected.t_air);
  EXPECT_NEAR(s.t_sur, expected.t_sur, 1e-6 * expected.t_sur);
  EXPECT_NEAR(s.t_mas, expected.t_mas, 1e-6 * expected.t_mas);
}

TEST(StepThermal, LongStepIsSubdividedNotRejected) {
  auto c = derive_conductances(small_house());
  auto s0 = ThermalState::uniform(293.15, 3.3e7);
  auto one = step_thermal(s0, c, {}, 263.15, 263.15, 0.0, 900.0);
  auto s = s0;
  for (int i = 0; i < 15; ++i) s = step_thermal(s, c, {}, 263.15, 263.15, 0.0, 60.0).state;
  EXPECT_DOUBLE_EQ(one.state.t_mas, s.t_mas);
}

TEST(StepThermal, MassNodeEnergyBalance) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> text(253.15, 303.15);
  std::uniform_real_distribution<double> gain(0.0, 3000.0);
  auto c = derive_conductances(small_house());
  auto s = ThermalState::uniform(293.15, 3.3e7);
  const double t0_mas = s.t_mas;
  double energy_in = 0.0, throughput = 0.0;
  for (int i = 0; i < 2000; ++i) {
    NodeInjections inj{gain(rng), gain(rng), gain(rng)};
    auto r = step_thermal(s, c, inj, text(rng), text(rng), gain(rng), 60.0);
    energy_in += r.flow.mass_net_w * 60.0;
    throughput += std::abs(r.flow.mass_net_w) * 60.0;
    s = r.state;
  }
  EXPECT_NEAR(s.c_m * (s.t_mas - t0_mas), energy_in, 1e-6 * throughput);
}

TEST(StepThermal, HigherUValueNeedsMoreHeat) {
  // Steady heating power that holds T_air = 20 C at T_ext = 0 C grows with any U.
  auto demand = [](const BuildingParams& p) {
    auto c = derive_conductances(p);
    const double t_ext = 273.15, target = 293.15;
    auto net = as_oracle(c);
    auto at0 = oracle::steady_state(net, t_ext, t_ext, 100.0, 50.0, 80.0);
    auto at1 = oracle::steady_state(net, t_ext, t_ext, 1100.0, 50.0, 80.0);
    return 1000.0 * (target - at0.t_air) / (at1.t_air - at0.t_air);
  };
  auto base = small_house();
  const double q0 = demand(base);
  for (std::size_t i = 0; i < base.surfaces.size(); ++i) {
    auto p = base;
    p.surfaces[i].u_value *= 1.05;
    EXPECT_GT(demand(p), q0) << p.surfaces[i].name;
  }
}

TEST(AccumulateLosses, OneHourVentilation) {
  // 0.05 kg/s of air, 10 K warmer inside for one hour.
  FlowRecord f;
  f.ventilation_w = -0.05 * kCpAir * 10.0;
  std::vector<FlowRecord> flows(60, f);
  auto l = accumulate_losses(flows, 60.0);
  EXPECT_NEAR(l.q_ht_ven_kwh, 0.506, 1e-12);
  EXPECT_EQ(l.q_ht_tr_kwh, 0.0);
}

TEST(AccumulateLosses, NoGradientNoLoss) {
  std::vector<FlowRecord> flows(96);
  auto l = accumulate_losses(flows, 900.0);
  EXPECT_EQ(l.total_kwh(), 0.0);
}

TEST(AccumulateLosses, OneDayAgreesWithTrapezoid) {
  auto c = derive_conductances(small_house());
  auto s = ThermalState::uniform(293.15, 3.3e7);
  const double dt = 60.0;
  const int n = 1440;
  std::vector<FlowRecord> flows;
  std::vector<double> ven{c.h_ve * (s.t_air - 278.15)};
  std::vector<double> tr{c.h_win * (s.t_sur - 278.15) + c.h_tra * (s.t_mas - 278.15)};
  for (int i = 1; i <= n; ++i) {
    const double t_ext = 278.15 + 6.0 * std::sin(2.0 * M_PI * i / n);
    auto r = step_thermal(s, c, {200.0, 100.0, 100.0}, t_ext, t_ext, 3000.0, dt);
    flows.push_back(r.flow);
    s = r.state;
    ven.push_back(c.h_ve * (s.t_air - t_ext));
    tr.push_back(c.h_win * (s.t_sur - t_ext) + c.h_tra * (s.t_mas - t_ext));
  }
  auto l = accumulate_losses(flows, dt);
  EXPECT_LT(oracle::relative_error(l.q_ht_ven_kwh, oracle::trapezoid(ven, dt) / 3.6e6), 1e-3);
  EXPECT_LT(oracle::relative_error(l.q_ht_tr_kwh, oracle::trapezoid(tr, dt) / 3.6e6), 1e-3);
}
