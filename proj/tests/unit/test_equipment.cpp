#include "districtsim/equipment.hpp"
#include "districtsim/errors.hpp"
#include "districtsim/units.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace districtsim;
using namespace districtsim::equipment;

TEST(Appliances, TableRatios) {
  auto r = ApplianceRatios::defaults();
  EXPECT_EQ(r.entries().size(), 15u);
  EXPECT_NEAR(appliance_heat({{"dishwasher", 1000.0}}, r), 50.0, 1e-12);
  EXPECT_EQ(appliance_heat({{"vehicle", 3000.0}}, r), 0.0);
  EXPECT_EQ(appliance_heat({{"fridge", 100.0}}, r), 100.0);
}

TEST(Appliances, UnknownCategoryIsConfigError) {
  EXPECT_THROW(appliance_heat({{"jacuzzi", 10.0}}, ApplianceRatios::defaults()), ConfigError);
  EXPECT_THROW(ApplianceRatios({{"x", 1.5}}), ConfigError);
  EXPECT_THROW(appliance_heat({{"fridge", -1.0}}, ApplianceRatios::defaults()), InvalidParameter);
}

TEST(Appliances, HeatNeverExceedsElectricity) {
  auto r = ApplianceRatios::defaults();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> p(0.0, 2000.0);
  for (int i = 0; i < 200; ++i) {
    std::map<std::string, double> load;
    double total = 0.0;
    for (const auto& [name, ratio] : r.entries()) {
      load[name] = p(rng);
      total += load[name];
    }
    EXPECT_LE(appliance_heat(load, r), total);
  }
}

TEST(Radiator, NoCallForHeat) {
  BufferTank tank;
  auto res = radiator_step(to_kelvin(22.0), to_kelvin(20.0), tank, RadiatorSpec{}, true);
  EXPECT_EQ(res.m_flow, 0.0);
  EXPECT_EQ(res.q_emit, 0.0);
  EXPECT_EQ(radiator_emission(0.0, to_kelvin(80.0), to_kelvin(18.0), 300.0), 0.0);
}

TEST(Radiator, FullFlowEffectiveness) {
  BufferTank tank;
  tank.t_buffer = to_kelvin(80.0);
  RadiatorSpec spec{0.05, 300.0, 2.0};
  auto res = radiator_step(to_kelvin(18.0), to_kelvin(20.0), tank, spec, true);
  EXPECT_EQ(res.m_flow, 0.05);
  // eps = 1 - exp(-300 / 209.3) = 0.76149...
  EXPECT_NEAR(res.q_emit, 9881.567285856205, 1e-6);
  EXPECT_LE(res.q_emit, 0.05 * 4186.0 * 62.0);
}

TEST(Radiator, OffOutsideSeasonOrWhenTankDepleted) {
  BufferTank tank;
  EXPECT_EQ(radiator_step(to_kelvin(15.0), to_kelvin(20.0), tank, RadiatorSpec{}, false).q_emit, 0.0);
  tank.t_buffer = to_kelvin(70.0);
  EXPECT_EQ(radiator_step(to_kelvin(15.0), to_kelvin(20.0), tank, RadiatorSpec{}, true).m_flow, 0.0);
}

TEST(Radiator, EmissionBoundedByAvailableEnthalpy) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> flow(1e-5, 0.2), tw(300.0, 370.0), ta(280.0, 300.0), ua(10.0, 2000.0);
  for (int i = 0; i < 1000; ++i) {
    const double m = flow(rng), w = tw(rng), a = ta(rng);
    const double q = radiator_emission(m, w, a, ua(rng));
    EXPECT_GE(q, 0.0);
    EXPECT_LE(q, m * kCpWater * (w - a) * (1.0 + 1e-12));
  }
}

TEST(Radiator, ProportionalFlow) {
  BufferTank tank;
  RadiatorSpec spec{0.1, 300.0, 2.0};
  auto res = radiator_step(to_kelvin(19.5), to_kelvin(20.0), tank, spec, true);
  EXPECT_NEAR(res.m_flow, 0.025, 1e-12);
}

TEST(AirConditioner, DisabledAndDeadband) {
  AcSpec spec;
  EXPECT_EQ(ac_power(to_kelvin(10.0), to_kelvin(20.0), spec, false, 1e-3), 0.0);
  EXPECT_EQ(ac_power(to_kelvin(20.0), to_kelvin(20.0), spec, true, 1e-3), 0.0);
  EXPECT_EQ(ac_power(to_kelvin(20.4), to_kelvin(20.0), spec, true, 1e-3), 0.0);
}

TEST(AirConditioner, ClampsAtCapacity) {
  AcSpec spec;
  spec.capacity = 2000.0;
  EXPECT_EQ(ac_power(to_kelvin(26.0), to_kelvin(20.0), spec, true, 1e-4), -2000.0);
  EXPECT_EQ(ac_power(to_kelvin(14.0), to_kelvin(20.0), spec, true, 1e-4), 2000.0);
}

TEST(AirConditioner, ModeRestrictions) {
  AcSpec spec;
  spec.allow_cooling = false;
  EXPECT_EQ(ac_power(to_kelvin(26.0), to_kelvin(20.0), spec, true, 1e-4), 0.0);
  spec.allow_cooling = true;
  spec.allow_heating = false;
  EXPECT_EQ(ac_power(to_kelvin(14.0), to_kelvin(20.0), spec, true, 1e-4), 0.0);
}

TEST(AirConditioner, NeverOvershoots) {
  // Linear room: t_after = t_free + response * q.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> t(280.0, 310.0), resp(1e-5, 1e-2), cap(0.0, 8000.0);
  AcSpec spec;
  const double set = to_kelvin(20.0);
  for (int i = 0; i < 2000; ++i) {
    spec.capacity = cap(rng);
    const double free = t(rng), r = resp(rng);
    const double q = ac_power(free, set, spec, true, r);
    const double after = free + r * q;
    if (free < set) {
      EXPECT_LE(after, set + spec.deadband + 1e-9);
    }
    if (free > set) {
      EXPECT_GE(after, set - spec.deadband - 1e-9);
    }
    EXPECT_LE(std::abs(q), spec.capacity);
  }
}

TEST(BufferTank, Adiabatic) {
  BufferTank tank;
  tank.ua_loss = 0.0;
  auto next = buffer_tank_step(tank, 0.0, 0.0, to_kelvin(20.0), 900.0);
  EXPECT_EQ(next.t_buffer, tank.t_buffer);
}

TEST(BufferTank, FiveKilowattsForAMinute) {
  BufferTank tank;
  tank.ua_loss = 0.0;
  auto next = buffer_tank_step(tank, 5000.0, 0.0, to_kelvin(20.0), 60.0);
  EXPECT_NEAR(next.t_buffer - tank.t_buffer, 0.23889154323936931, 1e-12);
}

TEST(BufferTank, StandbyDecayMatchesClosedForm) {
  BufferTank tank;
  tank.t_buffer = to_kelvin(80.0);
  const double room = to_kelvin(20.0);
  for (int i = 0; i < 1440; ++i) tank = buffer_tank_step(tank, 0.0, 0.0, room, 60.0);
  const double tau = 300.0 * kCpWater / 2.0;
  const double expected = 60.0 * std::exp(-86400.0 / tau);
  EXPECT_NEAR((tank.t_buffer - room) / expected, 1.0, 1e-3);
  EXPECT_NEAR(to_celsius(tank.t_buffer), 72.28675211359739, 0.06);
}

TEST(BufferTank, EnergyBookkeepingPerStep) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> q(0.0, 20000.0), dt(1.0, 900.0);
  BufferTank tank;
  const double room = to_kelvin(20.0);
  for (int i = 0; i < 500; ++i) {
    const double qi = q(rng), qo = q(rng), h = dt(rng);
    auto next = buffer_tank_step(tank, qi, qo, room, h);
    const double stored = tank.heat_capacity() * (next.t_buffer - tank.t_buffer);
    const double net = (qi - qo - tank.ua_loss * (tank.t_buffer - room)) * h;
    EXPECT_NEAR(stored, net, 1e-9 * (std::abs(net) + qi * h + qo * h));
    tank = next;
  }
}

TEST(BufferTank, Validation) {
  BufferTank tank;
  tank.water_mass = 0.0;
  EXPECT_THROW(tank.validate(), InvalidParameter);
  tank = BufferTank{};
  tank.set_point = to_kelvin(90.0);
  EXPECT_THROW(tank.validate(), InvalidParameter);
  EXPECT_THROW(buffer_tank_step(BufferTank{}, 0.0, 0.0, 293.15, 0.0), InvalidParameter);
}

TEST(Dhw, Stub) {
  EXPECT_EQ(dhw_draw(false, 2000.0), 0.0);
  EXPECT_EQ(dhw_draw(true, 0.0), 0.0);
  EXPECT_EQ(dhw_draw(true, 2000.0), 2000.0);
}
