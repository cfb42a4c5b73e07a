#include "districtsim/errors.hpp"
#include "districtsim/hiu.hpp"
#include "districtsim/simulators.hpp"
#include "districtsim/units.hpp"

#include <cmath>

namespace districtsim::sim {

namespace {

constexpr double kProbeW = 1000.0;

// The air node has no capacity, so the room temperature the radiator valve
// sees already contains the radiator's own output. Solve
// t = t_free + response * q_emit(t) for the valve's operating point.
equipment::RadiatorResult closed_loop_radiator(double t_free, double response, double t_set,
                                               const equipment::BufferTank& tank, const equipment::RadiatorSpec& spec,
                                               bool season) {
  auto at = [&](double t) { return equipment::radiator_step(t, t_set, tank, spec, season); };
  const auto open = at(t_free);
  if (open.q_emit <= 0.0) return open;
  double lo = t_free, hi = t_free + response * open.q_emit;
  for (int i = 0; i < 60 && hi - lo > 1e-10; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid - t_free - response * at(mid).q_emit < 0.0 ? lo : hi) = mid;
  }
  return at(hi);
}

}  // namespace

BuildingSimulator::BuildingSimulator(std::shared_ptr<const scenario::Scenario> scenario, const std::string& building_id)
    : scenario_(std::move(scenario)), config_(scenario_->config.building(building_id)) {
  cond_ = envelope::derive_conductances(config_.params);
  for (const auto& s : config_.params.surfaces)
    if (s.kind == envelope::SurfaceKind::window) solar_area_ += s.solar_aperture * s.solar_factor * s.area_m2;
  state_ = envelope::ThermalState::uniform(scenario_->config.set_point_k, config_.params.heat_capacity_j_per_k);
  tank_ = config_.tank;

  descriptor_.id = config_.id;
  descriptor_.inputs = {{hiu::kPortSupplyTemp, "K", scenario_->config.source.supply.at(scenario_->config.t0)},
                        {hiu::kPortMassFlow, "kg/s", 0.0},
                        {hiu::kPortReturnRequest, "K", scenario_->config.substation.buffer_set}};
  descriptor_.outputs = {{hiu::kPortBufferTemp, "K", 0.0}, {hiu::kPortDemand, "W", 0.0},  {kPortAirTemp, "K", 0.0},
                         {kPortOutdoorTemp, "K", 0.0},     {kPortRadiator, "W", 0.0},    {kPortAc, "W", 0.0},
                         {kPortVentLoss, "W", 0.0},        {kPortTransLoss, "W", 0.0},   {kPortHx, "W", 0.0},
                         {kPortGains, "W", 0.0}};
  descriptor_.validate();
}

cosim::PortValues BuildingSimulator::step(double t, double dt, const cosim::PortValues& inputs) {
  if (!(dt > 0.0)) throw InvalidParameter("time step must be > 0");
  const auto& sc = *scenario_;
  const auto& flags = config_.params.flags;
  const double set = sc.config.set_point_k;
  const hiu::HiuInputs grid{inputs.at(hiu::kPortSupplyTemp), inputs.at(hiu::kPortMassFlow),
                            inputs.at(hiu::kPortReturnRequest)};

  const int n = std::max(1, static_cast<int>(std::ceil(dt / envelope::kMaxSubstepSeconds - 1e-9)));
  const double h = dt / n;
  double t_air = 0.0, t_out_sum = 0.0, q_rad = 0.0, q_ac_sum = 0.0, q_ven = 0.0, q_tr = 0.0, q_hx = 0.0,
         q_gain = 0.0, draw = 0.0;
  for (int k = 0; k < n; ++k) {
    const double ts = t + k * h;
    const double t_out = sc.weather.t_out_k(ts);
    const double internal = flags.appliances ? sc.appliances.heat_w(ts, sc.ratios) : 0.0;
    const double solar = solar_area_ * sc.weather.ghi(ts);
    const auto inj = envelope::split_gains(internal, solar, cond_);

    auto next = envelope::step_thermal(state_, cond_, inj, t_out, t_out, 0.0, h);
    const auto probe = envelope::step_thermal(state_, cond_, inj, t_out, t_out, kProbeW, h);
    const double response = (probe.state.t_air - next.state.t_air) / kProbeW;

    equipment::RadiatorResult rad;
    if (flags.radiator)
      rad = closed_loop_radiator(next.state.t_air, response, set, tank_, config_.radiator,
                                 scenario::heating_season(ts, sc.config.calendar));
    const double t_heated = next.state.t_air + response * rad.q_emit;
    const double q_ac = flags.air_conditioner ? equipment::ac_power(t_heated, set, config_.ac, true, response) : 0.0;
    if (rad.q_emit + q_ac != 0.0)
      next = envelope::step_thermal(state_, cond_, inj, t_out, t_out, rad.q_emit + q_ac, h);

    const double q_draw = rad.q_emit + equipment::dhw_draw(flags.dhw, 0.0);
    if (flags.buffer_tank) {
      const auto unit = hiu::hiu_step(grid, tank_, config_.hx, config_.demand, q_draw, q_draw, state_.t_air, h);
      tank_ = unit.tank;
      q_hx += unit.hx.q_hx;
    }
    state_ = next.state;
    if (!std::isfinite(state_.t_air) || !std::isfinite(tank_.t_buffer))
      throw NumericError("building '" + config_.id + "' diverged at t = " + std::to_string(ts) + " s");

    t_air += state_.t_air;
    t_out_sum += t_out;
    q_rad += rad.q_emit;
    q_ac_sum += q_ac;
    q_ven -= next.flow.ventilation_w;
    q_tr -= next.flow.transmission_w();
    q_gain += internal + solar;
    draw += q_draw;
  }
  const double inv = 1.0 / n;
  const double demand = flags.buffer_tank ? hiu::buffer_demand(tank_, draw * inv, config_.demand) : 0.0;
  return {{hiu::kPortBufferTemp, tank_.t_buffer},
          {hiu::kPortDemand, demand},
          {kPortAirTemp, t_air * inv},
          {kPortOutdoorTemp, t_out_sum * inv},
          {kPortRadiator, q_rad * inv},
          {kPortAc, q_ac_sum * inv},
          {kPortVentLoss, q_ven * inv},
          {kPortTransLoss, q_tr * inv},
          {kPortHx, q_hx * inv},
          {kPortGains, q_gain * inv}};
}

}  // namespace districtsim::sim
