#include "districtsim/equipment.hpp"

#include "districtsim/errors.hpp"

#include <algorithm>
#include <cmath>

namespace districtsim::equipment {

ApplianceRatios ApplianceRatios::defaults() {
  return ApplianceRatios({
      {"light", 0.95},
      {"stove", 0.99},
      {"coffee_machine", 0.1},
      {"toaster", 0.98},
      {"electric_kettle", 0.9},
      {"entertainment", 0.5},
      {"hood", 0.01},
      {"oven", 0.98},
      {"dryer", 0.95},
      {"fridge", 1.0},
      {"dishwasher", 0.05},
      {"microwave", 0.3},
      {"washing_machine", 0.01},
      {"hair_dryer", 0.9},
      {"vehicle", 0.0},
  });
}

ApplianceRatios::ApplianceRatios(std::map<std::string, double> ratios) : ratios_(std::move(ratios)) {
  for (const auto& [name, r] : ratios_)
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError(name, "heat-to-electricity ratio must be in [0, 1]");
}

double ApplianceRatios::ratio(const std::string& category) const {
  auto it = ratios_.find(category);
  if (it == ratios_.end()) throw ConfigError(category, "unknown appliance category");
  return it->second;
}

double appliance_heat(const std::map<std::string, double>& p_el_by_category_w, const ApplianceRatios& ratios) {
  double q = 0.0;
  for (const auto& [name, p] : p_el_by_category_w) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidParameter("appliance '" + name + "' power must be >= 0");
    q += ratios.ratio(name) * p;
  }
  return q;
}

void RadiatorSpec::validate() const {
  if (!(max_mass_flow > 0.0 && ua_emit > 0.0 && proportional_band > 0.0))
    throw InvalidParameter("radiator flow, UA and proportional band must be > 0");
}

void BufferTank::validate() const {
  if (!(water_mass > 0.0)) throw InvalidParameter("buffer tank water mass must be > 0");
  if (!(band_low <= set_point && set_point <= band_high))
    throw InvalidParameter("buffer tank set point must lie within its band");
  if (!(ua_loss >= 0.0)) throw InvalidParameter("buffer tank loss coefficient must be >= 0");
  if (!std::isfinite(t_buffer)) throw NumericError("non-finite buffer temperature");
}

double radiator_emission(double m_flow, double t_water, double t_air, double ua_emit) {
  if (m_flow <= 0.0 || t_water <= t_air) return 0.0;
  const double mc = m_flow * kCpWater;
  const double eps = -std::expm1(-ua_emit / mc);
  return eps * mc * (t_water - t_air);
}

RadiatorResult radiator_step(double t_air, double t_set, const BufferTank& tank, const RadiatorSpec& spec,
                             bool heating_season) {
  RadiatorResult r;
  if (!heating_season || tank.t_buffer < tank.band_low) return r;
  r.m_flow = spec.max_mass_flow * std::clamp((t_set - t_air) / spec.proportional_band, 0.0, 1.0);
  r.q_emit = radiator_emission(r.m_flow, tank.t_buffer, t_air, spec.ua_emit);
  return r;
}

double ac_power(double t_air, double t_set, const AcSpec& spec, bool enabled, double air_response_k_per_w) {
  if (!enabled || spec.capacity <= 0.0) return 0.0;
  const double error = t_set - t_air;
  if (std::abs(error) <= spec.deadband) return 0.0;
  if (error > 0.0 && !spec.allow_heating) return 0.0;
  if (error < 0.0 && !spec.allow_cooling) return 0.0;
  double q = air_response_k_per_w > 0.0 ? error / air_response_k_per_w : std::copysign(spec.capacity, error);
  return std::clamp(q, -spec.capacity, spec.capacity);
}

BufferTank buffer_tank_step(const BufferTank& tank, double q_in, double q_out, double t_room, double dt_s) {
  if (!(dt_s > 0.0)) throw InvalidParameter("time step must be > 0");
  if (!std::isfinite(q_in) || !std::isfinite(q_out) || !std::isfinite(t_room))
    throw NumericError("non-finite buffer tank input");
  BufferTank next = tank;
  const double loss = tank.ua_loss * (tank.t_buffer - t_room);
  next.t_buffer += (q_in - q_out - loss) * dt_s / tank.heat_capacity();
  return next;
}

}  // namespace districtsim::equipment
