#pragma once

#include <map>
#include <string>

#include "districtsim/units.hpp"

namespace districtsim::equipment {

/// Heat-to-electricity ratio per appliance category.
class ApplianceRatios {
 public:
  /// The 15 residential categories with their default ratios.
  static ApplianceRatios defaults();

  ApplianceRatios() = default;
  explicit ApplianceRatios(std::map<std::string, double> ratios);

  /// Throws ConfigError for unknown categories.
  double ratio(const std::string& category) const;
  bool contains(const std::string& category) const { return ratios_.count(category) != 0; }
  const std::map<std::string, double>& entries() const { return ratios_; }

 private:
  std::map<std::string, double> ratios_;
};

/// Sum of ratio * electrical power. Throws ConfigError on unknown categories and
/// InvalidParameter on negative power.
double appliance_heat(const std::map<std::string, double>& p_el_by_category_w, const ApplianceRatios& ratios);

struct RadiatorSpec {
  double max_mass_flow = 0.05;   // kg/s
  double ua_emit = 300.0;        // W/K
  double proportional_band = 2.0;  // K

  void validate() const;
};

struct BufferTank {
  double water_mass = 300.0;    // kg
  double t_buffer = 353.15;     // K
  double set_point = 353.15;    // K
  double band_low = 348.15;     // K
  double band_high = 358.15;    // K
  double ua_loss = 2.0;         // W/K

  bool within_band() const { return t_buffer >= band_low && t_buffer <= band_high; }
  double heat_capacity() const { return water_mass * kCpWater; }
  void validate() const;
};

struct RadiatorResult {
  double q_emit = 0.0;   // W
  double m_flow = 0.0;   // kg/s
};

/// Proportional flow control on the room deficit. Runs only in the heating
/// season and while the tank is not below its lower band limit.
RadiatorResult radiator_step(double t_air, double t_set, const BufferTank& tank, const RadiatorSpec& spec,
                             bool heating_season);

/// Emitted power of a water flow through an emitter: eps * m * cp * (t_water - t_air).
double radiator_emission(double m_flow, double t_water, double t_air, double ua_emit);

struct AcSpec {
  double capacity = 5000.0;   // W, symmetric
  double deadband = 0.5;      // K
  bool allow_heating = true;
  bool allow_cooling = true;
};

/// Ideal sensible air conditioner (+ heating, - cooling). `t_air` is the
/// temperature the room would reach without the device, `air_response` the
/// change of that temperature per watt supplied. Outside the deadband the
/// device targets t_set, clamped to +-capacity.
double ac_power(double t_air, double t_set, const AcSpec& spec, bool enabled, double air_response_k_per_w);

/// Explicit one-step energy balance of the buffer tank.
BufferTank buffer_tank_step(const BufferTank& tank, double q_in, double q_out, double t_room, double dt_s);

/// Domestic hot water draw; inactive unless enabled.
inline double dhw_draw(bool enabled, double profile_value_w) { return enabled ? profile_value_w : 0.0; }

}  // namespace districtsim::equipment
