#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "districtsim/cosim.hpp"
#include "districtsim/dhnet.hpp"
#include "districtsim/envelope.hpp"
#include "districtsim/equipment.hpp"
#include "districtsim/hiu.hpp"

namespace districtsim::scenario {

inline constexpr double kDefaultWeatherMeanC = 10.512;

/// Uniformly sampled outdoor conditions. Sample k covers
/// [t0 + k*interval, t0 + (k+1)*interval); times are seconds since Jan 1 00:00.
struct WeatherSeries {
  double t0 = 0.0;
  double interval_s = 900.0;
  std::vector<double> t_out_c;
  std::vector<double> ghi_w_m2;

  std::size_t size() const { return t_out_c.size(); }
  double t_end() const { return t0 + interval_s * static_cast<double>(size()); }
  std::size_t index(double t_s) const;
  double t_out_k(double t_s) const;
  double ghi(double t_s) const;
  double mean_t_out_c() const;
};

/// timestamp, temperature in C, global horizontal irradiance in W/m2; further
/// columns are ignored. `source` names the input in error messages.
WeatherSeries parse_weather(std::istream& in, const std::string& source = "weather");
WeatherSeries load_weather(const std::filesystem::path& path);
/// Shift temperatures so their mean equals `target_mean_c`; irradiance is untouched.
WeatherSeries adjust_mean(WeatherSeries series, double target_mean_c);
WeatherSeries load_weather_adjusted(const std::filesystem::path& path, double target_mean_c = kDefaultWeatherMeanC);

/// Electrical power per appliance category, same sampling rules as the weather.
struct ApplianceProfile {
  double t0 = 0.0;
  double interval_s = 900.0;
  std::vector<std::string> categories;
  std::vector<double> power_w;  // row-major, one row per sample

  std::size_t size() const { return categories.empty() ? 0 : power_w.size() / categories.size(); }
  double t_end() const { return t0 + interval_s * static_cast<double>(size()); }
  std::size_t index(double t_s) const;
  double electric_w(double t_s) const;
  /// Heat released indoors under `ratios`.
  double heat_w(double t_s, const equipment::ApplianceRatios& ratios) const;
  std::map<std::string, double> annual_kwh() const;
};

ApplianceProfile parse_appliances(std::istream& in, const equipment::ApplianceRatios& ratios,
                                  const std::string& source = "appliances");
ApplianceProfile load_appliances(const std::filesystem::path& path, const equipment::ApplianceRatios& ratios);

/// Space heating window of a non-leap year: Jan 1 to `spring_end`, and
/// `autumn_start` to Dec 31, both inclusive.
struct HeatingCalendar {
  int spring_end_month = 5;
  int spring_end_day = 10;
  int autumn_start_month = 10;
  int autumn_start_day = 1;

  void validate() const;
};

/// Zero-based day of the year of a month/day in a non-leap year.
int day_of_year(int month, int day);
bool heating_season(double t_s, const HeatingCalendar& calendar);

/// node <id> <source|junction|substation> <x> <y> [building]
/// pipe <id> <from> <to> <length_m> <u_prime_W_per_mK> <diameter_m> [roughness_m]
dhnet::NetworkTopology parse_topology(std::istream& in, const std::string& source = "topology");
dhnet::NetworkTopology load_topology(const std::filesystem::path& path);

struct GroundSpec {
  double mean_c = 10.0;
  double amplitude_k = 5.0;
  double phase_day = 210.0;
};

struct BuildingConfig {
  std::string id;
  std::string label;
  std::string construction_class = "medium";
  envelope::BuildingParams params;
  equipment::RadiatorSpec radiator;
  equipment::BufferTank tank;
  equipment::AcSpec ac;
  hiu::HxSpec hx;
  hiu::DemandLaw demand;
};

struct ScenarioConfig {
  std::string name;
  std::filesystem::path weather_file;
  std::filesystem::path appliance_file;
  std::filesystem::path topology_file;
  std::filesystem::path reference_file;  // optional
  double weather_target_mean_c = kDefaultWeatherMeanC;
  double t0 = 0.0;
  double t_end = 365.0 * 86400.0;
  double dt_comm = 900.0;
  double set_point_k = 293.15;
  HeatingCalendar calendar;
  std::map<std::string, double> orientation_factors;
  std::map<std::string, double> appliance_ratios;
  GroundSpec ground;
  dhnet::SourceSpec source;
  dhnet::SubstationParams substation;
  double grid_substep_s = 60.0;
  std::vector<BuildingConfig> buildings;

  const BuildingConfig& building(const std::string& id) const;
};

/// Per-m2 heat capacity (J/(m2 K)) and mass area factor of a construction class.
struct ConstructionClass {
  double capacity_per_m2;
  double f_ms;
};
ConstructionClass construction_class(const std::string& name);

/// Effective solar aperture of glazing with total solar energy transmittance `g`.
double window_aperture(double g_value);

/// Parse and validate a scenario document. Relative file references resolve
/// against `base_dir`. Errors carry the JSON pointer of the offending entry.
ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Fully resolved configuration (all defaults, absolute paths) as canonical JSON.
/// parse_scenario(dump_resolved(c), any_dir) reproduces c.
std::string dump_resolved(const ScenarioConfig& config);

/// Everything a run needs, loaded and cross-checked.
struct Scenario {
  ScenarioConfig config;
  WeatherSeries weather;
  ApplianceProfile appliances;
  std::optional<dhnet::NetworkTopology> topology;
  equipment::ApplianceRatios ratios;
};

/// Loads all referenced files, checks that weather and profile cover the
/// horizon and that substations and buildings bind one to one.
Scenario load_data(const ScenarioConfig& config);

/// Master-side run description: which scenario, how ports connect, and which
/// simulators live behind a remote endpoint ("host:port").
struct CouplingFile {
  std::filesystem::path scenario;
  cosim::Coupling coupling;
  std::map<std::string, std::string> remote;
};

/// {"scenario": path, "edges": [["sim.port", "sim.port"], ...], "remote": {id: endpoint}}
CouplingFile parse_coupling(const std::string& text, const std::filesystem::path& base_dir);
CouplingFile load_coupling(const std::filesystem::path& path);

}  // namespace districtsim::scenario
