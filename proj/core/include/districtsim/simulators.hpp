#pragma once

#include <memory>
#include <string>
#include <vector>

#include "districtsim/cosim.hpp"
#include "districtsim/dhnet.hpp"
#include "districtsim/envelope.hpp"
#include "districtsim/equipment.hpp"
#include "districtsim/scenario.hpp"

namespace districtsim::sim {

// Building outputs beyond the heat-interface ports. Powers are step means in W,
// losses positive when heat leaves the building.
inline constexpr const char* kPortAirTemp = "T_air";
inline constexpr const char* kPortOutdoorTemp = "T_out";
inline constexpr const char* kPortRadiator = "Q_radiator";
inline constexpr const char* kPortAc = "Q_ac";
inline constexpr const char* kPortVentLoss = "Q_ht_ven";
inline constexpr const char* kPortTransLoss = "Q_ht_tr";
inline constexpr const char* kPortHx = "Q_hx";
inline constexpr const char* kPortGains = "Q_gain";

/// One building: 5R1C envelope, radiator, air conditioner, appliances and the
/// heat-interface unit with its buffer tank. Integrates in 60 s sub-steps.
class BuildingSimulator : public cosim::Simulator {
 public:
  BuildingSimulator(std::shared_ptr<const scenario::Scenario> scenario, const std::string& building_id);

  const cosim::SimulatorDescriptor& descriptor() const override { return descriptor_; }
  cosim::PortValues step(double t, double dt, const cosim::PortValues& inputs) override;

  const envelope::ThermalState& thermal_state() const { return state_; }
  const equipment::BufferTank& tank() const { return tank_; }
  const envelope::ConductanceSet& conductances() const { return cond_; }
  const scenario::BuildingConfig& config() const { return config_; }

 private:
  std::shared_ptr<const scenario::Scenario> scenario_;
  scenario::BuildingConfig config_;
  cosim::SimulatorDescriptor descriptor_;
  envelope::ConductanceSet cond_;
  double solar_area_ = 0.0;  // m2 of effective aperture per W/m2 horizontal
  envelope::ThermalState state_;
  equipment::BufferTank tank_;
};

/// Port name of a per-building grid signal, e.g. "T_sup[B1]".
std::string grid_port(const std::string& signal, const std::string& building_id);

/// District-heating network with its source and one substation per building.
class GridSimulator : public cosim::Simulator {
 public:
  explicit GridSimulator(std::shared_ptr<const scenario::Scenario> scenario, std::string id = "grid");

  const cosim::SimulatorDescriptor& descriptor() const override { return descriptor_; }
  cosim::PortValues step(double t, double dt, const cosim::PortValues& inputs) override;

  const std::vector<std::string>& buildings() const { return buildings_; }
  const std::vector<dhnet::SubstationState>& substations() const { return states_; }
  const dhnet::NetworkSolution& last_solution() const { return last_; }

 private:
  std::shared_ptr<const scenario::Scenario> scenario_;
  const dhnet::NetworkTopology* topo_;
  cosim::SimulatorDescriptor descriptor_;
  std::vector<std::string> buildings_;  // substation order
  std::vector<double> approach_;        // K, heat exchanger approach per building
  std::vector<dhnet::SubstationState> states_;
  std::vector<double> measured_supply_;
  dhnet::NetworkSolution last_;
};

/// Edges joining every building to its substation in both directions.
cosim::Coupling district_coupling(const std::vector<std::string>& building_ids, const std::string& grid_id = "grid");

/// In-process run of every building in the scenario, plus the grid when the
/// scenario has a topology, over the configured horizon.
cosim::RunLog run_district(std::shared_ptr<const scenario::Scenario> scenario, bool parallel = false,
                           std::vector<std::size_t> order = {});

}  // namespace districtsim::sim
